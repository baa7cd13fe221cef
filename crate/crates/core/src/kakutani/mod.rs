//! Kakutani series and the equivalence/singularity classifier.
//!
//! A [`ProductModel`] describes a base product of Cauchy factors
//! `(δ_n, γ_n)` together with a perturbation sequence. The laws of the base
//! and perturbed products are equivalent exactly when the weighted sequence
//! (`h_n/γ_n` for location shifts, `σ_n − 1` for dilations) is square
//! summable, and mutually singular otherwise. [`classify`] decides that
//! symbolically; [`kakutani_partial_sum`] and [`series_verdict`] work from the
//! truncated series `Σ_{n≤N} K_n` instead.

mod sequence;
mod series;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hellinger::{HellingerError, PerturbationCase};

pub use sequence::{lp_status, lp_tail, LpStatus, PowerGeometric, SequenceSpec, WeightedSequence};
pub use series::{kakutani_partial_sum, series_verdict, PartialSum, SumRow, TailBound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KakutaniError {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for a sequence of length {}", len.map_or("∞".to_string(), |l| l.to_string()))]
    IndexOutOfRange { index: u64, len: Option<usize> },
    #[error(transparent)]
    Hellinger(#[from] HellingerError),
}

/// Base product `(δ_n, γ_n)` and the perturbation applied to it. For
/// dilations the perturbation sequence holds `τ_n`, with `σ_n = 1 + τ_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductModel {
    kind: PerturbationCase,
    perturbation: SequenceSpec,
    location: SequenceSpec,
    scale: SequenceSpec,
}

impl ProductModel {
    pub fn new(
        kind: PerturbationCase,
        perturbation: SequenceSpec,
        location: SequenceSpec,
        scale: SequenceSpec,
    ) -> Result<Self, KakutaniError> {
        perturbation.validate()?;
        location.validate()?;
        scale.validate()?;
        if !scale.all_positive() {
            return Err(KakutaniError::InvalidModel(
                "every scale γ_n must be strictly positive".into(),
            ));
        }
        if kind == PerturbationCase::Multiplicative {
            if let Some(inf) = perturbation.infimum() {
                if inf <= -1.0 {
                    return Err(KakutaniError::InvalidModel(format!(
                        "dilations σ_n = 1 + τ_n must be positive, but τ reaches {inf}"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            perturbation,
            location,
            scale,
        })
    }

    /// Location shifts `h_n` of a product with locations 0 and scales `γ_n`.
    pub fn additive(shift: SequenceSpec, scale: SequenceSpec) -> Result<Self, KakutaniError> {
        Self::new(
            PerturbationCase::Additive,
            shift,
            SequenceSpec::Constant { value: 0.0 },
            scale,
        )
    }

    /// Dilations `σ_n = 1 + τ_n` of the standard product.
    pub fn multiplicative(tau: SequenceSpec) -> Result<Self, KakutaniError> {
        Self::new(
            PerturbationCase::Multiplicative,
            tau,
            SequenceSpec::Constant { value: 0.0 },
            SequenceSpec::Constant { value: 1.0 },
        )
    }

    pub fn kind(&self) -> PerturbationCase {
        self.kind
    }

    pub fn perturbation(&self) -> &SequenceSpec {
        &self.perturbation
    }

    pub fn location(&self) -> &SequenceSpec {
        &self.location
    }

    pub fn scale(&self) -> &SequenceSpec {
        &self.scale
    }

    /// Number of factors, `None` when every sequence is infinite.
    pub fn len(&self) -> Option<usize> {
        [&self.perturbation, &self.location, &self.scale]
            .iter()
            .filter_map(|s| s.len())
            .min()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The sequence whose ℓ² membership decides the dichotomy. Parametric
    /// pairs are divided symbolically, so rescaling `h` and `γ` by a common
    /// parametric factor leaves every term bit-for-bit unchanged.
    pub fn weighted(&self) -> WeightedSequence {
        if let Some(len) = self.len() {
            let values = (1..=len as u64)
                .map(|n| self.direct_weight(n).expect("within length"))
                .collect();
            return WeightedSequence::Finite { values };
        }
        let pert = self.perturbation.power_geometric().expect("parametric");
        match self.kind {
            PerturbationCase::Additive => {
                let scale = self.scale.power_geometric().expect("parametric");
                WeightedSequence::Parametric(pert.divide(&scale))
            }
            PerturbationCase::Multiplicative => WeightedSequence::Parametric(pert),
        }
    }

    fn direct_weight(&self, n: u64) -> Result<f64, KakutaniError> {
        match self.kind {
            PerturbationCase::Additive => Ok(self.perturbation.term(n)? / self.scale.term(n)?),
            PerturbationCase::Multiplicative => self.perturbation.term(n),
        }
    }

    fn check_index(&self, n: u64) -> Result<(), KakutaniError> {
        match self.len() {
            _ if n == 0 => Err(KakutaniError::IndexOutOfRange {
                index: n,
                len: self.len(),
            }),
            Some(len) if n as usize > len => Err(KakutaniError::IndexOutOfRange {
                index: n,
                len: Some(len),
            }),
            _ => Ok(()),
        }
    }
}

/// `ζ_n = h_n/γ_n` for location shifts or `τ_n` for dilations.
pub fn weighted_sequence(model: &ProductModel, n: u64) -> Result<f64, KakutaniError> {
    model.check_index(n)?;
    match model.len() {
        Some(_) => model.direct_weight(n),
        None => model.weighted().term(n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Equivalent,
    Singular,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    SymbolicL2,
    NumericTruncation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Human-readable notes plus named numbers backing a verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Evidence {
    pub notes: Vec<String>,
    #[serde(serialize_with = "ordered_map")]
    pub values: Vec<(String, f64)>,
}

impl Evidence {
    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn value(&mut self, name: &str, v: f64) {
        self.values.push((name.to_string(), v));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

fn ordered_map<S: Serializer>(values: &[(String, f64)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(
        values
            .iter()
            .map(|(k, v)| (k, if v.is_finite() { Some(*v) } else { None })),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub method: Method,
    pub evidence: Evidence,
}

/// Equivalent iff the weighted sequence is square summable.
pub fn classify(model: &ProductModel) -> ClassificationResult {
    let weighted = model.weighted();
    let mut evidence = Evidence::default();
    let (symbol, definition) = match model.kind {
        PerturbationCase::Additive => ("ζ_n", "h_n/γ_n"),
        PerturbationCase::Multiplicative => ("τ_n", "σ_n − 1"),
    };

    if let WeightedSequence::Finite { values } = &weighted {
        evidence.note(format!(
            "finite model with {} factors: {symbol} = {definition} is trivially square summable, so the infinite-product question is vacuous",
            values.len()
        ));
    } else if let WeightedSequence::Parametric(pg) = &weighted {
        evidence.note(format!(
            "{symbol} = {definition} = {} · n^(−{}) · {}^n",
            pg.amplitude, pg.decay, pg.ratio
        ));
        evidence.value("amplitude", pg.amplitude);
        evidence.value("decay", pg.decay);
        evidence.value("ratio", pg.ratio);
    }

    let status = lp_status(&weighted, 2.0).expect("p = 2 is valid");
    let verdict = match status {
        LpStatus::Summable { low, high } => {
            evidence.note(format!("Σ {symbol}² converges"));
            evidence.value("l2_sum_low", low);
            evidence.value("l2_sum_high", high);
            Verdict::Equivalent
        }
        LpStatus::Divergent => {
            if weighted.tends_to_zero() {
                evidence.note(format!("{symbol} → 0 but Σ {symbol}² diverges"));
            } else {
                evidence.note(format!(
                    "{symbol} does not converge to zero, so the summands K_n stay bounded away from zero"
                ));
            }
            Verdict::Singular
        }
    };
    ClassificationResult {
        verdict,
        method: Method::SymbolicL2,
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(a: f64, p: f64) -> SequenceSpec {
        SequenceSpec::PowerLaw {
            amplitude: a,
            exponent: p,
        }
    }

    fn constant(c: f64) -> SequenceSpec {
        SequenceSpec::Constant { value: c }
    }

    #[test]
    fn weighted_examples() {
        let m = ProductModel::additive(power(1.0, 1.0), constant(2.0)).unwrap();
        assert_eq!(weighted_sequence(&m, 3).unwrap(), 1.0 / 6.0);
        let m = ProductModel::multiplicative(SequenceSpec::Geometric {
            amplitude: 0.5,
            ratio: 0.9,
        })
        .unwrap();
        assert!((weighted_sequence(&m, 2).unwrap() - 0.405).abs() < 1e-16);
        let m = ProductModel::additive(power(1.0, 2.0), power(1.0, 1.0)).unwrap();
        assert!((weighted_sequence(&m, 5).unwrap() - 0.2).abs() < 1e-16);
        assert!(weighted_sequence(&m, 0).is_err());
    }

    #[test]
    fn explicit_exhaustion() {
        let m = ProductModel::additive(SequenceSpec::Explicit { values: vec![0.1, 0.2] }, constant(1.0)).unwrap();
        assert_eq!(weighted_sequence(&m, 2).unwrap(), 0.2);
        assert!(matches!(
            weighted_sequence(&m, 3),
            Err(KakutaniError::IndexOutOfRange { index: 3, len: Some(2) })
        ));
    }

    #[test]
    fn model_validation() {
        assert!(ProductModel::additive(power(1.0, 1.0), constant(0.0)).is_err());
        assert!(ProductModel::additive(power(1.0, 1.0), power(-1.0, 1.0)).is_err());
        assert!(ProductModel::multiplicative(constant(-1.0)).is_err());
        assert!(ProductModel::multiplicative(power(-1.5, 1.0)).is_err());
        assert!(ProductModel::multiplicative(power(-0.5, 1.0)).is_ok());
        assert!(ProductModel::multiplicative(SequenceSpec::Explicit {
            values: vec![0.1, -1.0]
        })
        .is_err());
    }

    #[test]
    fn classifier_examples() {
        let verdict = |h| classify(&ProductModel::additive(h, constant(1.0)).unwrap()).verdict;
        assert_eq!(verdict(power(1.0, 0.75)), Verdict::Equivalent);
        assert_eq!(verdict(power(1.0, 0.5)), Verdict::Singular);
        assert_eq!(verdict(constant(0.1)), Verdict::Singular);
        assert_eq!(verdict(constant(0.0)), Verdict::Equivalent);
        assert_eq!(
            verdict(SequenceSpec::Explicit { values: vec![5.0; 10] }),
            Verdict::Equivalent
        );
    }

    #[test]
    fn scale_weighting_matters() {
        // h_n = n^{-1/2} is not square summable on its own, but γ_n = n^{-1}
        // turns it into ζ_n = n^{1/2}
        let m = ProductModel::additive(power(1.0, 0.5), power(1.0, 1.0)).unwrap();
        assert_eq!(classify(&m).verdict, Verdict::Singular);
        // and the other way: h_n = n^{-1} alone is fine, but shrinking scales
        // γ_n = n^{-3/4} leave ζ_n = n^{-1/4}
        let m = ProductModel::additive(power(1.0, 1.0), power(1.0, 0.75)).unwrap();
        assert_eq!(classify(&m).verdict, Verdict::Singular);
    }

    #[test]
    fn divergent_evidence_notes_nonvanishing() {
        let r = classify(&ProductModel::additive(constant(0.1), constant(1.0)).unwrap());
        assert!(r.evidence.notes.iter().any(|n| n.contains("does not converge to zero")));
        assert_eq!(r.method, Method::SymbolicL2);
    }
}
