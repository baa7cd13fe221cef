//! Truncated Kakutani series `S_N = Σ_{n≤N} K_n` with tail brackets, and the
//! numeric verdict read off their growth.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    lp_tail, ClassificationResult, Evidence, KakutaniError, LpStatus, Method, ProductModel, Verdict, WeightedSequence,
};
use crate::hellinger::{quadratic_coefficient, summand_additive, summand_tau, PerturbationCase};

/// Largest `|t_n|` beyond `N` for which the quadratic tail bracket is offered.
pub const TAIL_VALIDITY: f64 = 0.1;

/// Half-width of the bracket around the measured quadratic coefficient.
pub const COEFFICIENT_SLACK: f64 = 0.25;

// Thresholds on the log-log slope β of K_n: K_n ~ n^{−β} sums iff β > 1.
const SINGULAR_SLOPE: f64 = 1.005;
const EQUIVALENT_SLOPE: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumRow {
    pub n: u64,
    pub weighted: f64,
    pub summand: f64,
    pub cumulative: f64,
}

/// What is known about `Σ_{n>N} K_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailBound {
    /// Finite model fully summed.
    Exact,
    Bracket {
        low: f64,
        high: f64,
    },
    /// The weighted sequence is not square summable beyond `N`.
    Divergent,
    /// Terms beyond `N` are too large for the quadratic approximation.
    Unavailable {
        sup_weighted: f64,
    },
}

impl TailBound {
    /// `(low, high)` with `high = ∞` when the tail is divergent or unknown.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Self::Exact => (0.0, 0.0),
            Self::Bracket { low, high } => (low, high),
            Self::Divergent => (f64::INFINITY, f64::INFINITY),
            Self::Unavailable { .. } => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub n: u64,
    pub sum: f64,
    pub tail: TailBound,
    pub rows: Vec<SumRow>,
}

impl PartialSum {
    pub fn tail_low(&self) -> f64 {
        self.tail.range().0
    }

    pub fn tail_high(&self) -> f64 {
        self.tail.range().1
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].cumulative >= w[0].cumulative)
    }
}

fn summand(kind: PerturbationCase, t: f64, tol: f64) -> Result<f64, KakutaniError> {
    Ok(match kind {
        PerturbationCase::Additive => summand_additive(t, tol)?,
        PerturbationCase::Multiplicative => summand_tau(t, tol)?,
    })
}

fn coefficient(kind: PerturbationCase) -> Result<f64, KakutaniError> {
    static ADDITIVE: OnceLock<f64> = OnceLock::new();
    static MULTIPLICATIVE: OnceLock<f64> = OnceLock::new();
    let cell = match kind {
        PerturbationCase::Additive => &ADDITIVE,
        PerturbationCase::Multiplicative => &MULTIPLICATIVE,
    };
    if let Some(c) = cell.get() {
        return Ok(*c);
    }
    let c = quadratic_coefficient(kind)?.value;
    Ok(*cell.get_or_init(|| c))
}

/// `S_N` with per-term rows and a bracket on the remainder. Summands are
/// evaluated in parallel and accumulated in ascending `n` with compensated
/// summation, so the result does not depend on the thread count. `tol` is the
/// relative tolerance on each affinity integral.
pub fn kakutani_partial_sum(model: &ProductModel, n_max: u64, tol: f64) -> Result<PartialSum, KakutaniError> {
    if n_max == 0 {
        return Err(KakutaniError::InvalidArgument("N must be at least 1".into()));
    }
    if let Some(len) = model.len() {
        if n_max as usize > len {
            return Err(KakutaniError::IndexOutOfRange {
                index: n_max,
                len: Some(len),
            });
        }
    }
    let weighted = model.weighted();
    let kind = model.kind();
    let terms: Vec<(f64, f64)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let w = weighted.term(n)?;
            Ok((w, summand(kind, w, tol)?))
        })
        .collect::<Result<_, KakutaniError>>()?;

    let mut rows = Vec::with_capacity(terms.len());
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for (i, (w, k)) in terms.into_iter().enumerate() {
        // Neumaier
        let t = sum + k;
        carry += if sum.abs() >= k.abs() {
            (sum - t) + k
        } else {
            (k - t) + sum
        };
        sum = t;
        rows.push(SumRow {
            n: i as u64 + 1,
            weighted: w,
            summand: k,
            cumulative: sum + carry,
        });
    }
    let total = rows.last().map_or(0.0, |r| r.cumulative);
    let tail = tail_bound(&weighted, kind, n_max)?;
    Ok(PartialSum {
        n: n_max,
        sum: total,
        tail,
        rows,
    })
}

fn tail_bound(weighted: &WeightedSequence, kind: PerturbationCase, n_max: u64) -> Result<TailBound, KakutaniError> {
    let pg = match weighted {
        WeightedSequence::Finite { .. } => return Ok(TailBound::Exact),
        WeightedSequence::Parametric(pg) => pg,
    };
    if pg.amplitude == 0.0 {
        return Ok(TailBound::Bracket { low: 0.0, high: 0.0 });
    }
    match lp_tail(weighted, 2.0, n_max)? {
        LpStatus::Divergent => Ok(TailBound::Divergent),
        LpStatus::Summable { low, high } => {
            let sup = pg.sup_abs_beyond(n_max);
            if sup > TAIL_VALIDITY {
                return Ok(TailBound::Unavailable { sup_weighted: sup });
            }
            let c = coefficient(kind)?;
            Ok(TailBound::Bracket {
                low: (1.0 - COEFFICIENT_SLACK) * c * low,
                high: (1.0 + COEFFICIENT_SLACK) * c * high,
            })
        }
    }
}

/// Verdict from the truncated series alone. The summands over the last
/// `window` terms are fitted to `K_n ≈ C n^{−β}`: `β ≥ 1.1` reads as a
/// convergent series, `β ≤ 1.005` as divergent, anything between as
/// undetermined. This is a heuristic about a finite prefix; the evidence
/// records `N`, the window and the fitted slope.
pub fn series_verdict(model: &ProductModel, n_max: u64, window: u64) -> Result<ClassificationResult, KakutaniError> {
    if window < 2 || window > n_max {
        return Err(KakutaniError::InvalidArgument(format!(
            "growth window must satisfy 2 <= window <= N, got window = {window}, N = {n_max}"
        )));
    }
    let partial = kakutani_partial_sum(model, n_max, crate::hellinger::DEFAULT_TOL)?;
    let mut evidence = Evidence::default();
    evidence.value("N", n_max as f64);
    evidence.value("window", window as f64);
    evidence.value("partial_sum", partial.sum);
    let start = (n_max - window) as usize;
    let increment = partial.sum
        - if start == 0 {
            0.0
        } else {
            partial.rows[start - 1].cumulative
        };
    evidence.value("window_increment", increment);
    let (tail_low, tail_high) = partial.tail.range();
    evidence.value("tail_low", tail_low);
    evidence.value("tail_high", tail_high);

    let finish = |verdict, evidence| ClassificationResult {
        verdict,
        method: Method::NumericTruncation,
        evidence,
    };

    if model.len().is_some() {
        evidence.note("finite model summed exactly; the infinite-product question is vacuous");
        return Ok(finish(Verdict::Equivalent, evidence));
    }

    let points: Vec<(f64, f64)> = partial.rows[start..]
        .iter()
        .filter(|r| r.summand > 0.0)
        .map(|r| ((r.n as f64).ln(), r.summand.ln()))
        .collect();
    if points.len() < 2 {
        evidence.note(format!("summands vanish over the last {window} terms"));
        return Ok(finish(Verdict::Equivalent, evidence));
    }
    let beta = -least_squares_slope(&points);
    evidence.value("slope", beta);

    let verdict = if beta >= EQUIVALENT_SLOPE {
        let last = partial.rows.last().expect("N >= 1").summand;
        let projected = last * n_max as f64 / (beta - 1.0);
        evidence.value("projected_tail", projected);
        evidence.note(format!("K_n decays like n^(−{beta:.4}), fast enough to sum"));
        Verdict::Equivalent
    } else if beta <= SINGULAR_SLOPE {
        evidence.note(format!(
            "K_n decays no faster than n^(−{beta:.4}), so S_N keeps growing"
        ));
        Verdict::Singular
    } else {
        evidence.note(format!(
            "fitted decay n^(−{beta:.4}) is too close to the summability threshold"
        ));
        Verdict::Undetermined
    };
    Ok(finish(verdict, evidence))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hellinger::DEFAULT_TOL;
    use crate::kakutani::{classify, SequenceSpec};

    fn additive(h: SequenceSpec) -> ProductModel {
        ProductModel::additive(h, SequenceSpec::Constant { value: 1.0 }).unwrap()
    }

    #[test]
    fn identity_sums_to_zero() {
        let m = additive(SequenceSpec::Constant { value: 0.0 });
        let p = kakutani_partial_sum(&m, 25, DEFAULT_TOL).unwrap();
        assert_eq!(p.sum, 0.0);
        assert_eq!(p.tail.range(), (0.0, 0.0));
        let m = ProductModel::multiplicative(SequenceSpec::Constant { value: 0.0 }).unwrap();
        assert_eq!(kakutani_partial_sum(&m, 10, DEFAULT_TOL).unwrap().sum, 0.0);
    }

    #[test]
    fn constant_sequence_adds_identical_summands() {
        let m = additive(SequenceSpec::Constant { value: 0.2 });
        let s = kakutani_partial_sum(&m, 40, DEFAULT_TOL).unwrap();
        let k = s.rows[0].summand;
        assert!(s.rows.iter().all(|r| r.summand == k));
        let half = s.rows[19].cumulative;
        assert!(((s.sum - half) - 20.0 * k).abs() <= 1e-15 * s.sum);
        assert_eq!(s.tail, TailBound::Divergent);
    }

    #[test]
    fn harmonic_shift_matches_oracle() {
        // S_50 of K(1/n), extended-precision quadrature per term
        let m = additive(SequenceSpec::PowerLaw {
            amplitude: 1.0,
            exponent: 1.0,
        });
        let s = kakutani_partial_sum(&m, 50, DEFAULT_TOL).unwrap();
        assert!((s.sum - 0.095_089_322_592_431_29).abs() < 1e-12, "{}", s.sum);
        assert!(s.is_monotone());
        let (lo, hi) = s.tail.range();
        assert!(0.0 < lo && lo < hi && hi < 0.0016);
    }

    #[test]
    fn large_terms_leave_tail_unavailable() {
        let m = additive(SequenceSpec::PowerLaw {
            amplitude: 5.0,
            exponent: 1.0,
        });
        let s = kakutani_partial_sum(&m, 10, DEFAULT_TOL).unwrap();
        assert!(matches!(s.tail, TailBound::Unavailable { .. }));
    }

    #[test]
    fn finite_model_cannot_overrun() {
        let m = additive(SequenceSpec::Explicit { values: vec![0.1; 4] });
        assert_eq!(kakutani_partial_sum(&m, 4, DEFAULT_TOL).unwrap().tail, TailBound::Exact);
        assert!(kakutani_partial_sum(&m, 5, DEFAULT_TOL).is_err());
    }

    #[test]
    fn numeric_verdicts_follow_growth() {
        let cases = [
            (
                SequenceSpec::PowerLaw {
                    amplitude: 1.0,
                    exponent: 1.0,
                },
                Verdict::Equivalent,
            ),
            (SequenceSpec::Constant { value: 0.2 }, Verdict::Singular),
            (
                SequenceSpec::PowerLaw {
                    amplitude: 1.0,
                    exponent: 0.5,
                },
                Verdict::Singular,
            ),
        ];
        for (spec, want) in cases {
            let m = additive(spec);
            let r = series_verdict(&m, 400, 100).unwrap();
            assert_eq!(r.verdict, want, "{:?}", r.evidence);
            assert_eq!(r.method, Method::NumericTruncation);
            assert_eq!(r.evidence.get("N"), Some(400.0));
            assert_eq!(classify(&m).verdict, want);
        }
    }

    #[test]
    fn window_validation() {
        let m = additive(SequenceSpec::Constant { value: 0.2 });
        assert!(series_verdict(&m, 10, 20).is_err());
        assert!(series_verdict(&m, 10, 1).is_err());
    }
}
