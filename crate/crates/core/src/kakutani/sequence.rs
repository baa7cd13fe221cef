//! Perturbation sequences and their ℓᵖ behaviour.

use serde::Serialize;

use super::KakutaniError;

/// Number of explicit terms summed before the integral tail bound takes over
/// for power-law sequences.
const POWER_LAW_TERMS: u64 = 1_000_000;

// Hard stop for explicit summation of geometrically damped sequences.
const GEOMETRIC_TERM_CAP: u64 = 50_000_000;

/// A perturbation (or base parameter) sequence indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum SequenceSpec {
    /// `t_n = amplitude · n^(−exponent)`
    #[serde(rename = "power")]
    PowerLaw { amplitude: f64, exponent: f64 },
    /// `t_n = amplitude · ratio^n`
    #[serde(rename = "geom")]
    Geometric { amplitude: f64, ratio: f64 },
    /// `t_n = value`
    #[serde(rename = "const")]
    Constant { value: f64 },
    /// A finite list `t_1, …, t_len`.
    Explicit { values: Vec<f64> },
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<(), KakutaniError> {
        let bad = |msg: String| Err(KakutaniError::InvalidSequence(msg));
        match self {
            Self::PowerLaw { amplitude, exponent } => {
                if !amplitude.is_finite() {
                    return bad(format!("power-law amplitude must be finite, got {amplitude}"));
                }
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return bad(format!("power-law exponent must be positive, got {exponent}"));
                }
            }
            Self::Geometric { amplitude, ratio } => {
                if !amplitude.is_finite() {
                    return bad(format!("geometric amplitude must be finite, got {amplitude}"));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return bad(format!("geometric ratio must lie in (0, 1), got {ratio}"));
                }
            }
            Self::Constant { value } => {
                if !value.is_finite() {
                    return bad(format!("constant must be finite, got {value}"));
                }
            }
            Self::Explicit { values } => {
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return bad(format!("explicit value #{} is not finite: {v}", i + 1));
                }
            }
        }
        Ok(())
    }

    /// Number of terms, or `None` for the infinite parametric families.
    pub fn len(&self) -> Option<usize> {
        match self {
            Self::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn term(&self, n: u64) -> Result<f64, KakutaniError> {
        if n == 0 {
            return Err(KakutaniError::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        match self {
            Self::Explicit { values } => values
                .get((n - 1) as usize)
                .copied()
                .ok_or(KakutaniError::IndexOutOfRange {
                    index: n,
                    len: Some(values.len()),
                }),
            _ => Ok(self.power_geometric().expect("parametric").term(n)),
        }
    }

    pub(crate) fn power_geometric(&self) -> Option<PowerGeometric> {
        match *self {
            Self::PowerLaw { amplitude, exponent } => Some(PowerGeometric {
                amplitude,
                decay: exponent,
                ratio: 1.0,
            }),
            Self::Geometric { amplitude, ratio } => Some(PowerGeometric {
                amplitude,
                decay: 0.0,
                ratio,
            }),
            Self::Constant { value } => Some(PowerGeometric {
                amplitude: value,
                decay: 0.0,
                ratio: 1.0,
            }),
            Self::Explicit { .. } => None,
        }
    }

    /// Smallest term over all `n`, used to check positivity constraints.
    /// `None` for an empty explicit list.
    pub(crate) fn infimum(&self) -> Option<f64> {
        match self {
            Self::Explicit { values } => values.iter().copied().reduce(f64::min),
            // monotone families: the infimum is either the first term or the limit
            Self::PowerLaw { amplitude, .. } | Self::Geometric { amplitude, .. } => {
                let first = self.term(1).expect("parametric");
                Some(if *amplitude >= 0.0 { 0.0 } else { first })
            }
            Self::Constant { value } => Some(*value),
        }
    }

    /// Whether every term is strictly positive.
    pub(crate) fn all_positive(&self) -> bool {
        match self {
            Self::Explicit { values } => values.iter().all(|v| *v > 0.0),
            Self::PowerLaw { amplitude, .. } | Self::Geometric { amplitude, .. } => *amplitude > 0.0,
            Self::Constant { value } => *value > 0.0,
        }
    }
}

/// `t_n = amplitude · n^(−decay) · ratio^n` with `ratio > 0`. Closed under
/// termwise division, which is how location shifts are weighted by scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerGeometric {
    pub amplitude: f64,
    pub decay: f64,
    pub ratio: f64,
}

impl PowerGeometric {
    pub fn term(&self, n: u64) -> f64 {
        let n = n as f64;
        let mut t = self.amplitude;
        if self.decay != 0.0 {
            t *= n.powf(-self.decay);
        }
        if self.ratio != 1.0 {
            t *= self.ratio.powf(n);
        }
        t
    }

    pub fn divide(&self, by: &PowerGeometric) -> PowerGeometric {
        PowerGeometric {
            amplitude: self.amplitude / by.amplitude,
            decay: self.decay - by.decay,
            ratio: self.ratio / by.ratio,
        }
    }

    pub fn tends_to_zero(&self) -> bool {
        self.amplitude == 0.0 || self.ratio < 1.0 || (self.ratio == 1.0 && self.decay > 0.0)
    }

    /// `sup_{n > after} |t_n|`; only meaningful when the sequence tends to zero.
    pub fn sup_abs_beyond(&self, after: u64) -> f64 {
        let first = after + 1;
        if self.decay >= 0.0 || self.ratio >= 1.0 {
            return self.term(first).abs();
        }
        // n^{|q|} r^n peaks at n* = |q| / (−ln r)
        let peak = -self.decay / -self.ratio.ln();
        if (first as f64) >= peak {
            return self.term(first).abs();
        }
        let lo = (peak.floor() as u64).max(first);
        self.term(lo).abs().max(self.term(lo + 1).abs())
    }
}

/// The sequence whose ℓ² membership decides equivalence: `ζ_n = h_n/γ_n` for
/// location shifts, `τ_n = σ_n − 1` for dilations.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum WeightedSequence {
    Parametric(PowerGeometric),
    Finite { values: Vec<f64> },
}

impl WeightedSequence {
    pub fn term(&self, n: u64) -> Result<f64, KakutaniError> {
        match self {
            Self::Parametric(pg) if n >= 1 => Ok(pg.term(n)),
            Self::Finite { values } if n >= 1 && (n as usize) <= values.len() => Ok(values[n as usize - 1]),
            _ => Err(KakutaniError::IndexOutOfRange {
                index: n,
                len: self.len(),
            }),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            Self::Parametric(_) => None,
            Self::Finite { values } => Some(values.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn tends_to_zero(&self) -> bool {
        match self {
            Self::Parametric(pg) => pg.tends_to_zero(),
            Self::Finite { .. } => true,
        }
    }
}

/// Result of an ℓᵖ test: either a bracket `[low, high]` containing
/// `Σ |t_n|^p`, or divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LpStatus {
    Summable { low: f64, high: f64 },
    Divergent,
}

impl LpStatus {
    pub fn is_summable(&self) -> bool {
        matches!(self, Self::Summable { .. })
    }

    fn exact(v: f64) -> Self {
        Self::Summable { low: v, high: v }
    }
}

/// `Σ_{n≥1} |t_n|^p`.
pub fn lp_status(seq: &WeightedSequence, p: f64) -> Result<LpStatus, KakutaniError> {
    lp_tail(seq, p, 0)
}

/// `Σ_{n>after} |t_n|^p`.
pub fn lp_tail(seq: &WeightedSequence, p: f64, after: u64) -> Result<LpStatus, KakutaniError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(KakutaniError::InvalidArgument(format!(
            "ℓᵖ exponent must be >= 1, got {p}"
        )));
    }
    match seq {
        WeightedSequence::Finite { values } => {
            let skip = (after as usize).min(values.len());
            Ok(LpStatus::exact(values[skip..].iter().map(|v| v.abs().powf(p)).sum()))
        }
        WeightedSequence::Parametric(pg) => Ok(parametric_tail(pg, p, after)),
    }
}

fn parametric_tail(pg: &PowerGeometric, p: f64, after: u64) -> LpStatus {
    let scale = pg.amplitude.abs().powf(p);
    let s = p * pg.decay;
    let r = pg.ratio.powf(p);
    if scale == 0.0 {
        return LpStatus::exact(0.0);
    }
    if r > 1.0 || (r == 1.0 && s <= 1.0) {
        return LpStatus::Divergent;
    }
    if r == 1.0 {
        return zeta_tail(scale, s, after);
    }
    if s == 0.0 {
        // Σ_{n>M} r^n = r^{M+1} / (1 − r)
        return LpStatus::exact(scale * r.powf(after as f64 + 1.0) / (1.0 - r));
    }
    damped_tail(scale, s, r, after)
}

/// `scale · Σ_{n>M} n^{−s}` for `s > 1`: explicit terms up to `K = M + L`,
/// then `∫_{K+1}^∞ x^{−s} dx ≤ Σ_{n>K} n^{−s} ≤ ∫_K^∞ x^{−s} dx`.
fn zeta_tail(scale: f64, s: f64, after: u64) -> LpStatus {
    let last = after + POWER_LAW_TERMS;
    // smallest terms first
    let mut partial = 0.0;
    for n in (after + 1..=last).rev() {
        partial += (n as f64).powf(-s);
    }
    let k = last as f64;
    let tail_low = (k + 1.0).powf(1.0 - s) / (s - 1.0);
    let tail_high = k.powf(1.0 - s) / (s - 1.0);
    let rounding = POWER_LAW_TERMS as f64 * f64::EPSILON * partial;
    LpStatus::Summable {
        low: scale * (partial + tail_low - rounding),
        high: scale * (partial + tail_high + rounding),
    }
}

/// `scale · Σ_{n>M} n^{−s} r^n` with `r < 1`: sum until the terms are
/// negligible and past the peak, then bound the rest by a geometric series
/// using the worst remaining term ratio.
fn damped_tail(scale: f64, s: f64, r: f64, after: u64) -> LpStatus {
    let term = |n: u64| (n as f64).powf(-s) * r.powf(n as f64);
    let peak = if s < 0.0 { s / r.ln() } else { 0.0 };
    let mut partial = 0.0;
    let mut n = after + 1;
    loop {
        let t = term(n);
        partial += t;
        n += 1;
        let next = term(n);
        let ratio_bound = r * ((n as f64 + 1.0) / n as f64).powf((-s).max(0.0));
        let past_peak = n as f64 > peak;
        if past_peak && ratio_bound < 1.0 && (next <= 1e-17 * partial || next == 0.0) || n - after > GEOMETRIC_TERM_CAP
        {
            let tail_high = if ratio_bound < 1.0 {
                next / (1.0 - ratio_bound)
            } else {
                f64::INFINITY
            };
            let rounding = (n - after) as f64 * f64::EPSILON * partial;
            return LpStatus::Summable {
                low: scale * (partial - rounding),
                high: scale * (partial + tail_high + rounding),
            };
        }
    }
}
