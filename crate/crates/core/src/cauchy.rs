//! Cauchy distribution primitives.
//!
//! Density, distribution function, quantile and inverse-CDF sampling for a
//! single Cauchy factor, plus the two Radon–Nikodým derivatives (location
//! shift and scale dilation) consumed by the Hellinger, Kakutani and Monte
//! Carlo layers.

use std::f64::consts::{FRAC_1_PI, PI};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CauchyError {
    #[error("scale must be strictly positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("location must be finite, got {0}")]
    InvalidLocation(f64),
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("quantile level must lie in (0, 1), got {0}")]
    LevelOutOfRange(f64),
    #[error("dilation factor must be strictly positive and finite, got {0}")]
    InvalidDilation(f64),
}

/// Location `δ` and scale `γ > 0` of one Cauchy factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyParams {
    location: f64,
    scale: f64,
}

impl CauchyParams {
    pub fn new(location: f64, scale: f64) -> Result<Self, CauchyError> {
        if !location.is_finite() {
            return Err(CauchyError::InvalidLocation(location));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CauchyError::InvalidScale(scale));
        }
        Ok(Self { location, scale })
    }

    /// The standard Cauchy law (`δ = 0`, `γ = 1`).
    pub const fn standard() -> Self {
        Self {
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Default for CauchyParams {
    fn default() -> Self {
        Self::standard()
    }
}

/// A perturbation of one factor: a location shift by `h` or a scale dilation
/// by `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Perturbation {
    Additive { h: f64 },
    Multiplicative { sigma: f64 },
}

impl Perturbation {
    pub fn additive(h: f64) -> Result<Self, CauchyError> {
        if !h.is_finite() {
            return Err(CauchyError::NonFinite(h));
        }
        Ok(Self::Additive { h })
    }

    pub fn multiplicative(sigma: f64) -> Result<Self, CauchyError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CauchyError::InvalidDilation(sigma));
        }
        Ok(Self::Multiplicative { sigma })
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            Self::Additive { h } => h == 0.0,
            Self::Multiplicative { sigma } => sigma == 1.0,
        }
    }
}

/// Location shift measured in units of the scale, `ζ = h / γ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct StandardizedShift(pub f64);

impl StandardizedShift {
    pub fn new(params: &CauchyParams, h: f64) -> Self {
        Self(h / params.scale)
    }
}

/// Deviation of a dilation from the identity, `τ = σ − 1 > −1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TauDeviation(f64);

impl TauDeviation {
    pub fn new(tau: f64) -> Result<Self, CauchyError> {
        if !(tau.is_finite() && tau > -1.0) {
            return Err(CauchyError::InvalidDilation(1.0 + tau));
        }
        Ok(Self(tau))
    }

    pub fn from_sigma(sigma: f64) -> Result<Self, CauchyError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CauchyError::InvalidDilation(sigma));
        }
        Ok(Self(sigma - 1.0))
    }

    pub fn tau(&self) -> f64 {
        self.0
    }

    pub fn sigma(&self) -> f64 {
        1.0 + self.0
    }
}

pub fn density(params: &CauchyParams, x: f64) -> Result<f64, CauchyError> {
    if !x.is_finite() {
        return Err(CauchyError::NonFinite(x));
    }
    // γ / (π((x−δ)² + γ²)) written through the standardized variable so that
    // large scales or arguments cannot overflow the square.
    let y = standardize(params, x);
    Ok(FRAC_1_PI / (params.scale * (1.0 + y * y)))
}

pub fn cdf(params: &CauchyParams, x: f64) -> f64 {
    0.5 + standardize(params, x).atan() * FRAC_1_PI
}

pub fn quantile(params: &CauchyParams, u: f64) -> Result<f64, CauchyError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(CauchyError::LevelOutOfRange(u));
    }
    Ok(params.location + params.scale * (PI * (u - 0.5)).tan())
}

/// Draws one variate by inversion. Uniform draws of exactly zero are
/// rejected and redrawn; the generator never yields one.
pub fn sample<R: Rng + ?Sized>(params: &CauchyParams, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return params.location + params.scale * (PI * (u - 0.5)).tan();
        }
    }
}

#[inline]
pub fn standardize(params: &CauchyParams, x: f64) -> f64 {
    (x - params.location) / params.scale
}

/// `φ(x) = ((x−δ)² + γ²) / ((x−δ−h)² + γ²)`, the density of the shifted law
/// with respect to the base law.
pub fn rn_additive(params: &CauchyParams, h: f64, x: f64) -> f64 {
    let y = standardize(params, x);
    let zeta = h / params.scale;
    rn_additive_standardized(zeta, y)
}

/// `φ(x; σ) = σ((x−δ)² + γ²) / ((x−δ)² + σ²γ²)`.
pub fn rn_multiplicative(params: &CauchyParams, sigma: f64, x: f64) -> Result<f64, CauchyError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CauchyError::InvalidDilation(sigma));
    }
    Ok(rn_multiplicative_standardized(sigma, standardize(params, x)))
}

/// Dispatches on the perturbation kind.
pub fn rn_derivative(params: &CauchyParams, p: &Perturbation, x: f64) -> f64 {
    match *p {
        Perturbation::Additive { h } => rn_additive(params, h, x),
        Perturbation::Multiplicative { sigma } => rn_multiplicative_standardized(sigma, standardize(params, x)),
    }
}

/// Natural log of [`rn_derivative`], evaluated without forming the ratio.
pub fn log_rn_derivative(params: &CauchyParams, p: &Perturbation, x: f64) -> f64 {
    let y = standardize(params, x);
    match *p {
        Perturbation::Additive { h } => {
            let zeta = h / params.scale;
            2.0 * (y.hypot(1.0).ln() - (y - zeta).hypot(1.0).ln())
        }
        Perturbation::Multiplicative { sigma } => sigma.ln() + 2.0 * (y.hypot(1.0).ln() - y.hypot(sigma).ln()),
    }
}

// hypot keeps the ratios finite for |y| beyond 1e154.
#[inline]
pub(crate) fn rn_additive_standardized(zeta: f64, y: f64) -> f64 {
    let ratio = y.hypot(1.0) / (y - zeta).hypot(1.0);
    ratio * ratio
}

#[inline]
pub(crate) fn rn_multiplicative_standardized(sigma: f64, y: f64) -> f64 {
    let ratio = y.hypot(1.0) / y.hypot(sigma);
    sigma * ratio * ratio
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(d: f64, g: f64) -> CauchyParams {
        CauchyParams::new(d, g).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(matches!(CauchyParams::new(0.0, 0.0), Err(CauchyError::InvalidScale(_))));
        assert!(matches!(
            CauchyParams::new(0.0, -1.0),
            Err(CauchyError::InvalidScale(_))
        ));
        assert!(CauchyParams::new(f64::NAN, 1.0).is_err());
        assert!(CauchyParams::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn density_values() {
        assert!(close(density(&p(0.0, 1.0), 0.0).unwrap(), 1.0 / PI, 1e-15));
        assert!(close(density(&p(2.0, 3.0), 2.0).unwrap(), 1.0 / (3.0 * PI), 1e-15));
        assert!(close(density(&p(0.0, 1.0), 1.0).unwrap(), 1.0 / (2.0 * PI), 1e-15));
        assert!(density(&p(0.0, 1.0), f64::NAN).is_err());
        assert!(density(&p(0.0, 1.0), f64::INFINITY).is_err());
        // no overflow for huge scales or arguments
        assert!(density(&p(0.0, 1e200), 1e200).unwrap() > 0.0);
        assert!(density(&p(0.0, 1.0), 1e200).unwrap() >= 0.0);
    }

    #[test]
    fn cdf_values() {
        assert_eq!(cdf(&p(0.0, 1.0), 0.0), 0.5);
        assert!(close(cdf(&p(0.0, 1.0), 1.0), 0.75, 1e-15));
        assert!(close(cdf(&p(5.0, 2.0), 3.0), 0.25, 1e-15));
    }

    #[test]
    fn quantile_values() {
        assert_eq!(quantile(&p(0.0, 1.0), 0.5).unwrap(), 0.0);
        assert!(close(quantile(&p(0.0, 1.0), 0.75).unwrap(), 1.0, 1e-15));
        assert!(close(quantile(&p(3.0, 2.0), 0.25).unwrap(), 1.0, 1e-15));
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                quantile(&p(0.0, 1.0), u),
                Err(CauchyError::LevelOutOfRange(_))
            ));
        }
    }

    #[test]
    fn standardize_values() {
        assert_eq!(standardize(&p(2.0, 3.0), 2.0), 0.0);
        assert_eq!(standardize(&p(0.0, 1.0), 7.0), 7.0);
        assert_eq!(standardize(&p(1.0, 2.0), 5.0), 2.0);
    }

    #[test]
    fn rn_additive_values() {
        let s = CauchyParams::standard();
        for x in [-3.0, 0.0, 0.5, 1e10] {
            assert_eq!(rn_additive(&s, 0.0, x), 1.0);
        }
        assert!(close(rn_additive(&s, 1.0, 0.0), 0.5, 1e-15));
        assert!(close(rn_additive(&s, 1.0, 1.0), 2.0, 1e-15));
    }

    #[test]
    fn rn_multiplicative_values() {
        let s = CauchyParams::standard();
        for x in [-3.0, 0.0, 0.5, 1e10] {
            assert_eq!(rn_multiplicative(&s, 1.0, x).unwrap(), 1.0);
        }
        assert!(close(rn_multiplicative(&s, 2.0, 0.0).unwrap(), 0.5, 1e-15));
        assert!(close(rn_multiplicative(&s, 2.0, 1e12).unwrap(), 2.0, 1e-12));
        assert!(rn_multiplicative(&s, 0.0, 1.0).is_err());
        assert!(rn_multiplicative(&s, -2.0, 1.0).is_err());
    }

    #[test]
    fn log_rn_matches_rn() {
        let params = p(0.3, 1.7);
        for x in [-50.0, -1.0, 0.0, 0.9, 4.0, 1e8] {
            for pert in [
                Perturbation::Additive { h: 0.4 },
                Perturbation::Multiplicative { sigma: 1.9 },
            ] {
                let direct = rn_derivative(&params, &pert, x).ln();
                assert!((log_rn_derivative(&params, &pert, x) - direct).abs() < 1e-13);
            }
        }
        // finite far beyond the range where the squares overflow
        let far = log_rn_derivative(&params, &Perturbation::Additive { h: 1.0 }, 1e300);
        assert!(far.is_finite());
    }

    #[test]
    fn tau_deviation() {
        assert!(TauDeviation::new(-1.0).is_err());
        assert_eq!(TauDeviation::new(0.25).unwrap().sigma(), 1.25);
        assert_eq!(TauDeviation::from_sigma(3.0).unwrap().tau(), 2.0);
        assert_eq!(StandardizedShift::new(&p(0.0, 4.0), 1.0), StandardizedShift(0.25));
    }

    #[test]
    fn first_draw_is_quantile_of_first_uniform() {
        let params = p(1.0, 2.0);
        let mut a = ChaCha8Rng::seed_from_u64(17);
        let mut b = ChaCha8Rng::seed_from_u64(17);
        let u: f64 = b.random();
        assert_eq!(sample(&params, &mut a), quantile(&params, u).unwrap());
    }

    #[test]
    fn empirical_median_and_iqr() {
        let params = CauchyParams::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut xs: Vec<f64> = (0..100_000).map(|_| sample(&params, &mut rng)).collect();
        let inside = xs.iter().filter(|x| x.abs() <= 1.0).count() as f64 / xs.len() as f64;
        xs.sort_by(f64::total_cmp);
        let median = 0.5 * (xs[49_999] + xs[50_000]);
        assert!(median.abs() <= 0.02, "median {median}");
        assert!((inside - 0.5).abs() <= 0.01, "fraction {inside}");
    }

    proptest::proptest! {
        #[test]
        fn quantile_inverts_cdf(loc in -50.0f64..50.0, scale in 1e-3f64..1e3, u in 1e-6f64..(1.0 - 1e-6)) {
            let params = p(loc, scale);
            let x = quantile(&params, u).unwrap();
            proptest::prop_assert!((cdf(&params, x) - u).abs() <= 1e-9, "{x}");
            proptest::prop_assert!(density(&params, x).unwrap() > 0.0);
        }
    }
}
