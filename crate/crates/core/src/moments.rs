//! Exact values of the even moment integrals
//!
//! ```text
//!   ∫ x^{2r} / (x² + 1)^s dx = π · (2r)! (2(s−r−1))! / (4^{s−1} r! (s−r−1)! (s−1)!)
//! ```
//!
//! for integers `0 ≤ r ≤ s − 1`, kept as exact rational multiples of π.
//! These are the ground truth for the quadrature engine.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error("moment integral diverges for r = {r}, s = {s} (requires s >= 1 and r <= s - 1)")]
    Divergent { r: u32, s: u32 },
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("value {0}·π is not representable as a finite double")]
    Overflow(String),
}

/// An exact number of the form `(numerator / denominator) · π`, stored in
/// lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiRational(BigRational);

impl PiRational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self, MomentError> {
        let den = denominator.into();
        if den.is_zero() {
            return Err(MomentError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numerator.into(), den)))
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.0
    }

    /// Double-precision value of `coefficient · π`, correctly rounded.
    pub fn to_real(&self) -> Result<f64, MomentError> {
        to_real(self)
    }
}

impl fmt::Display for PiRational {
    /// Prints the rational coefficient, e.g. `3/8` for `3π/8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn gamma_moment(r: u32, s: u32) -> Result<PiRational, MomentError> {
    if s == 0 || r > s - 1 {
        return Err(MomentError::Divergent { r, s });
    }
    let m = s - r - 1;
    let numerator = factorial(2 * r) * factorial(2 * m);
    let denominator = (BigUint::one() << (2 * (s - 1)) as usize) * factorial(r) * factorial(m) * factorial(s - 1);
    Ok(PiRational(BigRational::new(numerator.into(), denominator.into())))
}

// π to 80 significant digits; the truncation error sits far below the
// rounding unit of any double the coefficient can produce.
const PI_DIGITS: &str = "31415926535897932384626433832795028841971693993751058209749445923078164062862090";
const PI_SCALE: usize = 79;

fn pi_rational() -> BigRational {
    let num: BigInt = PI_DIGITS.parse().expect("valid digits");
    let den = num_traits::pow(BigInt::from(10u32), PI_SCALE);
    BigRational::new(num, den)
}

pub fn to_real(p: &PiRational) -> Result<f64, MomentError> {
    let value = &p.0 * pi_rational();
    ratio_to_f64(value.numer(), value.denom()).ok_or_else(|| MomentError::Overflow(p.to_string()))
}

/// Round-to-nearest-even conversion of `num / den` (with `den > 0`).
/// Returns `None` when the result overflows the double range.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> Option<f64> {
    if num.is_zero() {
        return Some(0.0);
    }
    let negative = num.is_negative();
    let a = num.abs().to_biguint().expect("nonnegative");
    let b = den.to_biguint().expect("positive denominator");

    // Find k with 2^53 <= floor(a·2^k / b) < 2^54: one guard bit past the
    // 53-bit significand.
    let mut k: i64 = 54 - (a.bits() as i64 - b.bits() as i64);
    let (mut q, mut rem) = scaled_div(&a, &b, k);
    while q.bits() > 54 {
        k -= 1;
        (q, rem) = scaled_div(&a, &b, k);
    }
    while q.bits() < 54 {
        k += 1;
        (q, rem) = scaled_div(&a, &b, k);
    }

    let guard = q.is_odd();
    let sticky = !rem.is_zero();
    let mut mantissa = (q >> 1usize).to_u64().expect("53-bit significand");
    if guard && (sticky || mantissa & 1 == 1) {
        mantissa += 1;
    }
    // value = mantissa · 2^(1 − k)
    let mut exponent = 1 - k;
    if mantissa == 1 << 53 {
        mantissa >>= 1;
        exponent += 1;
    }
    if exponent + 52 > 1023 {
        return None;
    }
    let magnitude = scale_by_power_of_two(mantissa as f64, exponent);
    Some(if negative { -magnitude } else { magnitude })
}

fn scaled_div(a: &BigUint, b: &BigUint, k: i64) -> (BigUint, BigUint) {
    if k >= 0 {
        (a << k as usize).div_rem(b)
    } else {
        a.div_rem(&(b << (-k) as usize))
    }
}

fn scale_by_power_of_two(x: f64, mut exponent: i64) -> f64 {
    let mut out = x;
    while exponent > 0 {
        let step = exponent.min(1000);
        out *= 2f64.powi(step as i32);
        exponent -= step;
    }
    while exponent < 0 {
        let step = (-exponent).min(1000);
        out /= 2f64.powi(step as i32);
        exponent += step;
    }
    out
}
