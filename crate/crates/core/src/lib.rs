//! Equivalence and singularity of countable products of Cauchy measures
//! under location shifts and scale dilations.
//!
//! The crate is organised bottom-up:
//!
//! * [`cauchy`]: density, distribution function, sampling and the
//!   Radon–Nikodým derivatives of a single perturbed factor.
//! * [`moments`]: exact moment integrals `∫ x^{2r}/(x²+1)^s dx` as rational
//!   multiples of π.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration over the real line.
//! * [`hellinger`]: Hellinger affinities, Kakutani summands, Taylor
//!   coefficients and quadratic decay constants.
//! * [`kakutani`]: perturbation sequences, ℓᵖ analysis, the ℓ² classifier and
//!   truncated Kakutani series with tail brackets.
//! * [`montecarlo`]: seeded simulation of likelihood-ratio trajectories.

pub mod cauchy;
pub mod hellinger;
pub mod kakutani;
pub mod moments;
pub mod montecarlo;
pub mod quadrature;

pub use cauchy::{CauchyError, CauchyParams, Perturbation, StandardizedShift, TauDeviation};
pub use hellinger::{CoefficientEstimate, HellingerError, PerturbationCase};
pub use kakutani::{classify, ClassificationResult, KakutaniError, ProductModel, SequenceSpec, Verdict};
pub use moments::{gamma_moment, MomentError, PiRational};
pub use montecarlo::{RunConfig, SimulationError, GOLDEN_SEED};
pub use quadrature::{QuadratureError, QuadratureResult, Tolerance};
