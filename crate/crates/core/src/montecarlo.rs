//! Seeded simulation of likelihood-ratio trajectories.
//!
//! Every trial owns a ChaCha8 stream selected by its index under the master
//! seed, so results are bit-identical however rayon schedules the trials.
//! Statistics are reduced sequentially after the gather.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cauchy::{self, CauchyError, CauchyParams, Perturbation};
use crate::hellinger::PerturbationCase;
use crate::kakutani::{kakutani_partial_sum, KakutaniError, ProductModel};

/// Seed behind every frozen stochastic threshold in the test suites.
pub const GOLDEN_SEED: u64 = 0x00C0_FFEE_2024;

pub const MIN_AFFINITY_TRIALS: usize = 1_000;

/// Largest `N` accepted by [`sqrt_lr_check`].
pub const SQRT_CHECK_MAX_N: u64 = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error(transparent)]
    Kakutani(#[from] KakutaniError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: u64,
    pub checkpoints: Vec<u64>,
}

impl RunConfig {
    pub fn new(seed: u64, trials: usize, n: u64, checkpoints: Vec<u64>) -> Result<Self, SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidConfig(m));
        if trials == 0 {
            return bad("trials must be positive".into());
        }
        if n == 0 {
            return bad("N must be positive".into());
        }
        if checkpoints.is_empty() {
            return bad("at least one checkpoint is required".into());
        }
        if !checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return bad("checkpoints must be strictly increasing".into());
        }
        if checkpoints[0] == 0 || *checkpoints.last().expect("nonempty") > n {
            return bad(format!("checkpoints must lie in 1..={n}"));
        }
        Ok(Self {
            seed,
            trials,
            n,
            checkpoints,
        })
    }

    /// Single checkpoint at `N`.
    pub fn terminal(seed: u64, trials: usize, n: u64) -> Result<Self, SimulationError> {
        Self::new(seed, trials, n, vec![n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointStats {
    pub n: u64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    pub mean_sqrt_lr: f64,
    pub sqrt_lr_std_error: f64,
    pub mean_lr: f64,
    pub lr_std_error: f64,
}

/// Quantiles of `log L_N` and moments of `√L_N` and `L_N` per checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub trials: usize,
    pub checkpoints: Vec<CheckpointStats>,
}

impl TrajectoryStats {
    pub fn at(&self, n: u64) -> Option<&CheckpointStats> {
        self.checkpoints.iter().find(|c| c.n == n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtLrCheck {
    pub mc_value: f64,
    pub std_error: f64,
    pub series_value: f64,
    pub agree: bool,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Sample mean and standard error (sample standard deviation over `√m`).
fn mean_and_error(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    let m = count as f64;
    let mean = sum / m;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (m - 1.0)).sqrt() / m.sqrt())
}

/// Sample-average estimate of `E[√φ(U)]` with `U` drawn from `params`.
pub fn mc_affinity(
    params: &CauchyParams,
    p: &Perturbation,
    trials: usize,
    seed: u64,
) -> Result<AffinityEstimate, SimulationError> {
    if trials < MIN_AFFINITY_TRIALS {
        return Err(SimulationError::InvalidConfig(format!(
            "at least {MIN_AFFINITY_TRIALS} trials are required, got {trials}"
        )));
    }
    if let Perturbation::Multiplicative { sigma } = *p {
        Perturbation::multiplicative(sigma)?;
    }
    if p.is_identity() {
        return Ok(AffinityEstimate {
            mean: 1.0,
            std_error: 0.0,
            trials,
        });
    }
    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = cauchy::sample(params, &mut trial_rng(seed, t));
            cauchy::rn_derivative(params, p, x).sqrt()
        })
        .collect();
    let (mean, std_error) = mean_and_error(draws.iter().copied());
    Ok(AffinityEstimate {
        mean,
        std_error,
        trials,
    })
}

/// Per-factor base law and perturbation for `n = 1..=N`.
fn factors(model: &ProductModel, n_max: u64) -> Result<Vec<(CauchyParams, Perturbation)>, SimulationError> {
    if let Some(len) = model.len() {
        if n_max as usize > len {
            return Err(KakutaniError::IndexOutOfRange {
                index: n_max,
                len: Some(len),
            }
            .into());
        }
    }
    (1..=n_max)
        .map(|n| {
            let params = CauchyParams::new(model.location().term(n)?, model.scale().term(n)?)?;
            let t = model.perturbation().term(n)?;
            let p = match model.kind() {
                PerturbationCase::Additive => Perturbation::additive(t)?,
                PerturbationCase::Multiplicative => Perturbation::multiplicative(1.0 + t)?,
            };
            Ok((params, p))
        })
        .collect()
}

/// Draws `U_n` from the base product and accumulates `log L_N = Σ log φ_n(U_n)`
/// at each checkpoint.
pub fn simulate_loglr(model: &ProductModel, cfg: &RunConfig) -> Result<TrajectoryStats, SimulationError> {
    let factors = factors(model, cfg.n)?;
    let identity = factors.iter().all(|(_, p)| p.is_identity());
    let k = cfg.checkpoints.len();

    // trial-major: paths[t * k + j] is log L at checkpoint j of trial t
    let paths: Vec<f64> = if identity {
        vec![0.0; cfg.trials * k]
    } else {
        (0..cfg.trials)
            .into_par_iter()
            .flat_map_iter(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                let mut log_lr = 0.0;
                let mut marks = Vec::with_capacity(k);
                let mut next = cfg.checkpoints.iter().peekable();
                for (i, (params, p)) in factors.iter().enumerate() {
                    let x = cauchy::sample(params, &mut rng);
                    log_lr += cauchy::log_rn_derivative(params, p, x);
                    if next.peek().is_some_and(|&&c| c == i as u64 + 1) {
                        marks.push(log_lr);
                        next.next();
                    }
                }
                marks
            })
            .collect()
    };

    let checkpoints = cfg
        .checkpoints
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let column: Vec<f64> = (0..cfg.trials).map(|t| paths[t * k + j]).collect();
            let (mean_sqrt_lr, sqrt_lr_std_error) = mean_and_error(column.iter().map(|l| (0.5 * l).exp()));
            let (mean_lr, lr_std_error) = mean_and_error(column.iter().map(|l| l.exp()));
            let mut sorted = column;
            sorted.sort_by(f64::total_cmp);
            CheckpointStats {
                n,
                q10: quantile_sorted(&sorted, 0.1),
                q50: quantile_sorted(&sorted, 0.5),
                q90: quantile_sorted(&sorted, 0.9),
                mean_sqrt_lr,
                sqrt_lr_std_error,
                mean_lr,
                lr_std_error,
            }
        })
        .collect();
    Ok(TrajectoryStats {
        trials: cfg.trials,
        checkpoints,
    })
}

/// Linear interpolation between order statistics (Hyndman–Fan type 7).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Compares the Monte Carlo mean of `√L_N` with `exp(−S_N)`; they agree when
/// the difference is within three standard errors.
pub fn sqrt_lr_check(model: &ProductModel, cfg: &RunConfig, tol: f64) -> Result<SqrtLrCheck, SimulationError> {
    if cfg.n > SQRT_CHECK_MAX_N {
        return Err(SimulationError::InvalidConfig(format!(
            "N = {} exceeds the √L check limit of {SQRT_CHECK_MAX_N}",
            cfg.n
        )));
    }
    let terminal = RunConfig {
        checkpoints: vec![cfg.n],
        ..cfg.clone()
    };
    let stats = simulate_loglr(model, &terminal)?;
    let last = stats.checkpoints[0];
    let series = kakutani_partial_sum(model, cfg.n, tol)?;
    let series_value = (-series.sum).exp();
    let diff = (last.mean_sqrt_lr - series_value).abs();
    Ok(SqrtLrCheck {
        mc_value: last.mean_sqrt_lr,
        std_error: last.sqrt_lr_std_error,
        series_value,
        agree: diff <= 3.0 * last.sqrt_lr_std_error,
    })
}
