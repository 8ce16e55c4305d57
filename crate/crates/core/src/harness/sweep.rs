use serde::{Deserialize, Serialize};

use super::{gaussian_vector, HarnessError};
use crate::games::{GameOracle, JointPoint};
use crate::linalg;
use crate::optim::{step, OptimizerConfig, OptimizerState};
use crate::spectral::{certify_with, Linearization, SpectralOptions};

/// Multiples of the critical step size used by [`relative_grid`]. The
/// sixth entry sits next to the boundary.
pub const DEFAULT_GRID_FACTORS: [f64; 8] = [0.1, 0.25, 0.45, 0.65, 0.85, 0.97, 1.1, 1.4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub steps: usize,
    /// Steps in the tail used for the rate fit.
    pub tail: usize,
    /// Norm of the random offset from the equilibrium.
    pub perturbation: f64,
    pub seed: u64,
    pub linearization: Linearization,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            steps: 2000,
            tail: 200,
            perturbation: 1e-3,
            seed: 0,
            linearization: Linearization::WithHistory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub certified_prediction: bool,
    pub predicted_rate: f64,
    pub empirical_converged: bool,
    /// Fitted per-step contraction of the state error over the tail.
    pub empirical_rate: f64,
    pub agree: bool,
}

/// Least-squares slope of `ln e_k` against `k` over the last `tail`
/// entries, exponentiated. Entries at or below `floor` and everything
/// after them are dropped first.
pub fn fit_contraction_rate(errors: &[f64], tail: usize, floor: f64) -> f64 {
    let end = errors
        .iter()
        .position(|&e| !(e > floor) || !e.is_finite())
        .unwrap_or(errors.len());
    let start = end.saturating_sub(tail);
    let window = &errors[start..end];
    if window.len() < 2 {
        return f64::NAN;
    }
    let n = window.len() as f64;
    let mean_k = (n - 1.0) / 2.0;
    let logs: Vec<f64> = window.iter().map(|e| e.ln()).collect();
    let mean_l = logs.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, l) in logs.iter().enumerate() {
        let dk = k as f64 - mean_k;
        num += dk * (l - mean_l);
        den += dk * dk;
    }
    (num / den).exp()
}

/// `‖s − s̄‖` over the full optimizer state, with `s̄ = (p̄, p̄, 0, 0)`.
fn state_error(p: &JointPoint, state: &OptimizerState, eq: &JointPoint) -> f64 {
    let mut sq = 0.0;
    for (a, b) in p.to_flat().iter().zip(eq.to_flat()) {
        sq += (a - b) * (a - b);
    }
    for (a, b) in state.prev.to_flat().iter().zip(eq.to_flat()) {
        sq += (a - b) * (a - b);
    }
    sq += linalg::dot(&state.moments_flat(), &state.moments_flat());
    sq.sqrt()
}

const DIVERGED: f64 = 1e100;

/// Runs from a perturbed equilibrium and returns the state error per step.
fn error_series(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    eq: &JointPoint,
    options: &SweepOptions,
) -> Vec<f64> {
    let (m, n) = game.dims();
    let mut dir = gaussian_vector(m + n, options.seed, 1.0);
    let norm = linalg::norm2(&dir);
    dir.iter_mut().for_each(|d| *d *= options.perturbation / norm);
    let mut p = JointPoint::from_flat(m, &linalg::add(&eq.to_flat(), &dir));
    let mut state = OptimizerState::new(&p);
    let mut errors = Vec::with_capacity(options.steps + 1);
    errors.push(state_error(&p, &state, eq));
    for _ in 0..options.steps {
        match step(game, config, &p, &state) {
            Ok(out) => {
                p = out.point;
                state = out.state;
            }
            Err(_) => {
                errors.push(f64::INFINITY);
                break;
            }
        }
        let e = state_error(&p, &state, eq);
        errors.push(e);
        if !(e < DIVERGED) {
            break;
        }
    }
    errors
}

/// Certification and empirical convergence at each step size.
///
/// A cell counts as empirically convergent when the run stays finite, ends
/// below its initial error and the fitted tail rate is below one.
pub fn sweep(
    game: &dyn GameOracle,
    base: &OptimizerConfig,
    h_values: &[f64],
    options: &SweepOptions,
) -> Result<Vec<SweepRow>, HarnessError> {
    if options.steps < 2 || options.tail < 2 {
        return Err(HarnessError::InvalidOptions("steps and tail must be >= 2".into()));
    }
    if !(options.perturbation > 0.0 && options.perturbation.is_finite()) {
        return Err(HarnessError::InvalidOptions("perturbation must be > 0".into()));
    }
    let eq = game
        .equilibrium()
        .ok_or(HarnessError::NoEquilibrium(game.name()))?;
    let spectral = SpectralOptions {
        linearization: options.linearization,
        stat_tol: None,
    };
    // Squared errors underflow below about 1e−154.
    let floor = 1e-12 * eq.norm() + 1e-140;
    h_values
        .iter()
        .map(|&h| {
            let config = base.with_lr(h);
            let report = certify_with(game, &eq, &config, &spectral)?;
            let errors = error_series(game, &config, &eq, options);
            let rate = fit_contraction_rate(&errors, options.tail, floor);
            let last = *errors.last().unwrap_or(&f64::INFINITY);
            let empirical_converged = last.is_finite() && last < errors[0] && rate < 1.0;
            Ok(SweepRow {
                h,
                certified_prediction: report.certified,
                predicted_rate: report.spectral_radius_f,
                empirical_converged,
                empirical_rate: rate,
                agree: report.certified == empirical_converged,
            })
        })
        .collect()
}

/// Smallest step size at which certification is lost, found by a doubling
/// scan from `1e−6` followed by bisection. `None` when no scanned step size
/// certifies or none fails below `1e6`.
pub fn critical_step_size(
    game: &dyn GameOracle,
    point: &JointPoint,
    base: &OptimizerConfig,
    linearization: Linearization,
) -> Result<Option<f64>, HarnessError> {
    let spectral = SpectralOptions {
        linearization,
        stat_tol: None,
    };
    let certified = |h: f64| -> Result<bool, HarnessError> {
        Ok(certify_with(game, point, &base.with_lr(h), &spectral)?.certified)
    };
    let mut lo = 1e-6;
    if !certified(lo)? {
        return Ok(None);
    }
    let mut hi = lo * 2.0;
    while certified(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(None);
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if certified(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// `h_crit · factor` for each factor.
pub fn relative_grid(h_crit: f64, factors: &[f64]) -> Vec<f64> {
    factors.iter().map(|f| h_crit * f).collect()
}
