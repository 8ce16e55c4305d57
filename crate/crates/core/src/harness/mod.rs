//! Experiment drivers shared by the CLI and the browser demo. Nothing here
//! touches the filesystem.

mod bench;
mod run;
mod sweep;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{GameError, GameOracle, JointPoint};
use crate::optim::OptimError;
use crate::spectral::SpectralError;

pub use bench::{bench, BenchOptions, BenchRow};
pub use run::{run_trajectory, RunOptions, RunSummary, Trajectory, TrajectoryRecord};
pub use sweep::{
    critical_step_size, fit_contraction_rate, relative_grid, sweep, SweepOptions, SweepRow,
    DEFAULT_GRID_FACTORS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("numerical abort at step {step}: {source}")]
    Numerical {
        step: u64,
        #[source]
        source: OptimError,
    },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("game `{0}` has no known equilibrium to sweep around")]
    NoEquilibrium(&'static str),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Where a trajectory starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPoint {
    /// The game's own default start.
    #[default]
    Default,
    Explicit { x: Vec<f64>, y: Vec<f64> },
    /// Independent `N(0, scale²)` entries drawn from the experiment seed.
    Random { scale: f64 },
}

impl InitialPoint {
    pub fn resolve(&self, game: &dyn GameOracle, seed: u64) -> Result<JointPoint, HarnessError> {
        let (m, n) = game.dims();
        let p = match self {
            InitialPoint::Default => game.default_point(),
            InitialPoint::Explicit { x, y } => JointPoint::new(x.clone(), y.clone())?,
            InitialPoint::Random { scale } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(HarnessError::InvalidOptions(
                        "random init scale must be finite and >= 0".into(),
                    ));
                }
                let flat = gaussian_vector(m + n, seed, *scale);
                JointPoint::from_flat(m, &flat)
            }
        };
        crate::games::check_dims(game, &p)?;
        Ok(p)
    }
}

/// `len` independent `N(0, scale²)` draws from a seeded ChaCha stream.
pub fn gaussian_vector(len: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect()
}

/// Nearest-rank percentile of an ascending slice, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
