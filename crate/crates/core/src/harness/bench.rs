use serde::{Deserialize, Serialize};

use super::{percentile, HarnessError};
use crate::games::{GameOracle, JointPoint};
use crate::optim::{step, OptimizerConfig, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchOptions {
    /// Timed steps per rule.
    pub steps: usize,
    /// Untimed steps run first.
    pub warmup: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            steps: 500,
            warmup: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub rule: String,
    pub steps: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub mean_cg_iterations: f64,
}

/// Per-step wall time of each configuration from the same start point.
/// The first `warmup` steps of every run are discarded.
pub fn bench(
    game: &dyn GameOracle,
    configs: &[OptimizerConfig],
    start: &JointPoint,
    options: &BenchOptions,
) -> Result<Vec<BenchRow>, HarnessError> {
    if options.steps == 0 {
        return Err(HarnessError::InvalidOptions("bench steps must be >= 1".into()));
    }
    crate::games::check_dims(game, start)?;
    configs
        .iter()
        .map(|config| {
            config.validate()?;
            let mut p = start.clone();
            let mut state = OptimizerState::new(start);
            let mut times = Vec::with_capacity(options.steps);
            let mut cg = 0usize;
            for t in 0..options.warmup + options.steps {
                let out = step(game, config, &p, &state).map_err(|source| {
                    HarnessError::Numerical {
                        step: t as u64 + 1,
                        source,
                    }
                })?;
                if t >= options.warmup {
                    times.push(out.elapsed.as_secs_f64() * 1e6);
                    cg += out.cg_iterations;
                }
                p = out.point;
                state = out.state;
            }
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            times.sort_by(|a, b| a.total_cmp(b));
            Ok(BenchRow {
                rule: config.rule.to_string(),
                steps: options.steps,
                mean_us: mean,
                p50_us: percentile(&times, 0.5),
                p95_us: percentile(&times, 0.95),
                mean_cg_iterations: cg as f64 / options.steps as f64,
            })
        })
        .collect()
}
