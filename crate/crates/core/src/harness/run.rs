use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::games::{GameOracle, JointPoint};
use crate::linalg;
use crate::optim::{step, OptimizerConfig, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub max_steps: u64,
    pub record_every: u64,
    /// Stop once `‖V(p)‖` is at or below this.
    pub threshold: f64,
    /// Records carry the full point when `m + n` is at most this.
    pub snapshot_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: 1000,
            record_every: 1,
            threshold: 1e-8,
            snapshot_limit: 16,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.max_steps == 0 {
            return Err(HarnessError::InvalidOptions("max_steps must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(HarnessError::InvalidOptions("record_every must be >= 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(HarnessError::InvalidOptions("threshold must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Steps taken so far.
    pub t: u64,
    pub loss_x: f64,
    pub loss_y: f64,
    pub grad_x_norm: f64,
    pub grad_y_norm: f64,
    pub point_norm: f64,
    /// Wall time of the step that produced this point, zero at `t = 0`.
    pub step_us: f64,
    pub cg_iterations: usize,
    pub point: Option<JointPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub game: String,
    pub rule: String,
    pub converged: bool,
    pub steps: u64,
    pub final_point: JointPoint,
    pub final_vf_norm: f64,
    pub final_loss_x: f64,
    pub final_loss_y: f64,
    pub total_time_us: f64,
    pub mean_step_us: f64,
    pub total_cg_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub summary: RunSummary,
}

fn record(
    game: &dyn GameOracle,
    p: &JointPoint,
    t: u64,
    step_us: f64,
    cg_iterations: usize,
    snapshot_limit: usize,
) -> (TrajectoryRecord, f64) {
    let gx = game.grad_x(p);
    let gy = game.grad_y(p);
    let (nx, ny) = (linalg::norm2(&gx), linalg::norm2(&gy));
    let (m, n) = p.dims();
    let rec = TrajectoryRecord {
        t,
        loss_x: game.loss_x(p),
        loss_y: game.loss_y(p),
        grad_x_norm: nx,
        grad_y_norm: ny,
        point_norm: p.norm(),
        step_us,
        cg_iterations,
        point: (m + n <= snapshot_limit).then(|| p.clone()),
    };
    (rec, nx.hypot(ny))
}

/// Steps until `max_steps` or `‖V(p)‖ ≤ threshold`, recording `t = 0`,
/// every `record_every`-th step, and the final step.
pub fn run_trajectory(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    start: &JointPoint,
    options: &RunOptions,
) -> Result<Trajectory, HarnessError> {
    options.validate()?;
    config.validate()?;
    crate::games::check_dims(game, start)?;
    start.validate()?;

    let mut p = start.clone();
    let mut state = OptimizerState::new(start);
    let (first, mut vf_norm) = record(game, &p, 0, 0.0, 0, options.snapshot_limit);
    let mut records = vec![first];
    let mut total_us = 0.0;
    let mut total_cg = 0;
    let mut t = 0;

    while t < options.max_steps && !(vf_norm <= options.threshold) {
        let out = step(game, config, &p, &state)
            .map_err(|source| HarnessError::Numerical { step: t + 1, source })?;
        t += 1;
        p = out.point;
        state = out.state;
        let us = out.elapsed.as_secs_f64() * 1e6;
        total_us += us;
        total_cg += out.cg_iterations;
        let (rec, norm) = record(game, &p, t, us, out.cg_iterations, options.snapshot_limit);
        vf_norm = norm;
        let last = t == options.max_steps || vf_norm <= options.threshold;
        if t.is_multiple_of(options.record_every) || last {
            records.push(rec);
        }
    }

    let summary = RunSummary {
        game: game.name().to_string(),
        rule: config.rule.to_string(),
        converged: vf_norm <= options.threshold,
        steps: t,
        final_vf_norm: vf_norm,
        final_loss_x: game.loss_x(&p),
        final_loss_y: game.loss_y(&p),
        final_point: p,
        total_time_us: total_us,
        mean_step_us: if t == 0 { 0.0 } else { total_us / t as f64 },
        total_cg_iterations: total_cg,
    };
    Ok(Trajectory { records, summary })
}
