//! Browser bindings for three interactive operations: a trajectory, a
//! spectral certificate, and a step-size sweep. Each takes a JSON request
//! and returns a JSON response so the page needs no generated types.

use acom::games::{GameError, GameOracle, GameSpec, JointPoint, QuadraticParams};
use acom::harness::{
    critical_step_size, relative_grid, run_trajectory, sweep, HarnessError, RunOptions,
    SweepOptions, SweepRow, DEFAULT_GRID_FACTORS,
};
use acom::optim::{OptimError, OptimizerConfig, Rule};
use acom::spectral::{certify, SpectralError};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wasm_bindgen::prelude::*;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("bad request: {0}")]
    Request(#[from] serde_json::Error),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("game has no known equilibrium")]
    NoEquilibrium,
    #[error("no certified step size below 1e6 for this rule and game")]
    NoCriticalStep,
}

/// Shared by all three operations. Unset optimizer fields take the rule's
/// defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Request {
    pub game: GameSpec,
    pub rule: Rule,
    pub lr: Option<f64>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
    pub start: Option<JointPoint>,
    pub steps: u64,
}

impl Default for Request {
    fn default() -> Self {
        Request {
            game: GameSpec::Quadratic(QuadraticParams {
                a_xx: vec![vec![1.0]],
                a_yy: vec![vec![-1.0]],
                b: vec![vec![1.0]],
                b_x: None,
                b_y: None,
            }),
            rule: Rule::Gda,
            lr: None,
            eps: None,
            gamma: None,
            start: None,
            steps: 500,
        }
    }
}

impl Request {
    fn parse(text: &str) -> Result<Self, DemoError> {
        Ok(serde_json::from_str(text)?)
    }

    fn config(&self) -> Result<OptimizerConfig, DemoError> {
        let d = OptimizerConfig::defaults(self.rule);
        let c = OptimizerConfig {
            lr: self.lr.unwrap_or(d.lr),
            eps: self.eps.unwrap_or(d.eps),
            gamma: self.gamma.unwrap_or(d.gamma),
            ..d
        };
        c.validate()?;
        Ok(c)
    }

    fn start(&self, game: &dyn GameOracle) -> JointPoint {
        self.start.clone().unwrap_or_else(|| game.default_point())
    }
}

#[derive(Debug, Serialize)]
pub struct TrajectoryResponse {
    /// First coordinate of each player, one entry per step.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub loss_x: Vec<f64>,
    pub vf_norm: Vec<f64>,
    pub converged: bool,
    pub steps: u64,
}

#[derive(Debug, Serialize)]
pub struct SweepResponse {
    pub h_crit: f64,
    pub rows: Vec<SweepRow>,
}

pub fn trajectory_json(request: &str) -> Result<String, DemoError> {
    let req = Request::parse(request)?;
    let game = req.game.build()?;
    let options = RunOptions {
        max_steps: req.steps.max(1),
        record_every: 1,
        threshold: 1e-10,
        snapshot_limit: usize::MAX,
    };
    let traj = run_trajectory(game.as_ref(), &req.config()?, &req.start(game.as_ref()), &options)?;
    let mut out = TrajectoryResponse {
        x: Vec::with_capacity(traj.records.len()),
        y: Vec::with_capacity(traj.records.len()),
        loss_x: Vec::with_capacity(traj.records.len()),
        vf_norm: Vec::with_capacity(traj.records.len()),
        converged: traj.summary.converged,
        steps: traj.summary.steps,
    };
    for r in &traj.records {
        let p = r.point.as_ref().expect("snapshots are unlimited");
        out.x.push(p.x[0]);
        out.y.push(p.y[0]);
        out.loss_x.push(r.loss_x);
        out.vf_norm.push(r.grad_x_norm.hypot(r.grad_y_norm));
    }
    Ok(serde_json::to_string(&out)?)
}

pub fn spectrum_json(request: &str) -> Result<String, DemoError> {
    let req = Request::parse(request)?;
    let game = req.game.build()?;
    let point = game.equilibrium().unwrap_or_else(|| req.start(game.as_ref()));
    let report = certify(game.as_ref(), &point, &req.config()?)?;
    Ok(serde_json::to_string(&report)?)
}

/// Sweeps the default grid of multiples of the critical step size.
pub fn sweep_json(request: &str) -> Result<String, DemoError> {
    let req = Request::parse(request)?;
    let game = req.game.build()?;
    let eq = game.equilibrium().ok_or(DemoError::NoEquilibrium)?;
    let config = req.config()?;
    let options = SweepOptions::default();
    let h_crit = critical_step_size(game.as_ref(), &eq, &config, options.linearization)?
        .ok_or(DemoError::NoCriticalStep)?;
    let rows = sweep(
        game.as_ref(),
        &config,
        &relative_grid(h_crit, &DEFAULT_GRID_FACTORS),
        &options,
    )?;
    Ok(serde_json::to_string(&SweepResponse { h_crit, rows })?)
}

fn js(r: Result<String, DemoError>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn trajectory(request: &str) -> Result<String, JsError> {
    js(trajectory_json(request))
}

#[wasm_bindgen]
pub fn spectrum(request: &str) -> Result<String, JsError> {
    js(spectrum_json(request))
}

#[wasm_bindgen(js_name = sweep)]
pub fn sweep_grid(request: &str) -> Result<String, JsError> {
    js(sweep_json(request))
}
