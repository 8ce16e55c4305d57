//! Update rules for two-player games behind one stepping interface.
//!
//! Every rule evaluates all derivatives at the pre-step point and moves both
//! players simultaneously. Each player descends its own loss.

mod clock;
mod rules;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{GameError, GameOracle, JointPoint};
use crate::linalg::LinalgError;

pub use rules::{
    acom_corrected_gradient, step_acom_adam, step_acom_rmsprop, step_adam, step_cgd, step_conopt,
    step_gda, step_ogda, step_rmsprop, step_sga, CgdStep,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("invalid optimizer config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("non-finite value in {stage}")]
    NonFinite { stage: &'static str },
    #[error("CG solve for player {player} failed: {source}")]
    Cg {
        player: &'static str,
        #[source]
        source: LinalgError,
    },
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "GDA")]
    Gda,
    #[serde(rename = "SGA")]
    Sga,
    #[serde(rename = "CONOPT", alias = "ConOpt")]
    ConOpt,
    #[serde(rename = "OGDA")]
    Ogda,
    #[serde(rename = "CGD")]
    Cgd,
    #[serde(rename = "ADAM")]
    Adam,
    #[serde(rename = "RMSPROP")]
    Rmsprop,
    #[serde(rename = "ACOM_RMSPROP")]
    AcomRmsprop,
    #[serde(rename = "ACOM_ADAM")]
    AcomAdam,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::Gda,
        Rule::Sga,
        Rule::ConOpt,
        Rule::Ogda,
        Rule::Cgd,
        Rule::Adam,
        Rule::Rmsprop,
        Rule::AcomRmsprop,
        Rule::AcomAdam,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Gda => "GDA",
            Rule::Sga => "SGA",
            Rule::ConOpt => "CONOPT",
            Rule::Ogda => "OGDA",
            Rule::Cgd => "CGD",
            Rule::Adam => "ADAM",
            Rule::Rmsprop => "RMSPROP",
            Rule::AcomRmsprop => "ACOM_RMSPROP",
            Rule::AcomAdam => "ACOM_ADAM",
        }
    }

    /// One-line description of the `x` update.
    pub fn summary(self) -> &'static str {
        match self {
            Rule::Gda => "x += α·(−∇x f)",
            Rule::Sga => "x += α·(−∇x f − γ·D²xy f·∇y f)",
            Rule::ConOpt => "x += α·(−∇x f − γ·D²xy f·∇y f − γ·D²xx f·∇x f)",
            Rule::Ogda => "x += α·(−∇x f − γ·D²xy f·∇y f + γ·D²xx f·∇x f)",
            Rule::Cgd => "x += α·Δx, (I + η²·D²xy f·D²yx f)·Δx = −(∇x f − γ·D²xy f·∇y f)",
            Rule::Adam => "bias-corrected moments of ∇x f",
            Rule::Rmsprop => "x −= α·∇x f/√(v+ε), v ← (1−β₁)v + β₁(∇x f)²",
            Rule::AcomRmsprop => "RMSPROP on D = ∇x f + D²xx f·Δx",
            Rule::AcomAdam => "ADAM on D = ∇x f + D²xx f·Δx",
        }
    }

    /// Rules that read second-derivative products.
    pub fn is_second_order(self) -> bool {
        !matches!(self, Rule::Gda | Rule::Adam | Rule::Rmsprop)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for Rule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace(['-', '+'], "_");
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

/// Hyperparameters. Fields a rule does not read are ignored by it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub rule: Rule,
    /// Learning rate `α` (the step size `h` of the fixed-point map).
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Second-order coefficient for SGA, ConOpt, OGDA and CGD.
    pub gamma: f64,
    /// CGD regularization.
    pub eta: f64,
    pub eps: f64,
    pub cg_tol: f64,
    /// `None` means `10·max(m, n)`.
    pub cg_max_iter: Option<usize>,
}

impl OptimizerConfig {
    pub fn defaults(rule: Rule) -> Self {
        let base = OptimizerConfig {
            rule,
            lr: 0.01,
            beta1: 0.5,
            beta2: 0.99,
            gamma: 0.1,
            eta: 0.1,
            eps: 1e-8,
            cg_tol: 1e-10,
            cg_max_iter: None,
        };
        match rule {
            Rule::Adam => OptimizerConfig {
                lr: 1e-3,
                beta1: 0.9,
                beta2: 0.999,
                ..base
            },
            Rule::Rmsprop | Rule::AcomRmsprop | Rule::AcomAdam => OptimizerConfig {
                lr: 2e-4,
                ..base
            },
            _ => base,
        }
    }

    pub fn with_lr(self, lr: f64) -> Self {
        OptimizerConfig { lr, ..self }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |field, reason: &str| {
            Err(OptimError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr", "must be finite and > 0");
        }
        for (field, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(field, "must lie in [0, 1)");
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma", "must be finite and >= 0");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta", "must be finite and > 0");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps", "must be finite and > 0");
        }
        if !(self.cg_tol > 0.0 && self.cg_tol.is_finite()) {
            return bad("cg_tol", "must be finite and > 0");
        }
        if self.cg_max_iter == Some(0) {
            return bad("cg_max_iter", "must be >= 1");
        }
        Ok(())
    }

    pub(crate) fn cg_max_iter_for(&self, dim: usize) -> usize {
        self.cg_max_iter.unwrap_or(10 * dim.max(1))
    }
}

/// Per-trajectory optimizer memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Point before the most recent step; equals the start point at `t = 0`.
    pub prev: JointPoint,
    pub m_x: Vec<f64>,
    pub m_y: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_y: Vec<f64>,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(start: &JointPoint) -> Self {
        let (m, n) = start.dims();
        OptimizerState {
            prev: start.clone(),
            m_x: vec![0.0; m],
            m_y: vec![0.0; n],
            v_x: vec![0.0; m],
            v_y: vec![0.0; n],
            t: 0,
        }
    }

    /// Everything except `prev`, flattened as `(m_x, m_y, v_x, v_y)`.
    pub fn moments_flat(&self) -> Vec<f64> {
        [&self.m_x, &self.m_y, &self.v_x, &self.v_y]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub point: JointPoint,
    pub state: OptimizerState,
    /// Monotonic-clock time spent computing the update. Zero on wasm.
    pub elapsed: Duration,
    /// Inner CG iterations summed over both players (CGD only).
    pub cg_iterations: usize,
}

/// One step of `config.rule` from `point`.
pub fn step(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    point: &JointPoint,
    state: &OptimizerState,
) -> Result<StepOutcome, OptimError> {
    crate::games::check_dims(game, point)?;
    crate::games::check_dims(game, &state.prev)?;
    let timer = clock::Timer::start();
    let mut cg_iterations = 0;
    let (next, mut new_state) = match config.rule {
        Rule::Gda => (step_gda(game, config, point)?, state.clone()),
        Rule::Sga => (step_sga(game, config, point)?, state.clone()),
        Rule::ConOpt => (step_conopt(game, config, point)?, state.clone()),
        Rule::Ogda => (step_ogda(game, config, point)?, state.clone()),
        Rule::Cgd => {
            let out = step_cgd(game, config, point)?;
            cg_iterations = out.cg_iterations;
            (out.point, state.clone())
        }
        Rule::Adam => step_adam(game, config, point, state)?,
        Rule::Rmsprop => step_rmsprop(game, config, point, state)?,
        Rule::AcomRmsprop => step_acom_rmsprop(game, config, point, state)?,
        Rule::AcomAdam => step_acom_adam(game, config, point, state)?,
    };
    let elapsed = timer.elapsed();
    if !config.rule.is_adaptive() {
        new_state.prev = point.clone();
        new_state.t += 1;
    }
    Ok(StepOutcome {
        point: next,
        state: new_state,
        elapsed,
        cg_iterations,
    })
}

impl Rule {
    /// Rules that keep moment estimates in [`OptimizerState`].
    pub fn is_adaptive(self) -> bool {
        matches!(
            self,
            Rule::Adam | Rule::Rmsprop | Rule::AcomRmsprop | Rule::AcomAdam
        )
    }
}
