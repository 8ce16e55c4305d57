//! Two-player differentiable games.
//!
//! Player `x` descends its loss `f`, player `y` descends its loss `g`. A
//! game is zero-sum when `g = −f`. Every game exposes gradients and
//! matrix-free second-derivative products; small games also expose the
//! dense blocks.

mod bilinear;
mod dirac;
mod mlp;
mod quadratic;
mod zoo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError};

pub use bilinear::{bilinear_game, BilinearGame};
pub use dirac::{dirac_gan_game, DiracGan};
pub use mlp::{mlp_gan_game, GeneratorLoss, MlpGan, MlpGanConfig};
pub use quadratic::{quadratic_game, QuadraticGame};
pub use zoo::{BilinearParams, DiracParams, GameSpec, QuadraticParams, GAME_IDS};

/// Dense blocks are only assembled when `m + n` is at most this.
pub const DENSE_BLOCK_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("{what} must be symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { what: &'static str, asymmetry: f64 },
    #[error("{what} has shape {actual:?}, expected {expected:?}")]
    Shape {
        what: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("player dimensions must be at least 1, got m={m}, n={n}")]
    EmptyPlayer { m: usize, n: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("hidden width must be at least 2, got {0}")]
    HiddenTooSmall(usize),
    #[error("at least one data mode is required")]
    NoModes,
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("unknown game id `{0}`")]
    UnknownGame(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Concatenated parameters of both players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JointPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, GameError> {
        let p = JointPoint { x, y };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        JointPoint {
            x: vec![0.0; m],
            y: vec![0.0; n],
        }
    }

    /// Splits a flat `(x, y)` vector after the first `m` entries.
    pub fn from_flat(m: usize, flat: &[f64]) -> Self {
        JointPoint {
            x: flat[..m].to_vec(),
            y: flat[m..].to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.x.is_empty() || self.y.is_empty() {
            return Err(GameError::EmptyPlayer {
                m: self.x.len(),
                n: self.y.len(),
            });
        }
        if !self.is_finite() {
            return Err(GameError::NonFinite("joint point"));
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len() + self.y.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        (linalg::dot(&self.x, &self.x) + linalg::dot(&self.y, &self.y)).sqrt()
    }

    pub fn distance(&self, other: &JointPoint) -> f64 {
        let dx = linalg::sub(&self.x, &other.x);
        let dy = linalg::sub(&self.y, &other.y);
        (linalg::dot(&dx, &dx) + linalg::dot(&dy, &dy)).sqrt()
    }
}

/// Second-derivative blocks at a point: `D²xx f`, `D²yy g`, `D²xy f`, `D²yx f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlocks {
    pub xx_f: DenseMatrix,
    pub yy_g: DenseMatrix,
    pub xy_f: DenseMatrix,
    pub yx_f: DenseMatrix,
}

/// Loss values, gradients and second-derivative products of a game.
///
/// The cross-player methods with a default body (`grad_y_of_f`,
/// `grad_x_of_g`, `hvp_xy_g`, `hvp_yx_g`) are derived from `g = −f` and
/// must be overridden by games that are not zero-sum.
pub trait GameOracle: Send + Sync {
    fn name(&self) -> &'static str;

    /// `(m, n)`
    fn dims(&self) -> (usize, usize);

    fn is_zero_sum(&self) -> bool;

    /// `f(x, y)`, the loss player `x` descends.
    fn loss_x(&self, p: &JointPoint) -> f64;

    /// `g(x, y)`, the loss player `y` descends.
    fn loss_y(&self, p: &JointPoint) -> f64;

    /// `∇x f`
    fn grad_x(&self, p: &JointPoint) -> Vec<f64>;

    /// `∇y g`
    fn grad_y(&self, p: &JointPoint) -> Vec<f64>;

    /// `∇y f`
    fn grad_y_of_f(&self, p: &JointPoint) -> Vec<f64> {
        linalg::scaled(-1.0, &self.grad_y(p))
    }

    /// `∇x g`
    fn grad_x_of_g(&self, p: &JointPoint) -> Vec<f64> {
        linalg::scaled(-1.0, &self.grad_x(p))
    }

    /// `D²xx f · u`, `u ∈ ℝ^m`
    fn hvp_xx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64>;

    /// `D²yy g · v`, `v ∈ ℝ^n`
    fn hvp_yy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64>;

    /// `D²xy f · v ∈ ℝ^m`, `v ∈ ℝ^n`
    fn hvp_xy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64>;

    /// `D²yx f · u ∈ ℝ^n`, `u ∈ ℝ^m`
    fn hvp_yx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64>;

    /// `D²xy g · v`
    fn hvp_xy_g(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        linalg::scaled(-1.0, &self.hvp_xy(p, v))
    }

    /// `D²yx g · u`
    fn hvp_yx_g(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        linalg::scaled(-1.0, &self.hvp_yx(p, u))
    }

    /// Dense second-derivative blocks, assembled from the products on basis
    /// vectors unless the game overrides this. `None` above
    /// [`DENSE_BLOCK_LIMIT`].
    fn dense_blocks(&self, p: &JointPoint) -> Option<DenseBlocks> {
        let (m, n) = self.dims();
        if m + n > DENSE_BLOCK_LIMIT {
            return None;
        }
        Some(DenseBlocks {
            xx_f: DenseMatrix::from_operator(m, m, |u| self.hvp_xx(p, u)),
            yy_g: DenseMatrix::from_operator(n, n, |v| self.hvp_yy(p, v)),
            xy_f: DenseMatrix::from_operator(m, n, |v| self.hvp_xy(p, v)),
            yx_f: DenseMatrix::from_operator(n, m, |u| self.hvp_yx(p, u)),
        })
    }

    /// A known stationary point, when the game has one in closed form.
    fn equilibrium(&self) -> Option<JointPoint> {
        None
    }

    /// Starting point used when an experiment does not give one.
    fn default_point(&self) -> JointPoint;
}

/// `V(p) = (∇x f, ∇y g)` flattened.
pub fn vector_field(game: &dyn GameOracle, p: &JointPoint) -> Vec<f64> {
    let mut v = game.grad_x(p);
    v.extend(game.grad_y(p));
    v
}

pub fn vector_field_norm(game: &dyn GameOracle, p: &JointPoint) -> f64 {
    linalg::norm2(&vector_field(game, p))
}

pub(crate) fn check_dims(game: &dyn GameOracle, p: &JointPoint) -> Result<(), GameError> {
    let (m, n) = game.dims();
    if p.dims() != (m, n) {
        return Err(GameError::Shape {
            what: "joint point",
            expected: (m, n),
            actual: p.dims(),
        });
    }
    Ok(())
}
