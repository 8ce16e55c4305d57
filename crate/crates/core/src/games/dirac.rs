use super::{DenseBlocks, GameOracle, JointPoint};
use crate::linalg::DenseMatrix;

/// One-dimensional GAN caricature: generator `θ`, discriminator `ψ`,
/// `f(θ, ψ) = softplus(θψ)`, `g = −f`. Unique equilibrium at the origin,
/// where the Jacobian of the vector field is a pure rotation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiracGan;

pub fn dirac_gan_game() -> DiracGan {
    DiracGan
}

fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl DiracGan {
    /// `(h'(u), h''(u))` at `u = θψ`.
    fn derivs(p: &JointPoint) -> (f64, f64) {
        let s = sigmoid(p.x[0] * p.y[0]);
        (s, s * (1.0 - s))
    }
}

impl GameOracle for DiracGan {
    fn name(&self) -> &'static str {
        "dirac"
    }

    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn is_zero_sum(&self) -> bool {
        true
    }

    fn loss_x(&self, p: &JointPoint) -> f64 {
        softplus(p.x[0] * p.y[0])
    }

    fn loss_y(&self, p: &JointPoint) -> f64 {
        -self.loss_x(p)
    }

    fn grad_x(&self, p: &JointPoint) -> Vec<f64> {
        let (d1, _) = Self::derivs(p);
        vec![p.y[0] * d1]
    }

    fn grad_y(&self, p: &JointPoint) -> Vec<f64> {
        let (d1, _) = Self::derivs(p);
        vec![-p.x[0] * d1]
    }

    fn hvp_xx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        let (_, d2) = Self::derivs(p);
        vec![p.y[0] * p.y[0] * d2 * u[0]]
    }

    fn hvp_yy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        let (_, d2) = Self::derivs(p);
        vec![-p.x[0] * p.x[0] * d2 * v[0]]
    }

    fn hvp_xy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        let (d1, d2) = Self::derivs(p);
        vec![(d1 + p.x[0] * p.y[0] * d2) * v[0]]
    }

    fn hvp_yx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.hvp_xy(p, u)
    }

    fn dense_blocks(&self, p: &JointPoint) -> Option<DenseBlocks> {
        let one = |v: f64| DenseMatrix::from_diagonal(&[v]);
        Some(DenseBlocks {
            xx_f: one(self.hvp_xx(p, &[1.0])[0]),
            yy_g: one(self.hvp_yy(p, &[1.0])[0]),
            xy_f: one(self.hvp_xy(p, &[1.0])[0]),
            yx_f: one(self.hvp_yx(p, &[1.0])[0]),
        })
    }

    fn equilibrium(&self) -> Option<JointPoint> {
        Some(JointPoint::zeros(1, 1))
    }

    fn default_point(&self) -> JointPoint {
        JointPoint {
            x: vec![1.0],
            y: vec![1.0],
        }
    }
}
