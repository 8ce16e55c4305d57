use super::{DenseBlocks, GameError, GameOracle, JointPoint};
use crate::linalg::{self, DenseMatrix};

/// `f(x, y) = xᵀBy`, `g = −f`. Gradient descent-ascent cycles on it.
#[derive(Debug, Clone)]
pub struct BilinearGame {
    b: DenseMatrix,
}

pub fn bilinear_game(b: DenseMatrix) -> Result<BilinearGame, GameError> {
    if !b.is_finite() {
        return Err(GameError::NonFinite("B"));
    }
    if b.rows() == 0 || b.cols() == 0 {
        return Err(GameError::EmptyPlayer {
            m: b.rows(),
            n: b.cols(),
        });
    }
    Ok(BilinearGame { b })
}

impl BilinearGame {
    pub fn coupling(&self) -> &DenseMatrix {
        &self.b
    }
}

impl GameOracle for BilinearGame {
    fn name(&self) -> &'static str {
        "bilinear"
    }

    fn dims(&self) -> (usize, usize) {
        (self.b.rows(), self.b.cols())
    }

    fn is_zero_sum(&self) -> bool {
        true
    }

    fn loss_x(&self, p: &JointPoint) -> f64 {
        linalg::dot(&p.x, &self.b.matvec(&p.y))
    }

    fn loss_y(&self, p: &JointPoint) -> f64 {
        -self.loss_x(p)
    }

    fn grad_x(&self, p: &JointPoint) -> Vec<f64> {
        self.b.matvec(&p.y)
    }

    fn grad_y(&self, p: &JointPoint) -> Vec<f64> {
        linalg::scaled(-1.0, &self.b.matvec_transposed(&p.x))
    }

    fn hvp_xx(&self, _p: &JointPoint, u: &[f64]) -> Vec<f64> {
        vec![0.0; u.len()]
    }

    fn hvp_yy(&self, _p: &JointPoint, v: &[f64]) -> Vec<f64> {
        vec![0.0; v.len()]
    }

    fn hvp_xy(&self, _p: &JointPoint, v: &[f64]) -> Vec<f64> {
        self.b.matvec(v)
    }

    fn hvp_yx(&self, _p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.b.matvec_transposed(u)
    }

    fn dense_blocks(&self, _p: &JointPoint) -> Option<DenseBlocks> {
        let (m, n) = self.dims();
        Some(DenseBlocks {
            xx_f: DenseMatrix::zeros(m, m),
            yy_g: DenseMatrix::zeros(n, n),
            xy_f: self.b.clone(),
            yx_f: self.b.transpose(),
        })
    }

    fn equilibrium(&self) -> Option<JointPoint> {
        let (m, n) = self.dims();
        Some(JointPoint::zeros(m, n))
    }

    fn default_point(&self) -> JointPoint {
        let (m, n) = self.dims();
        JointPoint {
            x: vec![1.0; m],
            y: vec![1.0; n],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> BilinearGame {
        bilinear_game(DenseMatrix::from_rows(&[vec![1.0]]).unwrap()).unwrap()
    }

    #[test]
    fn scalar_values_at_unit_point() {
        let g = scalar();
        let p = JointPoint::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(g.loss_x(&p), 1.0);
        assert_eq!(g.grad_x(&p), vec![1.0]);
        assert_eq!(g.grad_y(&p), vec![-1.0]);
        assert_eq!(g.hvp_xx(&p, &[3.7]), vec![0.0]);
    }

    #[test]
    fn scalar_values_at_two_three() {
        let g = scalar();
        let p = JointPoint::new(vec![2.0], vec![3.0]).unwrap();
        assert_eq!(g.loss_x(&p), 6.0);
        assert_eq!(g.loss_y(&p), -6.0);
        assert_eq!(g.grad_x(&p), vec![3.0]);
        assert_eq!(g.grad_y(&p), vec![-2.0]);
    }

    #[test]
    fn rejects_non_finite_coupling() {
        let b = DenseMatrix::from_fn(1, 1, |_, _| f64::INFINITY);
        assert!(bilinear_game(b).is_err());
    }
}
