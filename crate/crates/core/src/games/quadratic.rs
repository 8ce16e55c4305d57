use super::{DenseBlocks, GameError, GameOracle, JointPoint};
use crate::linalg::{self, DenseMatrix};

const SYMMETRY_TOL: f64 = 1e-12;

/// Zero-sum quadratic game
///
/// `f(x, y) = ½xᵀA_xx x + xᵀBy + ½yᵀA_yy y + b_xᵀx + b_yᵀy`, `g = −f`,
///
/// so `D²xx f = A_xx`, `D²yy f = A_yy`, `D²xy f = B`, and all blocks are
/// constant.
#[derive(Debug, Clone)]
pub struct QuadraticGame {
    a_xx: DenseMatrix,
    a_yy: DenseMatrix,
    b: DenseMatrix,
    b_x: Vec<f64>,
    b_y: Vec<f64>,
}

pub fn quadratic_game(
    a_xx: DenseMatrix,
    a_yy: DenseMatrix,
    b: DenseMatrix,
    b_x: Vec<f64>,
    b_y: Vec<f64>,
) -> Result<QuadraticGame, GameError> {
    let m = a_xx.rows();
    let n = a_yy.rows();
    if m == 0 || n == 0 {
        return Err(GameError::EmptyPlayer { m, n });
    }
    let shape = |what, mat: &DenseMatrix, expected: (usize, usize)| {
        if (mat.rows(), mat.cols()) != expected {
            Err(GameError::Shape {
                what,
                expected,
                actual: (mat.rows(), mat.cols()),
            })
        } else {
            Ok(())
        }
    };
    shape("A_xx", &a_xx, (m, m))?;
    shape("A_yy", &a_yy, (n, n))?;
    shape("B", &b, (m, n))?;
    if b_x.len() != m {
        return Err(GameError::Shape {
            what: "b_x",
            expected: (m, 1),
            actual: (b_x.len(), 1),
        });
    }
    if b_y.len() != n {
        return Err(GameError::Shape {
            what: "b_y",
            expected: (n, 1),
            actual: (b_y.len(), 1),
        });
    }
    for (what, mat) in [("A_xx", &a_xx), ("A_yy", &a_yy), ("B", &b)] {
        if !mat.is_finite() {
            return Err(GameError::NonFinite(what));
        }
    }
    if b_x.iter().chain(&b_y).any(|v| !v.is_finite()) {
        return Err(GameError::NonFinite("linear terms"));
    }
    for (what, mat) in [("A_xx", &a_xx), ("A_yy", &a_yy)] {
        let asym = mat.asymmetry().unwrap_or(0.0);
        if asym > SYMMETRY_TOL {
            return Err(GameError::NotSymmetric {
                what,
                asymmetry: asym,
            });
        }
    }
    Ok(QuadraticGame {
        a_xx,
        a_yy,
        b,
        b_x,
        b_y,
    })
}

impl QuadraticGame {
    /// Scalar game with no linear terms.
    pub fn scalar(a_xx: f64, a_yy: f64, b: f64) -> Result<Self, GameError> {
        let s = |v: f64| DenseMatrix::from_diagonal(&[v]);
        quadratic_game(s(a_xx), s(a_yy), s(b), vec![0.0], vec![0.0])
    }

    pub fn a_xx(&self) -> &DenseMatrix {
        &self.a_xx
    }

    pub fn a_yy(&self) -> &DenseMatrix {
        &self.a_yy
    }

    pub fn coupling(&self) -> &DenseMatrix {
        &self.b
    }

    /// The same game with the roles of the players exchanged: the new first
    /// player is the old `y`, descending `g`.
    pub fn swap_players(&self) -> QuadraticGame {
        QuadraticGame {
            a_xx: self.a_yy.scaled(-1.0),
            a_yy: self.a_xx.scaled(-1.0),
            b: self.b.transpose().scaled(-1.0),
            b_x: linalg::scaled(-1.0, &self.b_y),
            b_y: linalg::scaled(-1.0, &self.b_x),
        }
    }

    /// `[[A_xx, B], [Bᵀ, A_yy]]`, the Hessian of `f` in `(x, y)`.
    fn hessian(&self) -> DenseMatrix {
        let (m, n) = (self.a_xx.rows(), self.a_yy.rows());
        let mut h = DenseMatrix::zeros(m + n, m + n);
        h.set_block(0, 0, &self.a_xx);
        h.set_block(0, m, &self.b);
        h.set_block(m, 0, &self.b.transpose());
        h.set_block(m, m, &self.a_yy);
        h
    }

    /// Unique stationary point, `None` when the Hessian of `f` is singular.
    pub fn stationary_point(&self) -> Option<JointPoint> {
        let mut rhs = linalg::scaled(-1.0, &self.b_x);
        rhs.extend(linalg::scaled(-1.0, &self.b_y));
        let sol = linalg::lu_solve(&self.hessian(), &rhs).ok()?;
        Some(JointPoint::from_flat(self.a_xx.rows(), &sol))
    }
}

impl GameOracle for QuadraticGame {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dims(&self) -> (usize, usize) {
        (self.a_xx.rows(), self.a_yy.rows())
    }

    fn is_zero_sum(&self) -> bool {
        true
    }

    fn loss_x(&self, p: &JointPoint) -> f64 {
        0.5 * linalg::dot(&p.x, &self.a_xx.matvec(&p.x))
            + linalg::dot(&p.x, &self.b.matvec(&p.y))
            + 0.5 * linalg::dot(&p.y, &self.a_yy.matvec(&p.y))
            + linalg::dot(&self.b_x, &p.x)
            + linalg::dot(&self.b_y, &p.y)
    }

    fn loss_y(&self, p: &JointPoint) -> f64 {
        -self.loss_x(p)
    }

    fn grad_x(&self, p: &JointPoint) -> Vec<f64> {
        let mut g = self.a_xx.matvec(&p.x);
        linalg::axpy(1.0, &self.b.matvec(&p.y), &mut g);
        linalg::axpy(1.0, &self.b_x, &mut g);
        g
    }

    fn grad_y(&self, p: &JointPoint) -> Vec<f64> {
        let mut g = self.b.matvec_transposed(&p.x);
        linalg::axpy(1.0, &self.a_yy.matvec(&p.y), &mut g);
        linalg::axpy(1.0, &self.b_y, &mut g);
        linalg::scaled(-1.0, &g)
    }

    fn hvp_xx(&self, _p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.a_xx.matvec(u)
    }

    fn hvp_yy(&self, _p: &JointPoint, v: &[f64]) -> Vec<f64> {
        linalg::scaled(-1.0, &self.a_yy.matvec(v))
    }

    fn hvp_xy(&self, _p: &JointPoint, v: &[f64]) -> Vec<f64> {
        self.b.matvec(v)
    }

    fn hvp_yx(&self, _p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.b.matvec_transposed(u)
    }

    fn dense_blocks(&self, _p: &JointPoint) -> Option<DenseBlocks> {
        Some(DenseBlocks {
            xx_f: self.a_xx.clone(),
            yy_g: self.a_yy.scaled(-1.0),
            xy_f: self.b.clone(),
            yx_f: self.b.transpose(),
        })
    }

    fn equilibrium(&self) -> Option<JointPoint> {
        self.stationary_point()
    }

    fn default_point(&self) -> JointPoint {
        let (m, n) = self.dims();
        let mut p = self
            .stationary_point()
            .unwrap_or_else(|| JointPoint::zeros(m, n));
        p.x.iter_mut().for_each(|v| *v += 1.0);
        p.y.iter_mut().for_each(|v| *v += 1.0);
        p
    }
}
