use super::{axpy, dot, norm2, DenseMatrix, LinalgError};

/// LU factorisation with partial pivoting, `P·M = L·U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: DenseMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl LuDecomposition {
    pub fn new(m: &DenseMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = m.rows();
        let threshold = 1e-14 * m.norm_inf();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;

        for k in 0..n {
            let (pivot_row, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)]))
                .fold((k, 0.0f64), |best, (i, v)| if v.abs() > best.1.abs() { (i, v) } else { best });
            if pivot.abs() <= threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { column: k, pivot });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
                swaps += 1;
            }
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        lu[(i, j)] -= factor * lu[(k, j)];
                    }
                }
            }
        }
        Ok(LuDecomposition { lu, perm, swaps })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.lu.rows();
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                actual: rhs.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> f64 {
        let diag: f64 = (0..self.lu.rows()).map(|i| self.lu[(i, i)]).product();
        if self.swaps.is_multiple_of(2) {
            diag
        } else {
            -diag
        }
    }
}

/// Direct solve of `M·x = rhs`.
pub fn lu_solve(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    LuDecomposition::new(m)?.solve(rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖M·x − rhs‖ / ‖rhs‖` from the recurrence.
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive definite operator given as
/// a closure. Starts from zero and stops once `‖M·x − rhs‖ ≤ tol·‖rhs‖`.
pub fn cg_solve(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution, LinalgError> {
    let n = rhs.len();
    let rhs_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    if !rhs_norm.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rs_old = dot(&r, &r);
    let mut relative = rs_old.sqrt() / rhs_norm;

    for it in 1..=max_iter {
        let ap = apply(&p);
        if ap.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                actual: ap.len(),
            });
        }
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // Breakdown: operator is not positive definite along p.
            return Err(LinalgError::CgNoConvergence {
                iterations: it,
                residual: relative,
            });
        }
        let alpha = rs_old / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rs_new = dot(&r, &r);
        relative = rs_new.sqrt() / rhs_norm;
        if relative <= tol {
            return Ok(CgSolution {
                x,
                iterations: it,
                relative_residual: relative,
            });
        }
        let beta = rs_new / rs_old;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rs_old = rs_new;
    }
    Err(LinalgError::CgNoConvergence {
        iterations: max_iter,
        residual: relative,
    })
}
