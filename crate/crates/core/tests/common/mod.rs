#![allow(dead_code)]

use acom::games::{quadratic_game, JointPoint, QuadraticGame};
use acom::linalg::{self, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let v = normal_vec(rng, len);
    let n = linalg::norm2(&v);
    linalg::scaled(1.0 / n, &v)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = normal_vec(rng, rows * cols);
    DenseMatrix::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub fn symmetric_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let m = normal_matrix(rng, n, n);
    m.add(&m.transpose()).scaled(0.5)
}

/// `s·(R Rᵀ + shift·I)` with `s = ±1`.
pub fn definite_matrix(rng: &mut ChaCha8Rng, n: usize, sign: f64, shift: f64) -> DenseMatrix {
    let r = normal_matrix(rng, n, n);
    r.matmul(&r.transpose())
        .scaled(1.0 / n as f64)
        .add(&DenseMatrix::identity(n).scaled(shift))
        .scaled(sign)
}

pub fn random_point(rng: &mut ChaCha8Rng, m: usize, n: usize) -> JointPoint {
    JointPoint::new(normal_vec(rng, m), normal_vec(rng, n)).unwrap()
}

/// Random quadratic game with arbitrary symmetric diagonal blocks.
pub fn random_quadratic(rng: &mut ChaCha8Rng, m: usize, n: usize) -> QuadraticGame {
    let a_xx = symmetric_matrix(rng, m);
    let a_yy = symmetric_matrix(rng, n);
    let b = normal_matrix(rng, m, n);
    let b_x = normal_vec(rng, m);
    let b_y = normal_vec(rng, n);
    quadratic_game(a_xx, a_yy, b, b_x, b_y).unwrap()
}

/// Quadratic game on which descent dynamics have a stable equilibrium:
/// `A_xx` positive definite, `A_yy` negative definite, nonzero offsets.
pub fn stable_quadratic(rng: &mut ChaCha8Rng, m: usize, n: usize) -> QuadraticGame {
    let a_xx = definite_matrix(rng, m, 1.0, 0.3);
    let a_yy = definite_matrix(rng, n, -1.0, 0.3);
    let b = normal_matrix(rng, m, n);
    let b_x = normal_vec(rng, m);
    let b_y = normal_vec(rng, n);
    quadratic_game(a_xx, a_yy, b, b_x, b_y).unwrap()
}

/// Relative error with the scale floored at one.
pub fn scaled_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = linalg::norm2(&linalg::sub(a, b));
    diff / linalg::norm2(a).max(linalg::norm2(b)).max(1.0)
}
