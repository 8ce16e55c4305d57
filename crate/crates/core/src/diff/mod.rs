//! Automatic differentiation and finite-difference oracles.
//!
//! [`gradient`] and [`hessian_vector_product`] evaluate a scalar function
//! built on a [`Tape`]. The `fd_*` functions are independent central
//! difference checks and share no code with the tape.

mod tape;

pub use tape::{Tape, Var};

/// Exact reverse-mode gradient of `f` at `point`.
pub fn gradient<F>(f: F, point: &[f64]) -> Vec<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let mut tape = Tape::new();
    let inputs = tape.inputs(point);
    let out = f(&mut tape, &inputs);
    tape.gradient(out, &inputs)
}

/// Value and gradient in one forward/backward pass.
pub fn value_and_gradient<F>(f: F, point: &[f64]) -> (f64, Vec<f64>)
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let mut tape = Tape::new();
    let inputs = tape.inputs(point);
    let out = f(&mut tape, &inputs);
    (tape.value(out), tape.gradient(out, &inputs))
}

/// `∇²f(point) · direction` by double backward: the gradient of
/// `∇f · direction`, with `direction` held constant.
pub fn hessian_vector_product<F>(f: F, point: &[f64], direction: &[f64]) -> Vec<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    assert_eq!(point.len(), direction.len(), "direction length mismatch");
    let mut tape = Tape::new();
    let inputs = tape.inputs(point);
    let out = f(&mut tape, &inputs);
    let grads = tape.gradient_vars(out, &inputs);

    let mut terms = Vec::new();
    for (&g, &d) in grads.iter().zip(direction) {
        if d != 0.0 {
            terms.push(tape.scale(g, d));
        }
    }
    if terms.is_empty() {
        return vec![0.0; point.len()];
    }
    let directional = tape.sum(&terms);
    tape.gradient(directional, &inputs)
}

/// Default central-difference step for gradients.
pub fn default_gradient_step(point: &[f64]) -> f64 {
    1e-5 * (1.0 + crate::linalg::norm_inf(point))
}

/// Default central-difference step for Hessian-vector products.
pub fn default_hvp_step(point: &[f64]) -> f64 {
    1e-4 * (1.0 + crate::linalg::norm_inf(point))
}

/// Central differences `(f(p + εeᵢ) − f(p − εeᵢ)) / 2ε` per coordinate.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, point: &[f64], step: f64) -> Vec<f64> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut p = point.to_vec();
    (0..point.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + step;
            let plus = f(&p);
            p[i] = orig - step;
            let minus = f(&p);
            p[i] = orig;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// `(∇f(p + εv) − ∇f(p − εv)) / 2ε` from a gradient oracle.
pub fn fd_hvp(
    grad: impl Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    direction: &[f64],
    step: f64,
) -> Vec<f64> {
    assert!(step > 0.0, "finite-difference step must be positive");
    assert_eq!(point.len(), direction.len(), "direction length mismatch");
    let plus: Vec<f64> = point.iter().zip(direction).map(|(p, d)| p + step * d).collect();
    let minus: Vec<f64> = point.iter().zip(direction).map(|(p, d)| p - step * d).collect();
    grad(&plus)
        .iter()
        .zip(grad(&minus))
        .map(|(a, b)| (a - b) / (2.0 * step))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_error;

    fn half_norm_sq(t: &mut Tape, u: &[Var]) -> Var {
        let sq: Vec<Var> = u.iter().map(|&v| t.mul(v, v)).collect();
        let s = t.sum(&sq);
        t.scale(s, 0.5)
    }

    #[test]
    fn gradient_of_half_norm_squared() {
        assert_eq!(gradient(half_norm_sq, &[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn gradient_through_tanh() {
        let g = gradient(
            |t, u| {
                let th = t.tanh(u[0]);
                t.mul(th, u[1])
            },
            &[0.0, 2.0],
        );
        assert_eq!(g, vec![2.0, 0.0]);
    }

    #[test]
    fn fd_gradient_of_linear_is_exact() {
        let c = [1.5, -2.0, 0.25];
        let f = |u: &[f64]| u.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        for step in [1e-1, 1e-3, 1e-6] {
            let g = fd_gradient(f, &[0.3, 0.7, -1.1], step);
            for (gi, ci) in g.iter().zip(&c) {
                assert!((gi - ci).abs() < 1e-9, "{g:?}");
            }
        }
    }

    #[test]
    fn fd_gradient_of_square() {
        let g = fd_gradient(|u| u[0] * u[0], &[1.0], 1e-4);
        assert!((g[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn hvp_of_half_norm_is_direction() {
        let hv = hessian_vector_product(half_norm_sq, &[0.3, -0.2, 5.0], &[1.0, 2.0, -3.0]);
        assert_eq!(hv, vec![1.0, 2.0, -3.0]);
    }

    #[test]
    fn hvp_matches_finite_differences_for_smooth_function() {
        let f = |t: &mut Tape, u: &[Var]| {
            let a = t.mul(u[0], u[1]);
            let b = t.tanh(a);
            let c = t.softplus(u[2]);
            let d = t.mul(b, c);
            let e = t.sigmoid(u[0]);
            t.add(d, e)
        };
        let p = [0.4, -0.7, 1.3];
        let v = [0.2, 1.0, -0.5];
        let exact = hessian_vector_product(f, &p, &v);
        let approx = fd_hvp(|q| gradient(f, q), &p, &v, default_hvp_step(&p));
        assert!(relative_error(&exact, &approx) < 1e-7, "{exact:?} vs {approx:?}");
    }

    #[test]
    fn zero_direction_gives_zero_product() {
        assert_eq!(hessian_vector_product(half_norm_sq, &[1.0, 2.0], &[0.0, 0.0]), vec![0.0, 0.0]);
    }
}
