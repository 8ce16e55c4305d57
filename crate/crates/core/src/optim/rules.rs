use super::{OptimError, OptimizerConfig, OptimizerState};
use crate::games::{GameOracle, JointPoint};
use crate::linalg::{self, cg_solve};

fn ensure_finite(v: &[f64], stage: &'static str) -> Result<(), OptimError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OptimError::NonFinite { stage })
    }
}

fn negated(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// `x + α·Δ`
fn advance(x: &[f64], lr: f64, delta: &[f64]) -> Vec<f64> {
    x.iter().zip(delta).map(|(xi, di)| xi + lr * di).collect()
}

fn finish(p: &JointPoint, lr: f64, dx: &[f64], dy: &[f64]) -> Result<JointPoint, OptimError> {
    let next = JointPoint {
        x: advance(&p.x, lr, dx),
        y: advance(&p.y, lr, dy),
    };
    ensure_finite(&next.x, "update")?;
    ensure_finite(&next.y, "update")?;
    Ok(next)
}

fn gradients(game: &dyn GameOracle, p: &JointPoint) -> Result<(Vec<f64>, Vec<f64>), OptimError> {
    let gx = game.grad_x(p);
    let gy = game.grad_y(p);
    ensure_finite(&gx, "gradient")?;
    ensure_finite(&gy, "gradient")?;
    Ok((gx, gy))
}

/// `Δx = −∇x f`, `Δy = −∇y g`.
pub fn step_gda(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
) -> Result<JointPoint, OptimError> {
    let (gx, gy) = gradients(game, p)?;
    finish(p, config.lr, &negated(&gx), &negated(&gy))
}

#[derive(Clone, Copy)]
enum Consensus {
    Off,
    /// `−γ·D²xx f·∇x f` (ConOpt)
    Damp,
    /// `+γ·D²xx f·∇x f` (OGDA)
    Amplify,
}

/// Shared body of SGA, ConOpt and OGDA. The `x` row uses `∇y f` in the
/// mixed term; the `y` row is the same rule on `g`.
fn step_mixed(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    consensus: Consensus,
) -> Result<JointPoint, OptimError> {
    let (gx, gy) = gradients(game, p)?;
    let gy_f = game.grad_y_of_f(p);
    let gx_g = game.grad_x_of_g(p);
    ensure_finite(&gy_f, "gradient")?;
    ensure_finite(&gx_g, "gradient")?;
    let gamma = config.gamma;

    let mut dx = negated(&gx);
    linalg::axpy(-gamma, &game.hvp_xy(p, &gy_f), &mut dx);
    let mut dy = negated(&gy);
    linalg::axpy(-gamma, &game.hvp_yx_g(p, &gx_g), &mut dy);

    let sign = match consensus {
        Consensus::Off => None,
        Consensus::Damp => Some(-1.0),
        Consensus::Amplify => Some(1.0),
    };
    if let Some(s) = sign {
        linalg::axpy(s * gamma, &game.hvp_xx(p, &gx), &mut dx);
        linalg::axpy(s * gamma, &game.hvp_yy(p, &gy), &mut dy);
    }
    ensure_finite(&dx, "second-order correction")?;
    ensure_finite(&dy, "second-order correction")?;
    finish(p, config.lr, &dx, &dy)
}

/// Symplectic gradient adjustment: `Δx = −∇x f − γ·D²xy f·∇y f`.
pub fn step_sga(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
) -> Result<JointPoint, OptimError> {
    step_mixed(game, config, p, Consensus::Off)
}

/// Consensus optimization: SGA plus `−γ·D²xx f·∇x f`.
pub fn step_conopt(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
) -> Result<JointPoint, OptimError> {
    step_mixed(game, config, p, Consensus::Damp)
}

/// SGA plus `+γ·D²xx f·∇x f`.
pub fn step_ogda(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
) -> Result<JointPoint, OptimError> {
    step_mixed(game, config, p, Consensus::Amplify)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgdStep {
    pub point: JointPoint,
    pub cg_iterations: usize,
}

/// Competitive gradient descent:
/// `(I + η²·D²xy f·D²yx f)·Δx = −(∇x f − γ·D²xy f·∇y f)`, solved with
/// matrix-free conjugate gradients; `y` symmetric on `g`.
pub fn step_cgd(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
) -> Result<CgdStep, OptimError> {
    let (m, n) = game.dims();
    let (gx, gy) = gradients(game, p)?;
    let gy_f = game.grad_y_of_f(p);
    let gx_g = game.grad_x_of_g(p);
    ensure_finite(&gy_f, "gradient")?;
    ensure_finite(&gx_g, "gradient")?;
    let (gamma, eta2) = (config.gamma, config.eta * config.eta);

    let mut inner_x = gx;
    linalg::axpy(-gamma, &game.hvp_xy(p, &gy_f), &mut inner_x);
    let rhs_x = negated(&inner_x);
    let mut inner_y = gy;
    linalg::axpy(-gamma, &game.hvp_yx_g(p, &gx_g), &mut inner_y);
    let rhs_y = negated(&inner_y);
    ensure_finite(&rhs_x, "second-order correction")?;
    ensure_finite(&rhs_y, "second-order correction")?;

    let sol_x = cg_solve(
        |u| {
            let mut out = u.to_vec();
            linalg::axpy(eta2, &game.hvp_xy(p, &game.hvp_yx(p, u)), &mut out);
            out
        },
        &rhs_x,
        config.cg_tol,
        config.cg_max_iter_for(m),
    )
    .map_err(|source| OptimError::Cg { player: "x", source })?;
    let sol_y = cg_solve(
        |v| {
            let mut out = v.to_vec();
            linalg::axpy(eta2, &game.hvp_yx_g(p, &game.hvp_xy_g(p, v)), &mut out);
            out
        },
        &rhs_y,
        config.cg_tol,
        config.cg_max_iter_for(n),
    )
    .map_err(|source| OptimError::Cg { player: "y", source })?;

    Ok(CgdStep {
        point: finish(p, config.lr, &sol_x.x, &sol_y.x)?,
        cg_iterations: sol_x.iterations + sol_y.iterations,
    })
}

/// `D^x = ∇x f + D²xx f·(x − x_prev)`, `D^y = ∇y g + D²yy g·(y − y_prev)`.
///
/// A zero displacement skips the product, so the first step returns the
/// plain gradients exactly.
pub fn acom_corrected_gradient(
    game: &dyn GameOracle,
    p: &JointPoint,
    prev: &JointPoint,
) -> Result<(Vec<f64>, Vec<f64>), OptimError> {
    crate::games::check_dims(game, prev)?;
    let (mut dx, mut dy) = gradients(game, p)?;
    let delta_x = linalg::sub(&p.x, &prev.x);
    let delta_y = linalg::sub(&p.y, &prev.y);
    if delta_x.iter().any(|&d| d != 0.0) {
        linalg::axpy(1.0, &game.hvp_xx(p, &delta_x), &mut dx);
    }
    if delta_y.iter().any(|&d| d != 0.0) {
        linalg::axpy(1.0, &game.hvp_yy(p, &delta_y), &mut dy);
    }
    ensure_finite(&dx, "second-order correction")?;
    ensure_finite(&dy, "second-order correction")?;
    Ok((dx, dy))
}

/// In-place bias-corrected ADAM update of one player.
fn adam_player(
    x: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    d: &[f64],
    config: &OptimizerConfig,
    t: u64,
) -> Result<(), OptimError> {
    let (b1, b2) = (config.beta1, config.beta2);
    for (mi, di) in m.iter_mut().zip(d) {
        *mi = b1 * *mi + (1.0 - b1) * di;
    }
    ensure_finite(m, "first moment")?;
    for (vi, di) in v.iter_mut().zip(d) {
        *vi = b2 * *vi + (1.0 - b2) * di * di;
    }
    ensure_finite(v, "second moment")?;
    let c1 = 1.0 - b1.powf(t as f64);
    let c2 = 1.0 - b2.powf(t as f64);
    for ((xi, mi), vi) in x.iter_mut().zip(m.iter()).zip(v.iter()) {
        let m_hat = mi / c1;
        let v_hat = vi / c2;
        *xi -= config.lr * m_hat / (v_hat.sqrt() + config.eps);
    }
    ensure_finite(x, "update")
}

/// In-place RMSprop update of one player: `v ← (1−β)v + β·D²`,
/// `x ← x − α·D/√(v+ε)` with the updated `v`.
fn rmsprop_player(
    x: &mut [f64],
    v: &mut [f64],
    d: &[f64],
    beta: f64,
    config: &OptimizerConfig,
) -> Result<(), OptimError> {
    for (vi, di) in v.iter_mut().zip(d) {
        *vi = (1.0 - beta) * *vi + beta * di * di;
    }
    ensure_finite(v, "second moment")?;
    for ((xi, vi), di) in x.iter_mut().zip(v.iter()).zip(d) {
        *xi -= config.lr * di / (vi + config.eps).sqrt();
    }
    ensure_finite(x, "update")
}

#[derive(Clone, Copy)]
enum Adaptive {
    Adam,
    Rmsprop,
}

fn adaptive_step(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    state: &OptimizerState,
    corrected: bool,
    kind: Adaptive,
) -> Result<(JointPoint, OptimizerState), OptimError> {
    let (dx, dy) = if corrected {
        acom_corrected_gradient(game, p, &state.prev)?
    } else {
        gradients(game, p)?
    };
    let mut next = p.clone();
    let mut s = state.clone();
    s.t += 1;
    match kind {
        Adaptive::Adam => {
            adam_player(&mut next.x, &mut s.m_x, &mut s.v_x, &dx, config, s.t)?;
            adam_player(&mut next.y, &mut s.m_y, &mut s.v_y, &dy, config, s.t)?;
        }
        Adaptive::Rmsprop => {
            rmsprop_player(&mut next.x, &mut s.v_x, &dx, config.beta1, config)?;
            rmsprop_player(&mut next.y, &mut s.v_y, &dy, config.beta2, config)?;
        }
    }
    s.prev = p.clone();
    Ok((next, s))
}

/// ADAM on the corrected gradients, with bias correction.
pub fn step_acom_adam(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    state: &OptimizerState,
) -> Result<(JointPoint, OptimizerState), OptimError> {
    adaptive_step(game, config, p, state, true, Adaptive::Adam)
}

/// RMSprop on the corrected gradients; `β₁` decays `v_x`, `β₂` decays `v_y`.
pub fn step_acom_rmsprop(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    state: &OptimizerState,
) -> Result<(JointPoint, OptimizerState), OptimError> {
    adaptive_step(game, config, p, state, true, Adaptive::Rmsprop)
}

pub fn step_adam(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    state: &OptimizerState,
) -> Result<(JointPoint, OptimizerState), OptimError> {
    adaptive_step(game, config, p, state, false, Adaptive::Adam)
}

pub fn step_rmsprop(
    game: &dyn GameOracle,
    config: &OptimizerConfig,
    p: &JointPoint,
    state: &OptimizerState,
) -> Result<(JointPoint, OptimizerState), OptimError> {
    adaptive_step(game, config, p, state, false, Adaptive::Rmsprop)
}
