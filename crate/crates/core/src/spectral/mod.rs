//! Local convergence analysis of the update rules as fixed-point maps.
//!
//! A rule is viewed as `s ↦ F(s)` on its full state `s`. At a fixed point
//! `F′ = I + hA`, and the iteration converges locally at a linear rate when
//! the spectral radius of `F′` is below one. Every matrix built here is the
//! Jacobian of the map the steppers in [`crate::optim`] actually apply, so
//! both players descend their own loss.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{vector_field_norm, DenseBlocks, GameError, GameOracle, JointPoint};
use crate::linalg::{eigenvalues, DenseMatrix, LinalgError};
use crate::optim::{OptimError, OptimizerConfig, Rule};

/// Extremal-eigenvalue tolerance for semi-definiteness.
pub const DEFINITENESS_TOL: f64 = 1e-10;
/// Largest asymmetry accepted in a diagonal block.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("spectral analysis requires a zero-sum game, `{0}` is not")]
    NotZeroSum(&'static str),
    #[error("dense blocks unavailable for m={m}, n={n}")]
    NoDenseBlocks { m: usize, n: usize },
    #[error("{what} is not symmetric (max asymmetry {asymmetry:e})")]
    AsymmetricBlock { what: &'static str, asymmetry: f64 },
    #[error("rule {0} has no fixed-point analysis (supported: GDA, ACOM_RMSPROP, ACOM_ADAM)")]
    UnsupportedRule(Rule),
    #[error(transparent)]
    Config(#[from] OptimError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How the previous-step displacement `Δ = p − p_prev` enters the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Linearization {
    /// `p_prev` is part of the state, so `Δ` is differentiated too.
    #[default]
    WithHistory,
    /// `Δ` is held at its fixed-point value zero.
    FrozenDelta,
}

/// The map whose Jacobian a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzedMap {
    /// `p ↦ p − hV(p)`
    Gda,
    /// `(p, p_prev, v)`, `v ← (1−β)v + βD²`, `p ← p − hD/√(v+ε)`
    RmspropWithHistory,
    /// `(p, v)` with `Δ = 0`
    RmspropFrozenDelta,
    /// `(p, p_prev, m, v)`, `m ← (1−β₁)m + β₁D`, `v ← (1−β₂)v + β₂D²`,
    /// `p ← p − h·m/√(v+ε)` with the previous `m`; no bias correction
    AdamWithHistory,
    /// `(p, m, v)` with `Δ = 0`
    AdamFrozenDelta,
}

/// Largest step size keeping every `1 + hλ` inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum HBound {
    Finite(f64),
    /// No eigenvalues at all.
    Unbounded,
    /// Some eigenvalue has `Re λ ≥ 0`.
    Undefined,
}

impl HBound {
    pub fn value(self) -> Option<f64> {
        match self {
            HBound::Finite(h) => Some(h),
            HBound::Unbounded => Some(f64::INFINITY),
            HBound::Undefined => None,
        }
    }
}

/// `min over λ of (1/|Re λ|)·2/(1 + (Im λ/Re λ)²)`; for `Re λ < 0` this is
/// the largest `h` with `|1 + hλ| < 1`.
pub fn h_bound(eigs: &[Complex64]) -> HBound {
    if eigs.iter().any(|l| !(l.re < 0.0)) {
        return HBound::Undefined;
    }
    eigs.iter()
        .map(|l| {
            let ratio = l.im / l.re;
            (1.0 / l.re.abs()) * 2.0 / (1.0 + ratio * ratio)
        })
        .reduce(f64::min)
        .map_or(HBound::Unbounded, HBound::Finite)
}

/// `max |1 + hλ|`, zero for an empty spectrum.
pub fn spectral_radius(eigs: &[Complex64], h: f64) -> f64 {
    eigs.iter()
        .map(|l| (Complex64::new(1.0, 0.0) + h * l).norm())
        .fold(0.0, f64::max)
}

fn zero_sum_blocks(game: &dyn GameOracle, p: &JointPoint) -> Result<DenseBlocks, SpectralError> {
    if !game.is_zero_sum() {
        return Err(SpectralError::NotZeroSum(game.name()));
    }
    crate::games::check_dims(game, p)?;
    let (m, n) = game.dims();
    game.dense_blocks(p)
        .ok_or(SpectralError::NoDenseBlocks { m, n })
}

fn vprime_from(b: &DenseBlocks) -> DenseMatrix {
    let (m, n) = (b.xx_f.rows(), b.yy_g.rows());
    let mut v = DenseMatrix::zeros(m + n, m + n);
    v.set_block(0, 0, &b.xx_f);
    v.set_block(0, m, &b.xy_f);
    v.set_block(m, 0, &b.yx_f.scaled(-1.0));
    v.set_block(m, m, &b.yy_g);
    v
}

/// `blockdiag(D²xx f, D²yy g)`, the part of `V′` the correction term uses.
fn diagonal_part(b: &DenseBlocks) -> DenseMatrix {
    let (m, n) = (b.xx_f.rows(), b.yy_g.rows());
    let mut d = DenseMatrix::zeros(m + n, m + n);
    d.set_block(0, 0, &b.xx_f);
    d.set_block(m, m, &b.yy_g);
    d
}

/// `V′ = [[D²xx f, D²xy f], [−D²yx f, −D²yy f]]`, the Jacobian of
/// `V = (∇x f, ∇y g)` for a zero-sum game.
pub fn assemble_vprime(game: &dyn GameOracle, p: &JointPoint) -> Result<DenseMatrix, SpectralError> {
    Ok(vprime_from(&zero_sum_blocks(game, p)?))
}

/// Definiteness of `V′`, `D²xx f` and `D²yy f`. `V′` is semi-definite when
/// its symmetric part is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NashConditions {
    pub vprime_nsd: bool,
    pub dxx_nsd: bool,
    pub dyy_psd: bool,
}

impl NashConditions {
    /// `vprime_nsd ⟺ (dxx_nsd ∧ dyy_psd)`
    pub fn biconditional_holds(&self) -> bool {
        self.vprime_nsd == (self.dxx_nsd && self.dyy_psd)
    }
}

fn symmetric_eigs(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let mut e: Vec<f64> = eigenvalues(m)?.into_iter().map(|l| l.re).collect();
    e.sort_by(|a, b| a.total_cmp(b));
    Ok(e)
}

fn check_symmetric(what: &'static str, m: &DenseMatrix) -> Result<(), SpectralError> {
    match m.asymmetry() {
        Some(a) if a > SYMMETRY_TOL => Err(SpectralError::AsymmetricBlock { what, asymmetry: a }),
        _ => Ok(()),
    }
}

fn max_or_zero(e: &[f64]) -> f64 {
    e.last().copied().unwrap_or(0.0)
}

fn min_or_zero(e: &[f64]) -> f64 {
    e.first().copied().unwrap_or(0.0)
}

pub fn check_nash_conditions(
    game: &dyn GameOracle,
    p: &JointPoint,
) -> Result<NashConditions, SpectralError> {
    let b = zero_sum_blocks(game, p)?;
    nash_from(&b)
}

fn nash_from(b: &DenseBlocks) -> Result<NashConditions, SpectralError> {
    check_symmetric("D²xx f", &b.xx_f)?;
    check_symmetric("D²yy g", &b.yy_g)?;
    let dxx = symmetric_eigs(&b.xx_f)?;
    let dyy_f = symmetric_eigs(&b.yy_g.scaled(-1.0))?;
    let sym = symmetric_eigs(&vprime_from(b).symmetric_part())?;
    Ok(NashConditions {
        vprime_nsd: max_or_zero(&sym) <= DEFINITENESS_TOL,
        dxx_nsd: max_or_zero(&dxx) <= DEFINITENESS_TOL,
        dyy_psd: min_or_zero(&dyy_f) >= -DEFINITENESS_TOL,
    })
}

/// `A = −V′` for `p ↦ p − hV(p)`.
pub fn build_a_gda(game: &dyn GameOracle, p: &JointPoint) -> Result<DenseMatrix, SpectralError> {
    Ok(assemble_vprime(game, p)?.scaled(-1.0))
}

/// Per-coordinate decay: `β₁` on the `m` coordinates of `x`, `β₂` on `y`.
fn decay_diag(m: usize, n: usize, beta1: f64, beta2: f64, h: f64) -> DenseMatrix {
    let mut d = vec![-beta1 / h; m];
    d.extend(std::iter::repeat_n(-beta2 / h, n));
    DenseMatrix::from_diagonal(&d)
}

/// Hyperparameters entering `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    pub beta1: f64,
    pub beta2: f64,
    pub h: f64,
    pub eps: f64,
}

impl From<&OptimizerConfig> for MapParams {
    fn from(c: &OptimizerConfig) -> Self {
        MapParams {
            beta1: c.beta1,
            beta2: c.beta2,
            h: c.lr,
            eps: c.eps,
        }
    }
}

/// `A` for ACOM with RMSprop at a fixed point (`D = 0`, `v = 0`).
///
/// With history, on `(p, p_prev, v)`:
/// `[[−(V′+D)/√ε, D/√ε, 0], [I/h, −I/h, 0], [0, 0, −β/h]]`,
/// where `D = blockdiag(D²xx f, D²yy g)`. Frozen, on `(p, v)`:
/// `[[−V′/√ε, 0], [0, −β/h]]`.
pub fn build_a_rmsprop(
    game: &dyn GameOracle,
    p: &JointPoint,
    params: MapParams,
    model: Linearization,
) -> Result<DenseMatrix, SpectralError> {
    let b = zero_sum_blocks(game, p)?;
    Ok(a_rmsprop(&b, params, model))
}

fn a_rmsprop(b: &DenseBlocks, params: MapParams, model: Linearization) -> DenseMatrix {
    let (m, n) = (b.xx_f.rows(), b.yy_g.rows());
    let k = m + n;
    let s = 1.0 / params.eps.sqrt();
    let vp = vprime_from(b);
    let decay = decay_diag(m, n, params.beta1, params.beta2, params.h);
    match model {
        Linearization::FrozenDelta => {
            let mut a = DenseMatrix::zeros(2 * k, 2 * k);
            a.set_block(0, 0, &vp.scaled(-s));
            a.set_block(k, k, &decay);
            a
        }
        Linearization::WithHistory => {
            let d = diagonal_part(b);
            let inv_h = DenseMatrix::identity(k).scaled(1.0 / params.h);
            let mut a = DenseMatrix::zeros(3 * k, 3 * k);
            a.set_block(0, 0, &vp.add(&d).scaled(-s));
            a.set_block(0, k, &d.scaled(s));
            a.set_block(k, 0, &inv_h);
            a.set_block(k, k, &inv_h.scaled(-1.0));
            a.set_block(2 * k, 2 * k, &decay);
            a
        }
    }
}

/// `A` for ACOM with ADAM-style moments at a fixed point (`D = m = v = 0`).
///
/// With history, on `(p, p_prev, m, v)`:
/// `[[0, 0, −I/√ε, 0], [I/h, −I/h, 0, 0], [β₁(V′+D)/h, −β₁D/h, −β₁I/h, 0], [0, 0, 0, −β₂/h]]`.
/// Frozen, on `(p, m, v)`: `[[0, −I/√ε, 0], [β₁V′/h, −β₁I/h, 0], [0, 0, −β₂/h]]`.
pub fn build_a_adam(
    game: &dyn GameOracle,
    p: &JointPoint,
    params: MapParams,
    model: Linearization,
) -> Result<DenseMatrix, SpectralError> {
    let b = zero_sum_blocks(game, p)?;
    Ok(a_adam(&b, params, model))
}

fn a_adam(b: &DenseBlocks, params: MapParams, model: Linearization) -> DenseMatrix {
    let (m, n) = (b.xx_f.rows(), b.yy_g.rows());
    let k = m + n;
    let s = 1.0 / params.eps.sqrt();
    let b1h = params.beta1 / params.h;
    let vp = vprime_from(b);
    let eye = DenseMatrix::identity(k);
    let v_decay = DenseMatrix::identity(k).scaled(-params.beta2 / params.h);
    match model {
        Linearization::FrozenDelta => {
            let mut a = DenseMatrix::zeros(3 * k, 3 * k);
            a.set_block(0, k, &eye.scaled(-s));
            a.set_block(k, 0, &vp.scaled(b1h));
            a.set_block(k, k, &eye.scaled(-b1h));
            a.set_block(2 * k, 2 * k, &v_decay);
            a
        }
        Linearization::WithHistory => {
            let d = diagonal_part(b);
            let inv_h = eye.scaled(1.0 / params.h);
            let mut a = DenseMatrix::zeros(4 * k, 4 * k);
            a.set_block(0, 2 * k, &eye.scaled(-s));
            a.set_block(k, 0, &inv_h);
            a.set_block(k, k, &inv_h.scaled(-1.0));
            a.set_block(2 * k, 0, &vp.add(&d).scaled(b1h));
            a.set_block(2 * k, k, &d.scaled(-b1h));
            a.set_block(2 * k, 2 * k, &eye.scaled(-b1h));
            a.set_block(3 * k, 3 * k, &v_decay);
            a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub linearization: Linearization,
    /// `‖V(p)‖` above this marks the report as off-equilibrium. `None`
    /// means `1e−8·(1 + ‖p‖)`.
    pub stat_tol: Option<f64>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            linearization: Linearization::WithHistory,
            stat_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub game: String,
    pub rule: Rule,
    pub analyzed_map: AnalyzedMap,
    pub h_used: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub point: JointPoint,
    /// `‖V(p)‖`
    pub stationarity_residual: f64,
    pub at_fixed_point: bool,
    /// Eigenvalues of `V′`, `[re, im]` pairs.
    pub eigs_vprime: Vec<Complex64>,
    pub eigs_dxx: Vec<f64>,
    /// Eigenvalues of `D²yy f`.
    pub eigs_dyy: Vec<f64>,
    pub eigs_a: Vec<Complex64>,
    /// `max |1 + hλ|` over `eigs_a`, also the predicted linear rate.
    pub spectral_radius_f: f64,
    pub h_bound: HBound,
    pub certified: bool,
    pub nash: NashConditions,
    pub warnings: Vec<String>,
}

/// [`certify_with`] using the default options.
pub fn certify(
    game: &dyn GameOracle,
    p: &JointPoint,
    config: &OptimizerConfig,
) -> Result<SpectralReport, SpectralError> {
    certify_with(game, p, config, &SpectralOptions::default())
}

/// Builds `A` for `config.rule` at `p`, with `h = config.lr`, and checks
/// whether the spectral radius of `I + hA` is below one.
pub fn certify_with(
    game: &dyn GameOracle,
    p: &JointPoint,
    config: &OptimizerConfig,
    options: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    config.validate()?;
    if !matches!(config.rule, Rule::Gda | Rule::AcomRmsprop | Rule::AcomAdam) {
        return Err(SpectralError::UnsupportedRule(config.rule));
    }
    let blocks = zero_sum_blocks(game, p)?;
    let params = MapParams::from(config);
    let (a, analyzed_map) = match (config.rule, options.linearization) {
        (Rule::Gda, _) => (vprime_from(&blocks).scaled(-1.0), AnalyzedMap::Gda),
        (Rule::AcomRmsprop, Linearization::WithHistory) => (
            a_rmsprop(&blocks, params, Linearization::WithHistory),
            AnalyzedMap::RmspropWithHistory,
        ),
        (Rule::AcomRmsprop, Linearization::FrozenDelta) => (
            a_rmsprop(&blocks, params, Linearization::FrozenDelta),
            AnalyzedMap::RmspropFrozenDelta,
        ),
        (Rule::AcomAdam, Linearization::WithHistory) => (
            a_adam(&blocks, params, Linearization::WithHistory),
            AnalyzedMap::AdamWithHistory,
        ),
        (_, _) => (
            a_adam(&blocks, params, Linearization::FrozenDelta),
            AnalyzedMap::AdamFrozenDelta,
        ),
    };

    let eigs_a = eigenvalues(&a)?;
    let spectral_radius_f = spectral_radius(&eigs_a, config.lr);
    let eigs_vprime = eigenvalues(&vprime_from(&blocks))?;
    let eigs_dxx = symmetric_eigs(&blocks.xx_f)?;
    let eigs_dyy = symmetric_eigs(&blocks.yy_g.scaled(-1.0))?;
    let nash = nash_from(&blocks)?;

    let residual = vector_field_norm(game, p);
    let tol = options.stat_tol.unwrap_or(1e-8 * (1.0 + p.norm()));
    let at_fixed_point = residual <= tol;
    let mut warnings = Vec::new();
    if !at_fixed_point {
        warnings.push(format!(
            "‖V(p)‖ = {residual:e} exceeds {tol:e}; A describes the map only at a fixed point"
        ));
    }
    if config.rule == Rule::AcomAdam {
        warnings.push(
            "ADAM analysis uses the smooth map without bias correction; the stepper applies it"
                .to_string(),
        );
    }

    Ok(SpectralReport {
        game: game.name().to_string(),
        rule: config.rule,
        analyzed_map,
        h_used: config.lr,
        beta1: config.beta1,
        beta2: config.beta2,
        eps: config.eps,
        point: p.clone(),
        stationarity_residual: residual,
        at_fixed_point,
        eigs_vprime,
        eigs_dxx,
        eigs_dyy,
        h_bound: h_bound(&eigs_a),
        certified: spectral_radius_f < 1.0,
        spectral_radius_f,
        eigs_a,
        nash,
        warnings,
    })
}
