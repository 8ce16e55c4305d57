//! Acceptance criteria, run sequentially with one PASS/FAIL line each.
//!
//! `cargo test -p acom --test acceptance -- --nocapture`

mod common;

use std::time::{Duration, Instant};

use acom::diff::{default_gradient_step, default_hvp_step, fd_gradient, fd_hvp};
use acom::games::{
    bilinear_game, dirac_gan_game, quadratic_game, GameOracle, JointPoint, MlpGan, MlpGanConfig,
    QuadraticGame,
};
use acom::harness::{
    bench, critical_step_size, relative_grid, run_trajectory, sweep, BenchOptions, RunOptions,
    SweepOptions, DEFAULT_GRID_FACTORS,
};
use acom::linalg::{self, lu_solve, relative_error, DenseMatrix};
use acom::optim::{
    acom_corrected_gradient, step, step_acom_adam, step_acom_rmsprop, step_cgd, OptimizerConfig,
    OptimizerState, Rule,
};
use acom::spectral::{check_nash_conditions, h_bound, HBound, Linearization};
use num_complex::Complex64;

use common::*;

type Verdict = (bool, String);

/// Worst relative errors of the gradients and the four second-derivative
/// blocks against central differences over `points`.
fn derivative_errors(game: &dyn GameOracle, points: &[JointPoint], seed: u64) -> (f64, f64) {
    let mut rng = rng(seed);
    let (m, _) = game.dims();
    let (mut grad_err, mut hvp_err) = (0.0f64, 0.0f64);
    for p in points {
        let flat = p.to_flat();
        let gs = default_gradient_step(&flat);
        let hs = default_hvp_step(&flat);
        let with_x = |x: &[f64]| JointPoint { x: x.to_vec(), y: p.y.clone() };
        let with_y = |y: &[f64]| JointPoint { x: p.x.clone(), y: y.to_vec() };

        let fd_gx = fd_gradient(|x| game.loss_x(&with_x(x)), &p.x, gs);
        let fd_gy = fd_gradient(|y| game.loss_y(&with_y(y)), &p.y, gs);
        grad_err = grad_err
            .max(relative_error(&game.grad_x(p), &fd_gx))
            .max(relative_error(&game.grad_y(p), &fd_gy));

        let u = unit_vec(&mut rng, m);
        let v = unit_vec(&mut rng, p.y.len());
        let checks = [
            (game.hvp_xx(p, &u), fd_hvp(|x| game.grad_x(&with_x(x)), &p.x, &u, hs)),
            (game.hvp_yy(p, &v), fd_hvp(|y| game.grad_y(&with_y(y)), &p.y, &v, hs)),
            (game.hvp_xy(p, &v), fd_hvp(|y| game.grad_x(&with_y(y)), &p.y, &v, hs)),
            (game.hvp_yx(p, &u), fd_hvp(|x| game.grad_y_of_f(&with_x(x)), &p.x, &u, hs)),
            (game.hvp_xy_g(p, &v), fd_hvp(|y| game.grad_x_of_g(&with_y(y)), &p.y, &v, hs)),
            (game.hvp_yx_g(p, &u), fd_hvp(|x| game.grad_y(&with_x(x)), &p.x, &u, hs)),
        ];
        for (exact, fd) in checks {
            hvp_err = hvp_err.max(relative_error(&exact, &fd));
        }
    }
    (grad_err, hvp_err)
}

fn c1_derivative_fidelity() -> Verdict {
    let start = Instant::now();
    let mut r = rng(1);
    let mut ok = true;
    let mut notes = Vec::new();

    let bilinear = bilinear_game(normal_matrix(&mut r, 3, 2)).unwrap();
    let quadratic = random_quadratic(&mut r, 3, 2);
    let dirac = dirac_gan_game();
    let mlp = MlpGan::new(MlpGanConfig::default()).unwrap();
    let games: [(&dyn GameOracle, f64); 4] =
        [(&bilinear, 1e-4), (&quadratic, 1e-10), (&dirac, 1e-4), (&mlp, 1e-4)];
    for (i, (game, hvp_tol)) in games.into_iter().enumerate() {
        let (m, n) = game.dims();
        let points: Vec<JointPoint> = if game.name() == "mlp" {
            (0..50).map(|s| mlp.init_point(100 + s)).collect()
        } else {
            (0..50).map(|_| random_point(&mut r, m, n)).collect()
        };
        let (g, h) = derivative_errors(game, &points, 10 + i as u64);
        ok &= g <= 1e-5 && h <= hvp_tol;
        notes.push(format!("{} grad {g:.1e} hvp {h:.1e}", game.name()));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    (ok, format!("{}; {:.2}s (limit 10s)", notes.join(", "), elapsed.as_secs_f64()))
}

fn c2_taylor_exactness() -> Verdict {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g = random_quadratic(&mut r, 3, 4);
        let prev = random_point(&mut r, 3, 4);
        let p = random_point(&mut r, 3, 4);
        let (dx, dy) = acom_corrected_gradient(&g, &p, &prev).unwrap();
        let shift_x = JointPoint {
            x: linalg::sub(&linalg::scaled(2.0, &p.x), &prev.x),
            y: p.y.clone(),
        };
        let shift_y = JointPoint {
            x: p.x.clone(),
            y: linalg::sub(&linalg::scaled(2.0, &p.y), &prev.y),
        };
        worst = worst
            .max(scaled_error(&dx, &g.grad_x(&shift_x)))
            .max(scaled_error(&dy, &g.grad_y(&shift_y)));
    }
    (worst <= 1e-12, format!("max error {worst:.1e} over 50 games (tol 1e-12)"))
}

/// Jacobian of one step of `config` at `p` by central differences; exact up
/// to rounding for rules that are linear on quadratic games.
fn step_jacobian(game: &dyn GameOracle, config: &OptimizerConfig, p: &JointPoint) -> DenseMatrix {
    let (m, _) = game.dims();
    let flat = p.to_flat();
    let map = |q: &[f64]| {
        let q = JointPoint::from_flat(m, q);
        step(game, config, &q, &OptimizerState::new(&q)).unwrap().point.to_flat()
    };
    let k = flat.len();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            fd_hvp(map, &flat, &e, 1e-3)
        })
        .collect();
    DenseMatrix::from_fn(k, k, |i, j| cols[j][i])
}

fn c3_cycling_vs_consensus() -> Verdict {
    let b = bilinear_game(DenseMatrix::identity(1)).unwrap();
    let gda = OptimizerConfig::defaults(Rule::Gda).with_lr(0.1);
    let p0 = JointPoint::new(vec![1.0], vec![1.0]).unwrap();
    let opts = RunOptions { max_steps: 1000, record_every: 1000, ..RunOptions::default() };
    let tr = run_trajectory(&b, &gda, &p0, &opts).unwrap();
    let expected = 1.01f64.powi(500) * p0.norm();
    let got = tr.summary.final_point.norm();
    let growth_err = (got - expected).abs() / expected;

    let q = QuadraticGame::scalar(-1.0, 1.0, -1.0).unwrap();
    let conopt = OptimizerConfig { gamma: 1.0, ..OptimizerConfig::defaults(Rule::ConOpt) };
    let jac = step_jacobian(&q, &conopt.with_lr(1.0), &p0);
    // Step map is p + h·L·p, so L = J(h=1) − I.
    let l = jac.sub(&DenseMatrix::identity(2));
    let bound = h_bound(&linalg::eigenvalues(&l).unwrap());
    let h = bound.value().unwrap_or(0.0) * 0.5;
    let tr = run_trajectory(&q, &conopt.with_lr(h), &p0, &opts).unwrap();
    let final_norm = tr.summary.final_point.norm();

    let ok = growth_err <= 1e-6 && h > 0.0 && final_norm <= 1e-3;
    (
        ok,
        format!(
            "GDA ‖p_1000‖ {got:.6} vs {expected:.6} (rel {growth_err:.1e}); \
             ConOpt bound {bound:?}, h {h}, ‖p_1000‖ {final_norm:.1e}"
        ),
    )
}

fn c4_bound_values() -> Verdict {
    let pair = h_bound(&[Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)]);
    let real = h_bound(&[Complex64::new(-1.0, 0.0)]);
    let ok = matches!(pair, HBound::Finite(h) if (h - 1.0).abs() <= 1e-12)
        && matches!(real, HBound::Finite(h) if (h - 2.0).abs() <= 1e-12);
    (ok, format!("−1±i → {pair:?}, −1 → {real:?}"))
}

fn c5_certification_agreement() -> Verdict {
    let start = Instant::now();
    let mut r = rng(5);
    let games: Vec<QuadraticGame> = vec![
        QuadraticGame::scalar(1.0, -1.0, 1.0).unwrap(),
        stable_quadratic(&mut r, 2, 2),
        stable_quadratic(&mut r, 3, 2),
    ];
    let rules = [
        OptimizerConfig::defaults(Rule::Gda),
        OptimizerConfig { eps: 1.0, ..OptimizerConfig::defaults(Rule::AcomRmsprop) },
    ];
    let options = SweepOptions::default();
    let (mut cells, mut agree, mut rate_ok, mut certified) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for (gi, game) in games.iter().enumerate() {
        let eq = game.equilibrium().unwrap();
        for base in &rules {
            let Some(h_crit) =
                critical_step_size(game, &eq, base, Linearization::WithHistory).unwrap()
            else {
                failures.push(format!("game {gi} {} never certified", base.rule));
                continue;
            };
            let grid = relative_grid(h_crit, &DEFAULT_GRID_FACTORS);
            let rows = sweep(game, base, &grid, &options).unwrap();
            for (i, row) in rows.iter().enumerate() {
                if i == 5 {
                    continue;
                }
                cells += 1;
                agree += row.agree as usize;
                if !row.agree {
                    failures.push(format!("game {gi} {} h={:.4} disagrees", base.rule, row.h));
                }
                if row.certified_prediction {
                    certified += 1;
                    let rho = row.predicted_rate;
                    let in_band =
                        row.empirical_rate >= rho / 2.0 && row.empirical_rate <= (2.0 * rho).min(1.0);
                    rate_ok += in_band as usize;
                    if !in_band {
                        failures.push(format!(
                            "game {gi} {} h={:.4} rate {:.4} vs ρ {:.4}",
                            base.rule, row.h, row.empirical_rate, rho
                        ));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let frac = agree as f64 / cells.max(1) as f64;
    let ok = cells == 42 && frac >= 0.95 && rate_ok == certified && elapsed < Duration::from_secs(60);
    let mut detail = format!(
        "agreement {agree}/{cells} ({:.1}%), rates in band {rate_ok}/{certified}; {:.2}s (limit 60s)",
        100.0 * frac,
        elapsed.as_secs_f64()
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    (ok, detail)
}

fn c6_lemma_one() -> Verdict {
    let mut r = rng(6);
    let (mut holds, mut nsd_cases) = (0, 0);
    for i in 0..100 {
        let (m, n) = (1 + i % 4, 1 + (i / 4) % 3);
        // Cycle through definite, semi-definite and indefinite blocks so
        // both sides of the biconditional occur.
        let block = |r: &mut _, k: usize, sign: f64, kind: usize| match kind {
            0 => definite_matrix(r, k, sign, 0.1),
            1 => {
                let v = normal_vec(r, k);
                DenseMatrix::from_fn(k, k, |a, b| sign * v[a] * v[b])
            }
            _ => symmetric_matrix(r, k),
        };
        let a_xx = block(&mut r, m, -1.0, i % 3);
        let a_yy = block(&mut r, n, 1.0, (i / 3) % 3);
        let game = quadratic_game(
            a_xx,
            a_yy,
            normal_matrix(&mut r, m, n),
            normal_vec(&mut r, m),
            normal_vec(&mut r, n),
        )
        .unwrap();
        let c = check_nash_conditions(&game, &JointPoint::zeros(m, n)).unwrap();
        holds += c.biconditional_holds() as usize;
        nsd_cases += c.vprime_nsd as usize;
    }
    (
        holds == 100 && nsd_cases > 0 && nsd_cases < 100,
        format!("biconditional held in {holds}/100 games ({nsd_cases} with V′ NSD)"),
    )
}

fn c7_cgd_solve() -> Verdict {
    let mut r = rng(7);
    let game = stable_quadratic(&mut r, 25, 25);
    let p = random_point(&mut r, 25, 25);
    let cfg = OptimizerConfig {
        gamma: 0.3,
        eta: 0.5,
        ..OptimizerConfig::defaults(Rule::Cgd).with_lr(1.0)
    };
    let out = step_cgd(&game, &cfg, &p).unwrap();
    let dx = linalg::sub(&out.point.x, &p.x);
    let dy = linalg::sub(&out.point.y, &p.y);

    let bl = game.dense_blocks(&p).unwrap();
    let eta2 = cfg.eta * cfg.eta;
    let mx = DenseMatrix::identity(25).add(&bl.xy_f.matmul(&bl.yx_f).scaled(eta2));
    let gy_f = linalg::scaled(-1.0, &game.grad_y(&p));
    let mut inner = game.grad_x(&p);
    linalg::axpy(-cfg.gamma, &bl.xy_f.matvec(&gy_f), &mut inner);
    let lu_dx = lu_solve(&mx, &linalg::scaled(-1.0, &inner)).unwrap();
    let (yx_g, xy_g) = (bl.yx_f.scaled(-1.0), bl.xy_f.scaled(-1.0));
    let my = DenseMatrix::identity(25).add(&yx_g.matmul(&xy_g).scaled(eta2));
    let gx_g = linalg::scaled(-1.0, &game.grad_x(&p));
    let mut inner = game.grad_y(&p);
    linalg::axpy(-cfg.gamma, &yx_g.matvec(&gx_g), &mut inner);
    let lu_dy = lu_solve(&my, &linalg::scaled(-1.0, &inner)).unwrap();
    let err = relative_error(&dx, &lu_dx).max(relative_error(&dy, &lu_dy));

    let b = bilinear_game(DenseMatrix::identity(1)).unwrap();
    let scalar_cfg = OptimizerConfig {
        gamma: 0.1,
        eta: 0.1,
        ..OptimizerConfig::defaults(Rule::Cgd).with_lr(1.0)
    };
    let p1 = JointPoint::new(vec![1.0], vec![1.0]).unwrap();
    let scalar_dx = step_cgd(&b, &scalar_cfg, &p1).unwrap().point.x[0] - 1.0;
    let scalar_err = (scalar_dx - (-0.9 / 1.01)).abs();

    (
        err <= 1e-8 && scalar_err <= 1e-12,
        format!(
            "m=n=25 CG vs LU rel {err:.1e} ({} CG iterations); scalar Δx {scalar_dx:.9} (err {scalar_err:.1e})",
            out.cg_iterations
        ),
    )
}

fn c8_step_cost() -> Verdict {
    let game = MlpGan::new(MlpGanConfig { hidden: 16, ..MlpGanConfig::default() }).unwrap();
    let rules = [Rule::Gda, Rule::AcomAdam, Rule::ConOpt, Rule::Cgd];
    let configs: Vec<OptimizerConfig> = rules.iter().map(|&r| OptimizerConfig::defaults(r)).collect();
    let rows = bench(
        &game,
        &configs,
        &game.default_point(),
        &BenchOptions { steps: 500, warmup: 10 },
    )
    .unwrap();
    let mean = |i: usize| rows[i].mean_us;
    let (gda, acom, conopt, cgd) = (mean(0), mean(1), mean(2), mean(3));
    let ratios = [gda / acom, acom / conopt, acom / cgd];
    let ok = ratios.iter().all(|&q| q <= 0.95);
    (
        ok,
        format!(
            "mean µs GDA {gda:.0}, ACOM_ADAM {acom:.0}, CONOPT {conopt:.0}, CGD {cgd:.0} \
             (cg {:.1}/step); ratios {:.2} {:.2} {:.2} (need ≤ 0.95)",
            rows[3].mean_cg_iterations, ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn c9_fixed_point_identity() -> Verdict {
    let mut r = rng(9);
    let (m, n) = (3, 2);
    let a_xx = definite_matrix(&mut r, m, 1.0, 0.3);
    let a_yy = definite_matrix(&mut r, n, -1.0, 0.3);
    let b = normal_matrix(&mut r, m, n);
    let eq = random_point(&mut r, m, n);
    // Offsets built with the same operation order as the gradient, so the
    // gradient at `eq` is exactly zero.
    let mut gx = a_xx.matvec(&eq.x);
    linalg::axpy(1.0, &b.matvec(&eq.y), &mut gx);
    let mut gy = b.matvec_transposed(&eq.x);
    linalg::axpy(1.0, &a_yy.matvec(&eq.y), &mut gy);
    let game = quadratic_game(
        a_xx,
        a_yy,
        b,
        linalg::scaled(-1.0, &gx),
        linalg::scaled(-1.0, &gy),
    )
    .unwrap();
    let stationary = game.grad_x(&eq).iter().chain(&game.grad_y(&eq)).all(|&v| v == 0.0);

    let bits = |p: &JointPoint| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let state = OptimizerState::new(&eq);
    let (pa, _) = step_acom_adam(&game, &OptimizerConfig::defaults(Rule::AcomAdam), &eq, &state).unwrap();
    let (pr, _) =
        step_acom_rmsprop(&game, &OptimizerConfig::defaults(Rule::AcomRmsprop), &eq, &state).unwrap();
    let ok = stationary && bits(&pa) == bits(&eq) && bits(&pr) == bits(&eq);
    (
        ok,
        format!(
            "exact stationary point: {stationary}; ACOM_ADAM unchanged: {}; ACOM_RMSPROP unchanged: {}",
            bits(&pa) == bits(&eq),
            bits(&pr) == bits(&eq)
        ),
    )
}

fn c10_mlp_smoke() -> Verdict {
    let start = Instant::now();
    let game = MlpGan::new(MlpGanConfig::default()).unwrap();
    let cfg = OptimizerConfig::defaults(Rule::AcomAdam);
    let opts = RunOptions {
        max_steps: 2000,
        record_every: 1,
        threshold: f64::MIN_POSITIVE,
        snapshot_limit: 0,
    };
    let tr = match run_trajectory(&game, &cfg, &game.default_point(), &opts) {
        Ok(t) => t,
        Err(e) => return (false, format!("aborted: {e}")),
    };
    let finite = tr.summary.final_point.is_finite();
    let bounded = tr.records.iter().all(|r| {
        (0.0..=10.0).contains(&r.loss_x) && (0.0..=10.0).contains(&r.loss_y)
    });
    let (lo, hi) = tr.records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.loss_x).min(r.loss_y), hi.max(r.loss_x).max(r.loss_y))
    });
    let elapsed = start.elapsed();
    let ok = tr.summary.steps == 2000 && finite && bounded && elapsed < Duration::from_secs(300);
    (
        ok,
        format!(
            "{} steps (α={}, β₁={}, β₂={}, ε={}), losses in [{lo:.3}, {hi:.3}], finite {finite}; {:.1}s (limit 300s)",
            tr.summary.steps, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, elapsed.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("derivative fidelity", c1_derivative_fidelity),
        ("Taylor-update exactness", c2_taylor_exactness),
        ("GDA cycling vs ConOpt convergence", c3_cycling_vs_consensus),
        ("step-size bound values", c4_bound_values),
        ("certification-dynamics agreement", c5_certification_agreement),
        ("definiteness biconditional", c6_lemma_one),
        ("CGD correctness", c7_cgd_solve),
        ("per-step cost ordering", c8_step_cost),
        ("fixed-point identity", c9_fixed_point_identity),
        ("MLP GAN smoke test", c10_mlp_smoke),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        println!("{} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
