mod common;

use acom::games::{
    bilinear_game, dirac_gan_game, quadratic_game, GameOracle, GeneratorLoss, JointPoint, MlpGan,
    MlpGanConfig, QuadraticGame,
};
use acom::harness::{run_trajectory, RunOptions};
use acom::linalg::{self, cg_solve, eigenvalues, lu_solve, relative_error, DenseMatrix, LuDecomposition};
use acom::optim::{
    step, step_adam, step_acom_adam, step_cgd, step_conopt, step_gda, step_ogda, step_sga,
    OptimizerConfig, OptimizerState, Rule,
};
use acom::spectral::{assemble_vprime, certify, check_nash_conditions, HBound};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

fn zoo(seed: u64) -> Vec<Box<dyn GameOracle>> {
    let mut r = rng(seed);
    vec![
        Box::new(bilinear_game(normal_matrix(&mut r, 3, 2)).unwrap()),
        Box::new(random_quadratic(&mut r, 2, 3)),
        Box::new(dirac_gan_game()),
        Box::new(
            MlpGan::new(MlpGanConfig {
                seed,
                hidden: 3,
                batch_size: 4,
                ..MlpGanConfig::default()
            })
            .unwrap(),
        ),
        Box::new(
            MlpGan::new(MlpGanConfig {
                seed,
                hidden: 2,
                batch_size: 3,
                generator_loss: GeneratorLoss::ZeroSum,
                ..MlpGanConfig::default()
            })
            .unwrap(),
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn mixed_blocks_are_adjoint(seed in any::<u64>()) {
        let mut r = rng(seed);
        for game in zoo(seed) {
            let (m, n) = game.dims();
            for _ in 0..5 {
                let p = random_point(&mut r, m, n);
                let u = normal_vec(&mut r, m);
                let v = normal_vec(&mut r, n);
                let a = linalg::dot(&u, &game.hvp_xy(&p, &v));
                let b = linalg::dot(&v, &game.hvp_yx(&p, &u));
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{}: {a} vs {b}", game.name());
                let u2 = normal_vec(&mut r, m);
                let a = linalg::dot(&u2, &game.hvp_xx(&p, &u));
                let b = linalg::dot(&u, &game.hvp_xx(&p, &u2));
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} xx", game.name());
                let v2 = normal_vec(&mut r, n);
                let a = linalg::dot(&v2, &game.hvp_yy(&p, &v));
                let b = linalg::dot(&v, &game.hvp_yy(&p, &v2));
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} yy", game.name());
            }
        }
    }

    #[test]
    fn zero_sum_losses_negate(seed in any::<u64>()) {
        let mut r = rng(seed);
        for game in zoo(seed).into_iter().filter(|g| g.is_zero_sum()) {
            let (m, n) = game.dims();
            let p = random_point(&mut r, m, n);
            prop_assert!((game.loss_y(&p) + game.loss_x(&p)).abs() <= 1e-12);
            let fd = acom::diff::fd_gradient(
                |y| game.loss_x(&JointPoint { x: p.x.clone(), y: y.to_vec() }),
                &p.y,
                acom::diff::default_gradient_step(&p.to_flat()),
            );
            let gy = linalg::scaled(-1.0, &game.grad_y(&p));
            prop_assert!(relative_error(&gy, &fd) <= 1e-5, "{}", game.name());
        }
    }

    #[test]
    fn dense_blocks_match_products(seed in any::<u64>()) {
        let mut r = rng(seed);
        for game in zoo(seed) {
            let (m, n) = game.dims();
            let p = random_point(&mut r, m, n);
            let b = game.dense_blocks(&p).unwrap();
            for j in 0..m {
                let mut e = vec![0.0; m];
                e[j] = 1.0;
                let col: Vec<f64> = (0..m).map(|i| b.xx_f[(i, j)]).collect();
                prop_assert!(linalg::norm_inf(&linalg::sub(&col, &game.hvp_xx(&p, &e))) <= 1e-10);
                let col: Vec<f64> = (0..n).map(|i| b.yx_f[(i, j)]).collect();
                prop_assert!(linalg::norm_inf(&linalg::sub(&col, &game.hvp_yx(&p, &e))) <= 1e-10);
            }
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let col: Vec<f64> = (0..n).map(|i| b.yy_g[(i, j)]).collect();
                prop_assert!(linalg::norm_inf(&linalg::sub(&col, &game.hvp_yy(&p, &e))) <= 1e-10);
                let col: Vec<f64> = (0..m).map(|i| b.xy_f[(i, j)]).collect();
                prop_assert!(linalg::norm_inf(&linalg::sub(&col, &game.hvp_xy(&p, &e))) <= 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn definiteness_biconditional(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, kind in 0usize..4) {
        let mut r = rng(seed);
        let (a_xx, a_yy) = match kind {
            0 => (definite_matrix(&mut r, m, -1.0, 0.0), definite_matrix(&mut r, n, 1.0, 0.0)),
            1 => (definite_matrix(&mut r, m, 1.0, 0.1), definite_matrix(&mut r, n, 1.0, 0.0)),
            2 => (definite_matrix(&mut r, m, -1.0, 0.1), definite_matrix(&mut r, n, -1.0, 0.1)),
            _ => (symmetric_matrix(&mut r, m), symmetric_matrix(&mut r, n)),
        };
        let g = quadratic_game(a_xx, a_yy, normal_matrix(&mut r, m, n), vec![0.0; m], vec![0.0; n]).unwrap();
        let c = check_nash_conditions(&g, &JointPoint::zeros(m, n)).unwrap();
        prop_assert!(c.biconditional_holds(), "{c:?}");
        if kind == 0 {
            prop_assert!(c.vprime_nsd);
        }
    }

    #[test]
    fn eigenvalues_reproduce_determinant_and_trace(seed in any::<u64>(), n in 1usize..20) {
        let mut r = rng(seed);
        let a = normal_matrix(&mut r, n, n);
        let eigs = eigenvalues(&a).unwrap();
        prop_assert_eq!(eigs.len(), n);
        let prod = eigs.iter().fold(Complex64::new(1.0, 0.0), |acc, l| acc * l);
        let det = LuDecomposition::new(&a).map(|lu| lu.determinant()).unwrap_or(0.0);
        prop_assert!((prod.re - det).abs() <= 1e-8 * (1.0 + det.abs()), "{prod} vs {det}");
        prop_assert!(prod.im.abs() <= 1e-8 * (1.0 + det.abs()));
        let sum: f64 = eigs.iter().map(|l| l.re).sum();
        prop_assert!((sum - a.trace()).abs() <= 1e-8 * (1.0 + a.trace().abs()));
        // Conjugate pairs are exact mirrors.
        for l in eigs.iter().filter(|l| l.im != 0.0) {
            prop_assert!(eigs.iter().any(|k| k.re == l.re && k.im == -l.im));
        }
    }

    #[test]
    fn cg_agrees_with_lu(seed in any::<u64>(), n in 1usize..50) {
        let mut r = rng(seed);
        let a = definite_matrix(&mut r, n, 1.0, 0.5);
        let rhs = normal_vec(&mut r, n);
        let cg = cg_solve(|v| a.matvec(v), &rhs, 1e-12, 10 * n).unwrap();
        let lu = lu_solve(&a, &rhs).unwrap();
        prop_assert!(relative_error(&cg.x, &lu) <= 1e-8);
    }

    #[test]
    fn gamma_zero_collapses_to_gda(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_quadratic(&mut r, 3, 2);
        let p = random_point(&mut r, 3, 2);
        let c = OptimizerConfig { gamma: 0.0, ..OptimizerConfig::defaults(Rule::Sga) };
        let gda = step_gda(&g, &c, &p).unwrap();
        prop_assert_eq!(&step_sga(&g, &c, &p).unwrap(), &gda);
        prop_assert_eq!(&step_conopt(&g, &c, &p).unwrap(), &gda);
        prop_assert_eq!(&step_ogda(&g, &c, &p).unwrap(), &gda);
    }

    #[test]
    fn uncoupled_cgd_is_gda(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = quadratic_game(
            symmetric_matrix(&mut r, 3),
            symmetric_matrix(&mut r, 2),
            DenseMatrix::zeros(3, 2),
            normal_vec(&mut r, 3),
            normal_vec(&mut r, 2),
        ).unwrap();
        let p = random_point(&mut r, 3, 2);
        let c = OptimizerConfig::defaults(Rule::Cgd);
        prop_assert_eq!(step_cgd(&g, &c, &p).unwrap().point, step_gda(&g, &c, &p).unwrap());
    }

    #[test]
    fn acom_on_bilinear_is_adam(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = bilinear_game(normal_matrix(&mut r, 2, 3)).unwrap();
        let mut p = random_point(&mut r, 2, 3);
        let c = OptimizerConfig::defaults(Rule::AcomAdam);
        let (mut sa, mut sb) = (OptimizerState::new(&p), OptimizerState::new(&p));
        for _ in 0..10 {
            let (pa, na) = step_acom_adam(&g, &c, &p, &sa).unwrap();
            let (pb, nb) = step_adam(&g, &c, &p, &sb).unwrap();
            prop_assert_eq!(&pa, &pb);
            p = pa;
            sa = na;
            sb = nb;
        }
    }

    #[test]
    fn second_moments_stay_nonnegative(seed in any::<u64>(), rule in prop::sample::select(vec![
        Rule::Adam, Rule::Rmsprop, Rule::AcomAdam, Rule::AcomRmsprop,
    ])) {
        let mut r = rng(seed);
        let g = random_quadratic(&mut r, 2, 2);
        let mut p = random_point(&mut r, 2, 2);
        let c = OptimizerConfig::defaults(rule).with_lr(1e-2);
        let mut s = OptimizerState::new(&p);
        for _ in 0..20 {
            let out = step(&g, &c, &p, &s).unwrap();
            prop_assert!(out.state.v_x.iter().chain(&out.state.v_y).all(|&v| v >= 0.0));
            p = out.point;
            s = out.state;
        }
    }

    #[test]
    fn gda_dilates_bilinear_norm(seed in any::<u64>(), alpha in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let g = bilinear_game(DenseMatrix::identity(1)).unwrap();
        let p = random_point(&mut r, 1, 1);
        let next = step_gda(&g, &OptimizerConfig::defaults(Rule::Gda).with_lr(alpha), &p).unwrap();
        let expected = (1.0 + alpha * alpha) * p.norm().powi(2);
        prop_assert!((next.norm().powi(2) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn fd_hvp_is_linear_on_quadratics(seed in any::<u64>(), scale in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = random_quadratic(&mut r, 3, 2);
        let p = random_point(&mut r, 3, 2);
        let u = unit_vec(&mut r, 3);
        let grad = |x: &[f64]| g.grad_x(&JointPoint { x: x.to_vec(), y: p.y.clone() });
        let h = acom::diff::default_hvp_step(&p.to_flat());
        let a = acom::diff::fd_hvp(grad, &p.x, &linalg::scaled(scale, &u), h);
        let b = linalg::scaled(scale, &acom::diff::fd_hvp(grad, &p.x, &u, h));
        prop_assert!(linalg::norm2(&linalg::sub(&a, &b)) <= 1e-8 * (1e-12 + linalg::norm2(&b)) + 1e-12);
    }

    #[test]
    fn bound_is_tight_for_gda(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = stable_quadratic(&mut r, 2, 2);
        let eq = g.equilibrium().unwrap();
        let base = OptimizerConfig::defaults(Rule::Gda);
        let bound = match certify(&g, &eq, &base).unwrap().h_bound {
            HBound::Finite(h) => h,
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        };
        prop_assert!(certify(&g, &eq, &base.with_lr(bound * (1.0 - 1e-3))).unwrap().certified);
        prop_assert!(!certify(&g, &eq, &base.with_lr(bound * (1.0 + 1e-3))).unwrap().certified);
    }

    #[test]
    fn scalar_vprime_spectrum_is_analytic(a in -3.0f64..3.0, c in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = QuadraticGame::scalar(a, c, b).unwrap();
        let e = eigenvalues(&assemble_vprime(&g, &JointPoint::zeros(1, 1)).unwrap()).unwrap();
        // V′ = [[a, b], [−b, −c]]: λ² − (a − c)λ + (b² − ac) = 0.
        let tr = a - c;
        let det = b * b - a * c;
        let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let roots = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        for root in roots {
            prop_assert!(e.iter().any(|l| (l - root).norm() <= 1e-8 * (1.0 + root.norm())), "{e:?} vs {roots:?}");
        }
    }
}

#[test]
fn identical_runs_are_bitwise_identical() {
    let game = MlpGan::new(MlpGanConfig {
        hidden: 4,
        ..MlpGanConfig::default()
    })
    .unwrap();
    for rule in Rule::ALL {
        let c = OptimizerConfig::defaults(rule);
        let opts = RunOptions {
            max_steps: 15,
            ..RunOptions::default()
        };
        let a = run_trajectory(&game, &c, &game.default_point(), &opts).unwrap();
        let b = run_trajectory(&game, &c, &game.default_point(), &opts).unwrap();
        let strip = |t: &acom::harness::Trajectory| {
            t.records
                .iter()
                .map(|r| (r.t, r.loss_x.to_bits(), r.loss_y.to_bits(), r.point_norm.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b), "{rule}");
        assert_eq!(a.summary.final_point, b.summary.final_point);
    }
}
