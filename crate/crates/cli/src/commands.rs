use acom::games::{GameSpec, JointPoint, GAME_IDS};
use acom::harness::{
    bench, critical_step_size, relative_grid, run_trajectory, sweep, BenchOptions, RunSummary,
};
use acom::optim::{OptimizerConfig, Rule};
use acom::spectral::{certify_with, SpectralOptions};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, SpectrumAt};
use crate::error::CliError;
use crate::output::{fmt_f64, OutputDir, PLOT_BENCH, PLOT_SPECTRUM, PLOT_SWEEP, PLOT_TRAJECTORY};

#[derive(Serialize)]
struct RunFile<'a> {
    game: &'a GameSpec,
    optimizer: &'a OptimizerConfig,
    seed: u64,
    start: &'a JointPoint,
    summary: &'a RunSummary,
}

fn start_point(config: &ExperimentConfig, game: &dyn acom::games::GameOracle) -> Result<JointPoint, CliError> {
    config
        .init
        .resolve(game, config.seed)
        .map_err(|e| CliError::from_harness(e, "init"))
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let (spec, game) = config.build_game()?;
    let opt = config.optimizer.resolve()?;
    let start = start_point(config, game.as_ref())?;
    let traj = run_trajectory(game.as_ref(), &opt, &start, &config.run_options())
        .map_err(|e| CliError::from_harness(e, "max_steps"))?;

    let (m, n) = game.dims();
    let snapshots = traj.records.first().is_some_and(|r| r.point.is_some());
    let mut header: Vec<String> = [
        "t",
        "loss_x",
        "loss_y",
        "grad_x_norm",
        "grad_y_norm",
        "point_norm",
        "step_us",
        "cg_iterations",
    ]
    .map(String::from)
    .to_vec();
    if snapshots {
        header.extend((0..m).map(|i| format!("x{i}")));
        header.extend((0..n).map(|j| format!("y{j}")));
    }
    let rows = traj.records.iter().map(|r| {
        let mut row = vec![
            r.t.to_string(),
            fmt_f64(r.loss_x),
            fmt_f64(r.loss_y),
            fmt_f64(r.grad_x_norm),
            fmt_f64(r.grad_y_norm),
            fmt_f64(r.point_norm),
            fmt_f64(r.step_us),
            r.cg_iterations.to_string(),
        ];
        if let Some(p) = &r.point {
            row.extend(p.x.iter().chain(&p.y).map(|v| fmt_f64(*v)));
        }
        row
    });

    let out = OutputDir::create(&config.output_dir)?;
    out.write_csv("trajectory.csv", &header, rows)?;
    out.write_json(
        "summary.json",
        &RunFile {
            game: &spec,
            optimizer: &opt,
            seed: config.seed,
            start: &start,
            summary: &traj.summary,
        },
    )?;
    out.write_bytes("plot_trajectory.py", PLOT_TRAJECTORY.as_bytes())?;
    let s = &traj.summary;
    println!(
        "run {} on {}: converged={} steps={} |V|={} mean_step_us={:.3}",
        s.rule,
        s.game,
        s.converged,
        s.steps,
        fmt_f64(s.final_vf_norm),
        s.mean_step_us
    );
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

fn complex_rows(name: &str, eigs: &[Complex64]) -> Vec<Vec<String>> {
    eigs.iter()
        .enumerate()
        .map(|(i, l)| vec![name.into(), i.to_string(), fmt_f64(l.re), fmt_f64(l.im)])
        .collect()
}

fn real_rows(name: &str, eigs: &[f64]) -> Vec<Vec<String>> {
    eigs.iter()
        .enumerate()
        .map(|(i, l)| vec![name.into(), i.to_string(), fmt_f64(*l), fmt_f64(0.0)])
        .collect()
}

pub fn spectrum(config: &ExperimentConfig) -> Result<(), CliError> {
    let (_, game) = config.build_game()?;
    let opt = config.optimizer.resolve()?;
    let initial = start_point(config, game.as_ref())?;
    let point = match config.spectrum.at {
        SpectrumAt::Equilibrium => game.equilibrium().unwrap_or(initial),
        SpectrumAt::Initial => initial,
    };
    let options = SpectralOptions {
        linearization: config.spectrum.linearization,
        stat_tol: None,
    };
    let report =
        certify_with(game.as_ref(), &point, &opt, &options).map_err(CliError::from_spectral)?;

    let out = OutputDir::create(&config.output_dir)?;
    out.write_json("spectrum.json", &report)?;
    let mut rows = complex_rows("vprime", &report.eigs_vprime);
    rows.extend(real_rows("dxx", &report.eigs_dxx));
    rows.extend(real_rows("dyy", &report.eigs_dyy));
    rows.extend(complex_rows("a", &report.eigs_a));
    let header = ["matrix", "index", "re", "im"].map(String::from);
    out.write_csv("eigenvalues.csv", &header, rows)?;
    out.write_bytes("plot_spectrum.py", PLOT_SPECTRUM.as_bytes())?;
    println!(
        "spectrum {} on {}: rho={} h_bound={:?} certified={}",
        report.rule,
        report.game,
        fmt_f64(report.spectral_radius_f),
        report.h_bound,
        report.certified
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

pub fn sweep_cmd(config: &ExperimentConfig) -> Result<(), CliError> {
    let (_, game) = config.build_game()?;
    let opt = config.optimizer.resolve()?;
    let h_values = match &config.sweep.h_values {
        Some(hs) => hs.clone(),
        None => {
            let eq = game.equilibrium().ok_or_else(|| CliError::Config {
                path: "game".into(),
                message: format!("game `{}` has no known equilibrium to sweep around", game.name()),
            })?;
            let h_crit = critical_step_size(game.as_ref(), &eq, &opt, config.sweep.linearization)
                .map_err(|e| CliError::from_harness(e, "sweep"))?
                .ok_or_else(|| CliError::Config {
                    path: "sweep.h_values".into(),
                    message: "no critical step size found, give explicit h_values".into(),
                })?;
            println!("critical step size {}", fmt_f64(h_crit));
            relative_grid(h_crit, &config.sweep.factors)
        }
    };
    let rows = sweep(game.as_ref(), &opt, &h_values, &config.sweep_options())
        .map_err(|e| CliError::from_harness(e, "sweep"))?;

    let header = [
        "h",
        "certified_prediction",
        "predicted_rate",
        "empirical_converged",
        "empirical_rate",
        "agree",
    ]
    .map(String::from);
    let cells = rows.iter().map(|r| {
        vec![
            fmt_f64(r.h),
            r.certified_prediction.to_string(),
            fmt_f64(r.predicted_rate),
            r.empirical_converged.to_string(),
            fmt_f64(r.empirical_rate),
            r.agree.to_string(),
        ]
    });
    let out = OutputDir::create(&config.output_dir)?;
    out.write_csv("sweep.csv", &header, cells)?;
    out.write_bytes("plot_sweep.py", PLOT_SWEEP.as_bytes())?;
    let agree = rows.iter().filter(|r| r.agree).count();
    println!("sweep {} on {}: {agree}/{} cells agree", opt.rule, game.name(), rows.len());
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

pub fn bench_cmd(config: &ExperimentConfig) -> Result<(), CliError> {
    let (_, game) = config.build_game()?;
    let start = start_point(config, game.as_ref())?;
    let configs: Vec<OptimizerConfig> = config
        .bench
        .rules
        .iter()
        .map(|r| config.optimizer.resolve_for(*r))
        .collect();
    let options = BenchOptions {
        steps: config.bench.steps,
        warmup: config.bench.warmup,
    };
    let rows = bench(game.as_ref(), &configs, &start, &options)
        .map_err(|e| CliError::from_harness(e, "bench"))?;

    let header = ["rule", "steps", "mean_us", "p50_us", "p95_us", "mean_cg_iterations"]
        .map(String::from);
    let cells = rows.iter().map(|r| {
        vec![
            r.rule.clone(),
            r.steps.to_string(),
            fmt_f64(r.mean_us),
            fmt_f64(r.p50_us),
            fmt_f64(r.p95_us),
            fmt_f64(r.mean_cg_iterations),
        ]
    });
    let out = OutputDir::create(&config.output_dir)?;
    out.write_csv("bench.csv", &header, cells)?;
    out.write_bytes("plot_bench.py", PLOT_BENCH.as_bytes())?;
    for r in &rows {
        println!(
            "{:<14} mean {:>10.2} us  p50 {:>10.2}  p95 {:>10.2}  cg/step {:.1}",
            r.rule, r.mean_us, r.p50_us, r.p95_us, r.mean_cg_iterations
        );
    }
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

pub fn list_games() -> Result<(), CliError> {
    for id in GAME_IDS {
        let spec = GameSpec::default_for(id).expect("listed ids have defaults");
        let params = serde_json::to_value(&spec).expect("game specs serialize")["params"].clone();
        println!("{id:<10} {params}");
    }
    Ok(())
}

pub fn list_rules() -> Result<(), CliError> {
    for rule in Rule::ALL {
        println!("{:<14} {}", rule.as_str(), rule.summary());
    }
    Ok(())
}
