//! `acom`: trajectories, spectral reports, step-size sweeps and per-step
//! benchmarks for two-player differentiable games.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical abort,
//! 1 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use acom::optim::Rule;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{Overrides, OUTPUT_DIR_ENV};
use error::CliError;

#[derive(Parser)]
#[command(name = "acom", version, about = "Competitive optimization experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer and write trajectory.csv and summary.json.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        record_every: Option<u64>,
        /// Stop once ‖V(p)‖ is at or below this.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Certify local convergence and write spectrum.json and eigenvalues.csv.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// `equilibrium` or `initial`.
        #[arg(long)]
        at: Option<String>,
        /// `with_history` or `frozen_delta`.
        #[arg(long)]
        linearization: Option<String>,
    },
    /// Compare certification with empirical convergence over step sizes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Explicit step sizes, comma separated.
        #[arg(long = "h", value_delimiter = ',')]
        h_values: Vec<f64>,
        /// Multiples of the critical step size, used when no --h is given.
        #[arg(long, value_delimiter = ',')]
        factors: Vec<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tail: Option<usize>,
        #[arg(long)]
        perturbation: Option<f64>,
        #[arg(long)]
        linearization: Option<String>,
    },
    /// Time per-step cost of several rules from the same start point.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Rules to time, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_rule)]
        rules: Vec<Rule>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
    },
    /// Print game ids with their default parameters.
    ListGames,
    /// Print update rules.
    ListRules,
}

/// Flags shared by every experiment command. They override the config file.
#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    /// Game parameter object as JSON.
    #[arg(long, value_name = "JSON")]
    game_params: Option<String>,
    #[arg(long, value_parser = parse_rule)]
    rule: Option<Rule>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    cg_max_iter: Option<usize>,
    /// Initial point as JSON, e.g. `{"kind":"random","scale":0.1}`.
    #[arg(long, value_name = "JSON")]
    init: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory. Overrides the config file and $ACOM_OUTPUT_DIR.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse::<Rule>().map_err(|e| e.to_string())
}

fn json_flag(path: &str, text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config {
        path: path.into(),
        message: e.to_string(),
    })
}

impl Common {
    fn overrides(&self, o: &mut Overrides) -> Result<(), CliError> {
        o.set_opt("game", self.game.clone());
        if let Some(t) = &self.game_params {
            o.set("game_params", json_flag("game_params", t)?);
        }
        o.set_opt("optimizer.rule", self.rule.map(|r| r.as_str()));
        o.set_opt("optimizer.lr", self.lr);
        o.set_opt("optimizer.beta1", self.beta1);
        o.set_opt("optimizer.beta2", self.beta2);
        o.set_opt("optimizer.gamma", self.gamma);
        o.set_opt("optimizer.eta", self.eta);
        o.set_opt("optimizer.eps", self.eps);
        o.set_opt("optimizer.cg_tol", self.cg_tol);
        o.set_opt("optimizer.cg_max_iter", self.cg_max_iter);
        if let Some(t) = &self.init {
            o.set("init", json_flag("init", t)?);
        }
        o.set_opt("seed", self.seed);
        o.set_opt(
            "output_dir",
            self.output_dir.as_ref().map(|p| p.to_string_lossy().into_owned()),
        );
        Ok(())
    }

    fn load(&self, o: Overrides) -> Result<config::ExperimentConfig, CliError> {
        let text = match &self.config {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
            None => None,
        };
        let env = std::env::var(OUTPUT_DIR_ENV).ok().filter(|s| !s.is_empty());
        config::load(text.as_deref(), o, env)
    }
}

fn f64_list(v: &[f64]) -> Option<Value> {
    (!v.is_empty()).then(|| Value::from(v.to_vec()))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let mut o = Overrides::default();
    match command {
        Command::Run {
            common,
            max_steps,
            record_every,
            threshold,
        } => {
            common.overrides(&mut o)?;
            o.set_opt("max_steps", max_steps);
            o.set_opt("record_every", record_every);
            o.set_opt("threshold", threshold);
            commands::run(&common.load(o)?)
        }
        Command::Spectrum {
            common,
            at,
            linearization,
        } => {
            common.overrides(&mut o)?;
            o.set_opt("spectrum.at", at);
            o.set_opt("spectrum.linearization", linearization);
            commands::spectrum(&common.load(o)?)
        }
        Command::Sweep {
            common,
            h_values,
            factors,
            steps,
            tail,
            perturbation,
            linearization,
        } => {
            common.overrides(&mut o)?;
            o.set_opt("sweep.h_values", f64_list(&h_values));
            o.set_opt("sweep.factors", f64_list(&factors));
            o.set_opt("sweep.steps", steps);
            o.set_opt("sweep.tail", tail);
            o.set_opt("sweep.perturbation", perturbation);
            o.set_opt("sweep.linearization", linearization);
            commands::sweep_cmd(&common.load(o)?)
        }
        Command::Bench {
            common,
            rules,
            steps,
            warmup,
        } => {
            common.overrides(&mut o)?;
            if !rules.is_empty() {
                o.set("bench.rules", rules.iter().map(|r| r.as_str()).collect::<Vec<_>>());
            }
            o.set_opt("bench.steps", steps);
            o.set_opt("bench.warmup", warmup);
            commands::bench_cmd(&common.load(o)?)
        }
        Command::ListGames => commands::list_games(),
        Command::ListRules => commands::list_rules(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
