//! Experiment configuration: one JSON document, overlaid with command-line
//! flags, then deserialized with field-path error reporting.

use std::path::PathBuf;

use acom::games::{GameOracle, GameSpec};
use acom::harness::{InitialPoint, RunOptions, SweepOptions, DEFAULT_GRID_FACTORS};
use acom::optim::{OptimizerConfig, Rule};
use acom::spectral::Linearization;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Environment variable that overrides the output root from the config file.
pub const OUTPUT_DIR_ENV: &str = "ACOM_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Zoo identifier, see `acom list-games`.
    pub game: String,
    /// Game parameter object. Defaults for the id when omitted.
    pub game_params: Option<Value>,
    pub optimizer: OptimizerSection,
    pub init: InitialPoint,
    pub max_steps: u64,
    pub record_every: u64,
    /// Convergence threshold on `‖V(p)‖`.
    pub threshold: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub spectrum: SpectrumSection,
    pub sweep: SweepSection,
    pub bench: BenchSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let run = RunOptions::default();
        ExperimentConfig {
            game: "quadratic".into(),
            game_params: None,
            optimizer: OptimizerSection::default(),
            init: InitialPoint::Default,
            max_steps: run.max_steps,
            record_every: run.record_every,
            threshold: run.threshold,
            output_dir: PathBuf::from("results"),
            seed: 0,
            spectrum: SpectrumSection::default(),
            sweep: SweepSection::default(),
            bench: BenchSection::default(),
        }
    }
}

/// Rule plus optional overrides of that rule's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub rule: Rule,
    pub lr: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub cg_tol: Option<f64>,
    pub cg_max_iter: Option<usize>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            rule: Rule::AcomAdam,
            lr: None,
            beta1: None,
            beta2: None,
            gamma: None,
            eta: None,
            eps: None,
            cg_tol: None,
            cg_max_iter: None,
        }
    }
}

impl OptimizerSection {
    /// Defaults for `rule` with the explicit fields of this section applied.
    pub fn resolve_for(&self, rule: Rule) -> OptimizerConfig {
        let d = OptimizerConfig::defaults(rule);
        OptimizerConfig {
            rule,
            lr: self.lr.unwrap_or(d.lr),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            gamma: self.gamma.unwrap_or(d.gamma),
            eta: self.eta.unwrap_or(d.eta),
            eps: self.eps.unwrap_or(d.eps),
            cg_tol: self.cg_tol.unwrap_or(d.cg_tol),
            cg_max_iter: self.cg_max_iter.or(d.cg_max_iter),
        }
    }

    pub fn resolve(&self) -> Result<OptimizerConfig, CliError> {
        let c = self.resolve_for(self.rule);
        c.validate().map_err(|e| CliError::from_optim(e, "optimizer"))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumAt {
    /// The game's equilibrium, or the initial point if it has none.
    #[default]
    Equilibrium,
    Initial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub at: SpectrumAt,
    pub linearization: Linearization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit step sizes. When absent the grid is `factors × h_crit`.
    pub h_values: Option<Vec<f64>>,
    pub factors: Vec<f64>,
    pub steps: usize,
    pub tail: usize,
    pub perturbation: f64,
    pub linearization: Linearization,
}

impl Default for SweepSection {
    fn default() -> Self {
        let o = SweepOptions::default();
        SweepSection {
            h_values: None,
            factors: DEFAULT_GRID_FACTORS.to_vec(),
            steps: o.steps,
            tail: o.tail,
            perturbation: o.perturbation,
            linearization: o.linearization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub rules: Vec<Rule>,
    pub steps: usize,
    pub warmup: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            rules: vec![Rule::Gda, Rule::AcomAdam, Rule::ConOpt, Rule::Cgd],
            steps: 500,
            warmup: 10,
        }
    }
}

/// Flag values to overlay on the config document. Each entry is a dotted
/// path and a JSON value.
#[derive(Debug, Default)]
pub struct Overrides(Vec<(&'static str, Value)>);

impl Overrides {
    pub fn set(&mut self, path: &'static str, value: impl Into<Value>) {
        self.0.push((path, value.into()));
    }

    pub fn set_opt<T: Into<Value>>(&mut self, path: &'static str, value: Option<T>) {
        if let Some(v) = value {
            self.set(path, v);
        }
    }
}

fn overlay(doc: &mut Map<String, Value>, path: &str, value: Value) -> Result<(), CliError> {
    let mut parts = path.split('.').peekable();
    let mut cur = doc;
    while let Some(key) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(key.to_string(), value);
            return Ok(());
        }
        let next = cur
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        cur = next.as_object_mut().ok_or_else(|| CliError::Config {
            path: key.to_string(),
            message: "expected an object".into(),
        })?;
    }
    Ok(())
}

fn path_error(e: serde_path_to_error::Error<serde_json::Error>, prefix: &str) -> CliError {
    let inner = e.path().to_string();
    let path = match (prefix.is_empty(), inner.as_str()) {
        (true, _) => inner.clone(),
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{inner}"),
    };
    CliError::Config {
        path,
        message: e.into_inner().to_string(),
    }
}

/// Reads the document (if any), applies flags, then the output-root env var
/// unless a flag already set it, and validates the result.
pub fn load(
    text: Option<&str>,
    overrides: Overrides,
    env_output_dir: Option<String>,
) -> Result<ExperimentConfig, CliError> {
    let mut doc = match text {
        Some(t) => {
            let de = &mut serde_json::Deserializer::from_str(t);
            let v: Value = serde_path_to_error::deserialize(de).map_err(|e| path_error(e, ""))?;
            match v {
                Value::Object(m) => m,
                _ => {
                    return Err(CliError::Config {
                        path: ".".into(),
                        message: "config must be a JSON object".into(),
                    })
                }
            }
        }
        None => Map::new(),
    };
    let flag_sets_output = overrides.0.iter().any(|(p, _)| *p == "output_dir");
    if let (Some(dir), false) = (env_output_dir, flag_sets_output) {
        doc.insert("output_dir".into(), Value::String(dir));
    }
    for (path, value) in overrides.0 {
        overlay(&mut doc, path, value)?;
    }
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(Value::Object(doc)).map_err(|e| path_error(e, ""))?;
    config.validate()?;
    Ok(config)
}

fn invalid(path: &str, message: &str) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be >= 1"));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(invalid("threshold", "must be finite and > 0"));
        }
        self.optimizer.resolve()?;
        if let Some(hs) = &self.sweep.h_values {
            if hs.is_empty() {
                return Err(invalid("sweep.h_values", "must not be empty"));
            }
            if let Some(i) = hs.iter().position(|h| !(*h > 0.0 && h.is_finite())) {
                return Err(CliError::Config {
                    path: format!("sweep.h_values[{i}]"),
                    message: "must be finite and > 0".into(),
                });
            }
        }
        if let Some(i) = self.sweep.factors.iter().position(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(CliError::Config {
                path: format!("sweep.factors[{i}]"),
                message: "must be finite and > 0".into(),
            });
        }
        if self.sweep.steps < 2 {
            return Err(invalid("sweep.steps", "must be >= 2"));
        }
        if self.sweep.tail < 2 {
            return Err(invalid("sweep.tail", "must be >= 2"));
        }
        if !(self.sweep.perturbation > 0.0 && self.sweep.perturbation.is_finite()) {
            return Err(invalid("sweep.perturbation", "must be finite and > 0"));
        }
        if self.bench.rules.is_empty() {
            return Err(invalid("bench.rules", "must not be empty"));
        }
        if self.bench.steps == 0 {
            return Err(invalid("bench.steps", "must be >= 1"));
        }
        for (i, rule) in self.bench.rules.iter().enumerate() {
            self.optimizer
                .resolve_for(*rule)
                .validate()
                .map_err(|e| CliError::from_optim(e, &format!("bench.rules[{i}]")))?;
        }
        Ok(())
    }

    /// The zoo entry, with the experiment seed filling an unset MLP seed.
    pub fn game_spec(&self) -> Result<GameSpec, CliError> {
        let Some(params) = &self.game_params else {
            let mut spec = GameSpec::default_for(&self.game)
                .map_err(|e| invalid("game", &e.to_string()))?;
            if let GameSpec::Mlp(c) = &mut spec {
                c.seed = self.seed;
            }
            return Ok(spec);
        };
        let mut params = params.clone();
        if self.game == "mlp" {
            if let Value::Object(m) = &mut params {
                m.entry("seed").or_insert(Value::from(self.seed));
            }
        }
        if !acom::games::GAME_IDS.contains(&self.game.as_str()) {
            return Err(invalid("game", &format!("unknown game `{}`", self.game)));
        }
        let doc = serde_json::json!({ "id": self.game, "params": params });
        serde_path_to_error::deserialize(doc).map_err(|e| {
            let inner = e.path().to_string();
            let path = inner.strip_prefix("params").unwrap_or(&inner);
            CliError::Config {
                path: format!("game_params{path}"),
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn build_game(&self) -> Result<(GameSpec, Box<dyn GameOracle>), CliError> {
        let spec = self.game_spec()?;
        let game = spec
            .build()
            .map_err(|e| invalid("game_params", &e.to_string()))?;
        Ok((spec, game))
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            max_steps: self.max_steps,
            record_every: self.record_every,
            threshold: self.threshold,
            ..RunOptions::default()
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            steps: self.sweep.steps,
            tail: self.sweep.tail,
            perturbation: self.sweep.perturbation,
            seed: self.seed,
            linearization: self.sweep.linearization,
        }
    }
}
