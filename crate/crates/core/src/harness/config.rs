//! Run configuration, loaded from JSON.
//!
//! ```json
//! {
//!   "model": "golden",
//!   "society": {"generate": {"persons": 3, "estate": 2}},
//!   "initial": {"carriers": {"generate": {"count": 12, "theta": [1, 2, 3]}}},
//!   "strategy": {"name": "bernoulli", "params": {"p": 0.3}},
//!   "steps": 1000,
//!   "seed": 7,
//!   "log": {"snapshot_interval": 1},
//!   "audit": true
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::golden::{Cell, ForceCarrier};
use crate::society::{GeneratorParams, SocietyDoc};
use crate::will::{build_golden, build_good, build_primitive, StrategySpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Primitive,
    Good,
    Golden,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Primitive => "primitive",
            ModelKind::Good => "good",
            ModelKind::Golden => "golden",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primitive" => Ok(ModelKind::Primitive),
            "good" => Ok(ModelKind::Good),
            "golden" => Ok(ModelKind::Golden),
            other => Err(format!(
                "model: unknown kind {other:?}; expected primitive, good or golden"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_format_version")]
    pub format_version: u32,
    /// `primitive`, `good` or `golden`.
    pub model: String,
    pub society: SocietySource,
    #[serde(default, skip_serializing_if = "InitialSpec::is_empty")]
    pub initial: InitialSpec,
    pub strategy: StrategySpec,
    pub steps: i64,
    pub seed: u64,
    #[serde(default)]
    pub log: LogOptions,
    #[serde(default)]
    pub audit: bool,
    /// Directory relative society files are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SocietySource {
    Inline(SocietyDoc),
    File(PathBuf),
    Generate(SocietyGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocietyGenerator {
    pub persons: usize,
    pub estate: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Defaults to a stream derived from the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SocietyGenerator {
    pub fn params(&self) -> GeneratorParams {
        let defaults = GeneratorParams::default();
        GeneratorParams {
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            dim: self.dim.unwrap_or(defaults.dim),
        }
    }
}

/// Optional explicit pieces of the initial state. Anything omitted is
/// generated: round-robin ownership, uniform power, and force from the
/// strategy itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<usize>>,
    /// Uniform power value (primitive and good models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive_power: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive_force: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_power: Option<Vec<(usize, usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_force: Option<Vec<(usize, usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carriers: Option<CarrierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exercised: Option<Vec<usize>>,
}

impl InitialSpec {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CarrierSpec {
    /// `count` carriers; carrier `i` takes `theta[i % len]` and `mu[i % len]`.
    Generate {
        count: usize,
        #[serde(default = "CarrierSpec::default_theta")]
        theta: Vec<u32>,
        #[serde(default = "CarrierSpec::default_mu")]
        mu: Vec<f64>,
    },
    Roster(Vec<ForceCarrier>),
}

impl CarrierSpec {
    fn default_theta() -> Vec<u32> {
        vec![1, 2, 3]
    }

    fn default_mu() -> Vec<f64> {
        vec![1.0]
    }
}

impl Default for CarrierSpec {
    fn default() -> Self {
        CarrierSpec::Generate {
            count: 12,
            theta: Self::default_theta(),
            mu: Self::default_mu(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    RoundRobin,
    /// Uniform over cells, drawn from the setup stream.
    Random,
    Explicit(Vec<Cell>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogOptions {
    /// Full state snapshots every this many states.
    #[serde(default = "LogOptions::default_interval")]
    pub snapshot_interval: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl LogOptions {
    fn default_interval() -> u64 {
        1
    }
}

impl Default for LogOptions {
    fn default() -> Self {
        Self {
            snapshot_interval: Self::default_interval(),
            path: None,
        }
    }
}

impl RunConfig {
    pub fn model_kind(&self) -> Result<ModelKind> {
        self.model
            .parse()
            .map_err(|e: String| Error::Config(vec![e]))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Resolves a society file path against the config's directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Every problem with the config, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.format_version != FORMAT_VERSION {
            problems.push(format!(
                "format_version: unsupported version {}, expected {FORMAT_VERSION}",
                self.format_version
            ));
        }
        let model = match self.model.parse::<ModelKind>() {
            Ok(m) => Some(m),
            Err(e) => {
                problems.push(e);
                None
            }
        };
        if self.steps < 1 {
            problems.push(format!("steps: must be at least 1, got {}", self.steps));
        }
        if self.log.snapshot_interval == 0 {
            problems.push("log.snapshot_interval: must be at least 1".into());
        }

        match &self.society {
            SocietySource::File(path) => {
                let resolved = self.resolve(path);
                if !resolved.is_file() {
                    problems.push(format!("society.file: {} does not exist", resolved.display()));
                }
            }
            SocietySource::Generate(g) => {
                if g.persons == 0 {
                    problems.push("society.generate.persons: must be at least 1".into());
                }
                if g.estate == 0 {
                    problems.push("society.generate.estate: must be at least 1".into());
                }
                let eps = g.params().epsilon;
                if !(eps > 0.0 && eps < 0.5) {
                    problems.push(format!("society.generate.epsilon: must lie in (0, 0.5), got {eps}"));
                }
                if g.params().dim == 0 {
                    problems.push("society.generate.dim: must be at least 1".into());
                }
            }
            SocietySource::Inline(doc) => {
                if let Err(e) = crate::society::Society::from_doc(doc) {
                    problems.push(format!("society.inline: {e}"));
                }
            }
        }

        if let Some(model) = model {
            let built = match model {
                ModelKind::Primitive => build_primitive(&self.strategy).map(|_| ()),
                ModelKind::Good => build_good(&self.strategy).map(|_| ()),
                ModelKind::Golden => build_golden(&self.strategy).map(|_| ()),
            };
            if let Err(e) = built {
                problems.push(format!("strategy: {e}"));
            }
            problems.extend(self.initial_problems(model));
        }
        problems
    }

    fn initial_problems(&self, model: ModelKind) -> Vec<String> {
        let init = &self.initial;
        let mut problems = Vec::new();
        let mut foreign = |field: &str, present: bool, allowed: &[ModelKind]| {
            if present && !allowed.contains(&model) {
                problems.push(format!("initial.{field}: not used by the {model} model"));
            }
        };
        use ModelKind::*;
        foreign("power", init.power.is_some(), &[Primitive, Good]);
        foreign("primitive_power", init.primitive_power.is_some(), &[Primitive]);
        foreign("primitive_force", init.primitive_force.is_some(), &[Primitive]);
        foreign("good_power", init.good_power.is_some(), &[Good]);
        foreign("good_force", init.good_force.is_some(), &[Good]);
        foreign("carriers", init.carriers.is_some(), &[Golden]);
        foreign("placement", init.placement.is_some(), &[Golden]);
        foreign("idle", init.idle.is_some(), &[Golden]);
        foreign("exercised", init.exercised.is_some(), &[Golden]);
        if let Some(p) = init.power {
            if !(p.is_finite() && p > 0.0) {
                problems.push(format!("initial.power: must be positive, got {p}"));
            }
        }
        if let Some(CarrierSpec::Generate { count, theta, mu }) = &init.carriers {
            if *count == 0 {
                problems.push("initial.carriers.generate.count: must be at least 1".into());
            }
            if theta.is_empty() || theta.contains(&0) {
                problems.push("initial.carriers.generate.theta: needs values >= 1".into());
            }
            if mu.is_empty() || mu.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                problems.push("initial.carriers.generate.mu: needs positive values".into());
            }
        }
        problems
    }
}

/// Parses and validates a config; `base_dir` anchors relative file paths.
pub fn load_config_str(text: &str, base_dir: Option<&Path>) -> Result<RunConfig> {
    let mut config: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("parse: {e}")]))?;
    config.base_dir = base_dir.map(Path::to_path_buf);
    let problems = config.problems();
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(problems))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text, path.parent())
}
