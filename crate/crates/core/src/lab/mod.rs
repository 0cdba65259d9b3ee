//! Declarative experiments: a JSON config in, result tables and a JSON
//! report out.

mod quadrature;
mod runners;

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::prime_engine::{primes_in_with, IntegerSet, SieveConfig};
use crate::random_models::{bft_sample, cramer_sample};
use crate::table::Table;

pub use quadrature::log_power_integral;
pub use runners::{
    run_breakdown_scan, run_gap_tail, run_model_compare, run_poisson_fit, run_random_sieve,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GapTail,
    PoissonFit,
    ModelCompare,
    BreakdownScan,
    RandomSieve,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::GapTail,
        Experiment::PoissonFit,
        Experiment::ModelCompare,
        Experiment::BreakdownScan,
        Experiment::RandomSieve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GapTail => "gap-tail",
            Experiment::PoissonFit => "poisson-fit",
            Experiment::ModelCompare => "model-compare",
            Experiment::BreakdownScan => "breakdown-scan",
            Experiment::RandomSieve => "random-sieve",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Primes,
    Cramer,
    Bft,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Primes => "primes",
            Model::Cramer => "cramer",
            Model::Bft => "bft",
        }
    }

    pub fn is_random(self) -> bool {
        self != Model::Primes
    }
}

fn default_models() -> Vec<Model> {
    vec![Model::Primes]
}

fn default_ks() -> Vec<u64> {
    (0..=5).collect()
}

/// One experiment. Fields not used by the chosen experiment are ignored;
/// unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_ks")]
    pub ks: Vec<u64>,
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Offset tuples for `model-compare`.
    #[serde(default)]
    pub tuples: Vec<Vec<u64>>,
    /// Exponents `c` for the sieve-function columns of `breakdown-scan`.
    #[serde(default)]
    pub cs: Vec<f64>,
    /// Window length, sieve bound and trial count for `random-sieve`.
    #[serde(default)]
    pub y: Option<f64>,
    #[serde(default)]
    pub z: Option<f64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub forbid_zero: bool,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// A config problem (exit code 2) or a failure inside a module (exit code 3).
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(String),
    Module { context: String, source: LabError },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Module { .. } => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Module { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

pub(crate) fn module(context: impl Into<String>) -> impl FnOnce(LabError) -> RunError {
    let context = context.into();
    move |source| RunError::Module { context, source }
}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if let Some(&l) = self.lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(config_err(format!(
                "lambda grid entries must be positive, got {l}"
            )));
        }
        if let Some(&c) = self.cs.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(config_err(format!(
                "c grid entries must be positive, got {c}"
            )));
        }
        if self.tuples.iter().any(Vec::is_empty) {
            return Err(config_err("offset tuples must be non-empty"));
        }
        let stochastic = match self.experiment {
            Experiment::RandomSieve => true,
            _ => self.models.iter().any(|m| m.is_random()),
        };
        if stochastic && self.seeds.is_empty() {
            return Err(config_err(
                "a stochastic experiment needs at least one seed",
            ));
        }
        match self.experiment {
            Experiment::RandomSieve => {
                let (y, z, trials) = (self.y, self.z, self.trials);
                if !matches!(y, Some(v) if v >= 0.0 && v.is_finite()) {
                    return Err(config_err("random-sieve needs a window length y >= 0"));
                }
                if !matches!(z, Some(v) if v.is_finite()) {
                    return Err(config_err("random-sieve needs a sieve bound z"));
                }
                if !matches!(trials, Some(t) if t > 0) {
                    return Err(config_err("random-sieve needs trials >= 1"));
                }
            }
            _ => {
                if !matches!(self.x, Some(v) if v >= 3.0 && v.is_finite()) {
                    return Err(config_err("x must be given and at least 3"));
                }
                if self.models.is_empty() {
                    return Err(config_err("at least one model is required"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn x(&self) -> f64 {
        self.x.expect("validated")
    }

    /// Seeds to run for `model`: none for the primes.
    pub(crate) fn seeds_for(&self, model: Model) -> Vec<Option<u64>> {
        if model.is_random() {
            self.seeds.iter().map(|&s| Some(s)).collect()
        } else {
            vec![None]
        }
    }
}

/// Results plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl ExperimentReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json` and one `<table>.csv` per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> crate::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        for t in &self.tables {
            let f = std::fs::File::create(dir.join(format!("{}.csv", t.name)))?;
            t.write_csv(std::io::BufWriter::new(f))?;
        }
        Ok(())
    }
}

/// Draws the set for `model` on `(0, x_max]`.
pub fn generate_set(
    model: Model,
    seed: Option<u64>,
    x_max: u64,
    sieve: &SieveConfig,
) -> crate::Result<IntegerSet> {
    if x_max > sieve.max {
        return Err(LabError::SieveLimit {
            requested: x_max,
            max: sieve.max,
        });
    }
    match (model, seed) {
        (Model::Primes, _) => primes_in_with(0, x_max, sieve),
        (Model::Cramer, Some(s)) => cramer_sample(x_max, s),
        (Model::Bft, Some(s)) => bft_sample(x_max, s),
        (_, None) => Err(LabError::InvalidArgument(format!(
            "model {} needs a seed",
            model.name()
        ))),
    }
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig, sieve: &SieveConfig) -> Result<ExperimentReport, RunError> {
    config.validate()?;
    let start = Instant::now();
    let (tables, notes) = match config.experiment {
        Experiment::GapTail => run_gap_tail(config, sieve)?,
        Experiment::PoissonFit => run_poisson_fit(config, sieve)?,
        Experiment::ModelCompare => run_model_compare(config, sieve)?,
        Experiment::BreakdownScan => run_breakdown_scan(config, sieve)?,
        Experiment::RandomSieve => run_random_sieve(config)?,
    };
    Ok(ExperimentReport {
        config: config.clone(),
        tables,
        notes,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields() {
        let e = ExperimentConfig::from_json(r#"{"experiment":"gap-tail","x":100,"lamda":[1]}"#)
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn stochastic_needs_seed() {
        let e = ExperimentConfig::from_json(
            r#"{"experiment":"gap-tail","x":1000,"lambdas":[1],"models":["cramer"]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("seed"));
        assert!(ExperimentConfig::from_json(
            r#"{"experiment":"gap-tail","x":1000,"lambdas":[-1]}"#
        )
        .is_err());
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
    }
}
