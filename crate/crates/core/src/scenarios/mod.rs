//! Packaged experiments with reproducible, self-describing results.
//!
//! Every scenario is driven by a serializable [`ScenarioConfig`]. The result carries that
//! configuration as its snapshot, so feeding the snapshot back to [`run`] reproduces the
//! numbers exactly.

mod bundled;
mod obstacles;
mod petrovsky;
mod validation;

pub use bundled::{bundled_domains, run_condition_suite, BundledDomain, ConditionSuiteRow};
pub use obstacles::{
    obstacle_mass, run_complement_cube, run_sparse_cubes, ComplementCubeConfig, SparseCubesConfig,
    MIN_OBSTACLE_DISTANCE,
};
pub use petrovsky::{run_petrovsky, PetrovskyConfig};
pub use validation::{run_validation_suite, ValidationConfig};

use crate::analysis::AnalysisError;
use crate::capacity::CapacityError;
use crate::geometry::GeometryError;
use crate::walker::WalkError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("could not write results: {0}")]
    Io(#[from] std::io::Error),
    #[error("could not write a table: {0}")]
    Csv(#[from] csv::Error),
}

/// A named scalar with an optional Monte Carlo standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
}

/// Rectangular numeric table, written as CSV next to `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(&self.columns)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Outcome of one acceptance rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub rule: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(rule: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            rule: rule.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Configuration of any scenario; doubles as the snapshot stored with each result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum ScenarioConfig {
    ComplementCube(ComplementCubeConfig),
    SparseCubes(SparseCubesConfig),
    Petrovsky(PetrovskyConfig),
    Validation(ValidationConfig),
}

impl ScenarioConfig {
    /// Default configuration for a scenario name as used on the command line.
    pub fn by_name(name: &str, seed: u64) -> Option<Self> {
        Some(match name {
            "complement-cube" => ScenarioConfig::ComplementCube(ComplementCubeConfig::new(seed)),
            "sparse-cubes" => ScenarioConfig::SparseCubes(SparseCubesConfig::new(seed)),
            "petrovsky" => ScenarioConfig::Petrovsky(PetrovskyConfig::new(seed)),
            "validation" => ScenarioConfig::Validation(ValidationConfig::new(seed)),
            _ => return None,
        })
    }

    pub const NAMES: [&'static str; 4] = ["complement-cube", "sparse-cubes", "petrovsky", "validation"];

    /// Override the number of paths per pole where the scenario has one.
    pub fn set_paths(&mut self, n_paths: u64) {
        match self {
            ScenarioConfig::ComplementCube(c) => c.n_paths = n_paths,
            ScenarioConfig::SparseCubes(c) => c.n_paths = n_paths,
            ScenarioConfig::Petrovsky(c) => c.n_paths = n_paths,
            ScenarioConfig::Validation(c) => c.n_paths = n_paths,
        }
    }
}

/// Result of a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub quantities: Vec<Quantity>,
    pub tables: BTreeMap<String, Table>,
    pub checks: Vec<Check>,
    /// Set when Monte Carlo errors are too large for the measured values to be trusted.
    pub flagged: bool,
    pub notices: Vec<String>,
    pub config: ScenarioConfig,
}

impl ScenarioResult {
    fn new(scenario: &str, config: ScenarioConfig) -> Self {
        Self {
            scenario: scenario.to_string(),
            quantities: Vec::new(),
            tables: BTreeMap::new(),
            checks: Vec::new(),
            flagged: false,
            notices: Vec::new(),
            config,
        }
    }

    fn quantity(&mut self, name: &str, value: f64, standard_error: Option<f64>) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            standard_error,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write `result.json`, `config.json` and one CSV per table into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let result_path = dir.join("result.json");
        fs::write(&result_path, to_json(self) + "\n")?;
        written.push(result_path);
        let config_path = dir.join("config.json");
        fs::write(&config_path, to_json(&self.config) + "\n")?;
        written.push(config_path);
        for (name, table) in &self.tables {
            let path = dir.join(format!("{name}.csv"));
            table.write_csv(fs::File::create(&path)?)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("scenario values serialize")
}

/// Run a scenario from its configuration.
pub fn run(config: &ScenarioConfig) -> Result<ScenarioResult, ScenarioError> {
    match config {
        ScenarioConfig::ComplementCube(c) => run_complement_cube(c),
        ScenarioConfig::SparseCubes(c) => run_sparse_cubes(c),
        ScenarioConfig::Petrovsky(c) => run_petrovsky(c),
        ScenarioConfig::Validation(c) => run_validation_suite(c),
    }
}

/// `√(a² + b²)`.
pub(crate) fn combined(a: f64, b: f64) -> f64 {
    a.hypot(b)
}
