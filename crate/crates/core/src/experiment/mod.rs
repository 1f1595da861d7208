//! Scenario runner producing CSV datasets.

mod csv;
mod presets;
mod scenario;

use thiserror::Error;

use crate::config_file::ConfigFileError;
use crate::error::ModelError;

pub use csv::{format_sig9, Dataset, LayerTag, Quantity, Row, SimStat, HEADER};
pub use presets::{preset, preset_names, PresetInfo, PRESETS};
pub use scenario::{
    resolve_point, run_power_report, run_scenario, Outputs, RateChoice, Scenario, ScenarioBase,
    SweepVar,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown scenario `{0}` (see `scenario --list`)")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 2 for invalid input, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Io(_) => 1,
            _ => 2,
        }
    }
}

/// Version tag written into CSV provenance.
pub fn version_string() -> String {
    format!("layered-ra v{}", env!("CARGO_PKG_VERSION"))
}

/// Runs every series of a preset and concatenates the results.
pub fn run_series(name: &str, series: &[Scenario], notes: &[&str]) -> Result<Dataset, ExperimentError> {
    let mut out = Dataset {
        provenance: vec![version_string(), format!("scenario {name}")],
        rows: Vec::new(),
    };
    out.provenance
        .extend(notes.iter().map(|n| format!("note: {n}")));
    for s in series {
        out.extend(run_scenario(s)?);
    }
    Ok(out)
}
