//! Experiment campaigns, persistence and report generation.

mod experiment;
mod report;
pub mod seeds;
pub mod stats;
mod table;

use std::path::Path;

pub use experiment::{
    boxplot_csv, decrease_rate, load_basis_file, rows_csv, run_experiment, ArmReport, ArmSpec,
    BasisInfo, BasisSource, ExperimentOptions, ExperimentOutput, ExperimentReport, ExperimentSpec,
    InstanceSource, RunSummary, Scale, SearchSummary,
};
pub use report::render_markdown;
pub use table::{epistasis_table, epistasis_table_csv, EpistasisRow};

use crate::error::Result;
use crate::problems::Instance;

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
