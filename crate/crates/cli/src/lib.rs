//! Experiment runner: JSON configs in, CSV tables and JSON summaries out.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use report::Report;

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
    ExperimentConfig::from_json(&text)
}

/// Output directory: the explicit one, else the config's, else the working directory.
pub fn output_dir(explicit: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs an experiment in memory.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Report, CliError> {
    experiments::run(kind, cfg, seed)
}
