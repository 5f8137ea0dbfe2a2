//! Experiment driver for network imitation dynamics.
//!
//! Each command reads an [`ExperimentSpec`](config::ExperimentSpec), writes
//! CSV/JSON/SVG artifacts into an output directory and finishes with a
//! `manifest.json` listing the files and the resolved config.

pub mod commands;
pub mod config;
pub mod output;
pub mod regression;
pub mod svg;

use std::path::{Path, PathBuf};

use config::{CommandKind, ExperimentSpec};
use output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            CliError::Input(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<imitanet_core::Error> for CliError {
    fn from(e: imitanet_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

/// Output directory: `--out`, then the config's `out`, then `out/<command>`.
pub fn resolve_out(kind: CommandKind, spec: &ExperimentSpec, cli_out: Option<&Path>) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()))
}

/// Runs `kind` and returns the files written, manifest excluded.
pub fn execute(kind: CommandKind, mut spec: ExperimentSpec, out: &Path) -> Result<Vec<String>, CliError> {
    spec.validate_for(kind)?;
    let mut dir = OutputDir::create(out)?;
    match kind {
        CommandKind::Simulate => {
            commands::simulate::run(&spec, &mut dir)?;
        }
        CommandKind::Coevolve => {
            commands::coevolve::run(&spec, &mut dir)?;
        }
        CommandKind::Trend => {
            commands::trend::run(&spec, &mut dir)?;
        }
        CommandKind::Sweep => {
            commands::sweep::run(&spec, &mut dir)?;
        }
        CommandKind::Analyze => {
            commands::analyze::run(&spec, &mut dir)?;
        }
    }
    // The manifest records what ran, not where it was written.
    spec.command = Some(kind);
    spec.out = None;
    dir.finish(kind, &spec)
}
