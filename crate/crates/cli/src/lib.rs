//! Configuration handling and subcommands of the `necrostrip` binary.
//!
//! Every subcommand reads one TOML config, writes plot-ready CSV and JSON
//! files into the output directory and embeds the resolved config in each of
//! them. Outputs carry no timestamps, so the same config always produces the
//! same bytes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{
    cmd_jacobian, cmd_simulate, cmd_spectrum, cmd_stationary, cmd_sweep, SweepRow, THREADS_ENV,
};
pub use config::RunConfig;
pub use error::{CliError, CliResult, ExitStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stationary,
    Spectrum,
    Simulate,
    Jacobian,
    Sweep,
}

/// Loads the config, applies overrides and runs one subcommand.
/// `out` takes precedence over `output.dir`.
pub fn run(
    command: Command,
    config: &Path,
    out: Option<&Path>,
    overrides: &[String],
) -> CliResult<Vec<PathBuf>> {
    let cfg = RunConfig::load(config, overrides)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output.dir.clone());
    match command {
        Command::Stationary => cmd_stationary(&cfg, &dir),
        Command::Spectrum => cmd_spectrum(&cfg, &dir),
        Command::Simulate => cmd_simulate(&cfg, &dir),
        Command::Jacobian => cmd_jacobian(&cfg, &dir),
        Command::Sweep => cmd_sweep(&cfg, &dir),
    }
}
