use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use necrostrip_cli::{run, CliError, Command, ExitStatus};
use necrostrip_core::Error;

#[derive(Parser)]
#[command(
    name = "necrostrip",
    version,
    about = "Flat necrotic tumor slab: stationary state, spectrum and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Set a config value, e.g. `params.nu=2`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flat stationary state, profiles and residual report.
    Stationary(Common),
    /// Closed-form spectrum, critical adhesiveness and classification.
    Spectrum(Common),
    /// Time integration of the surface with fitted mode rates.
    Simulate(Common),
    /// Finite-difference probe of the linearized surface flux.
    Jacobian(Common),
    /// Parameter sweep over the `[sweep]` axes.
    Sweep(Common),
}

fn explain(err: &CliError) -> Option<String> {
    let core = match err {
        CliError::Core(e) | CliError::Failed { source: e, .. } => e,
        _ => return None,
    };
    match core {
        Error::NoFlatStationary { sigma_star, .. } => Some(format!("sigma_star = {sigma_star}")),
        Error::TailNotCertified { suggested, .. } => {
            Some(format!("suggested spectral.k_max = {suggested}"))
        }
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Stationary(c) => (Command::Stationary, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Jacobian(c) => (Command::Jacobian, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
    };
    let started = Instant::now();
    let result = run(
        command,
        &common.config,
        common.out.as_deref(),
        &common.overrides,
    )
    .with_context(|| format!("{command:?} with config {}", common.config.display()));
    match result {
        Ok(files) => {
            for f in &files {
                eprintln!("wrote {}", f.display());
            }
            eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let cli_err = err.downcast_ref::<CliError>();
            if let Some(hint) = cli_err.and_then(explain) {
                eprintln!("{hint}");
            }
            let status = cli_err.map_or(ExitStatus::Io, CliError::status);
            ExitCode::from(status as u8)
        }
    }
}
