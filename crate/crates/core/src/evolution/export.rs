use std::io::{self, Write};

use serde::Serialize;

use super::psi::GridConfig;
use super::stepper::{ModeRate, SimulationConfig, Termination, Trajectory};
use crate::params::{FlatStationary, TumorParams};
use crate::spectral::lambda_k;

/// Writes `t,max_abs_rho,A_0,...,A_{k_max}`, one row per accepted sample,
/// after the given `#`-prefixed header lines.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    trajectory: &Trajectory,
    k_max: usize,
    header: &[String],
) -> io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let n_modes = trajectory.mode_amplitudes.first().map_or(0, Vec::len);
    let k_max = k_max.min(n_modes.saturating_sub(1));
    write!(out, "t,max_abs_rho")?;
    for k in 0..=k_max {
        write!(out, ",A_{k}")?;
    }
    writeln!(out)?;
    for ((t, amps), rho) in trajectory
        .times
        .iter()
        .zip(&trajectory.mode_amplitudes)
        .zip(&trajectory.rho_snapshots)
    {
        let m = rho.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        write!(out, "{t:.16e},{m:.16e}")?;
        for a in &amps[..=k_max] {
            write!(out, ",{a:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Fitted rate of one mode next to the closed-form prediction `-lambda_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeComparison {
    #[serde(flatten)]
    pub fit: ModeRate,
    pub lambda_k: f64,
    pub predicted_rate: f64,
    pub relative_error: Option<f64>,
}

/// Summary written next to a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySidecar {
    pub params: TumorParams,
    pub flat_stationary: FlatStationary,
    pub gamma: f64,
    pub grid: GridConfig,
    pub simulation: SimulationConfig,
    pub termination: Termination,
    pub final_time: f64,
    pub samples: usize,
    pub rates: Vec<ModeComparison>,
}

impl TrajectorySidecar {
    pub fn new(
        trajectory: &Trajectory,
        termination: Termination,
        params: &TumorParams,
        fs: &FlatStationary,
        gamma: f64,
        simulation: &SimulationConfig,
        k_max: usize,
    ) -> Self {
        let rates = trajectory
            .fitted_rates
            .iter()
            .filter(|r| r.k() <= k_max)
            .map(|r| {
                let k = r.k();
                let lambda = lambda_k(params, fs, k as i64, gamma);
                let predicted = -lambda;
                ModeComparison {
                    fit: r.clone(),
                    lambda_k: lambda,
                    predicted_rate: predicted,
                    relative_error: r
                        .rate()
                        .map(|rate| (rate - predicted).abs() / predicted.abs()),
                }
            })
            .collect();
        Self {
            params: *params,
            flat_stationary: *fs,
            gamma,
            grid: simulation.grid,
            simulation: *simulation,
            termination,
            final_time: trajectory.times.last().copied().unwrap_or(0.0),
            samples: trajectory.times.len(),
            rates,
        }
    }
}
