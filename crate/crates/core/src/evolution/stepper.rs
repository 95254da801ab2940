use serde::{Deserialize, Serialize};

use super::fit::{fit_log_linear, RateFit, AMPLITUDE_FLOOR};
use super::psi::{GridConfig, PsiDiagnostics, PsiEvaluator};
use crate::elliptic::geometry_margin;
use crate::error::{Error, Result};
use crate::fourier::Periodic;
use crate::params::{FlatStationary, TumorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Forward Euler on the full operator.
    Explicit,
    /// Curvature symbol implicit, remainder explicit.
    #[default]
    Imex,
}

/// Stiff part of the linearization: `m_k = gamma |k|^3 tanh(|k| rho_s)`.
pub fn curvature_multiplier(gamma: f64, rho_s: f64, k: u64) -> f64 {
    let kf = k as f64;
    gamma * kf * kf * kf * (kf * rho_s).tanh()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Advances `rho` by one step of `rho_t = -Psi(rho)`.
///
/// `t` is only used to label a rejection.
pub fn step(
    eval: &mut PsiEvaluator,
    t: f64,
    rho: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let psi = eval.evaluate(rho).map_err(|e| Error::StepRejected {
        t,
        reason: format!("surface flux evaluation failed: {e}"),
    })?;
    let next: Vec<f64> = match scheme {
        Scheme::Explicit => rho.iter().zip(&psi).map(|(r, p)| r - dt * p).collect(),
        Scheme::Imex => {
            let gamma = eval.gamma();
            let rho_s = eval.flat_state().rho_s;
            let mut fft = Periodic::new(rho.len());
            let mut m_rho = vec![0.0; rho.len()];
            fft.apply_multiplier(rho, |k| curvature_multiplier(gamma, rho_s, k), &mut m_rho);
            // (I + dt M) rho_next = rho - dt (Psi - M rho)
            let rhs: Vec<f64> = (0..rho.len())
                .map(|i| rho[i] - dt * (psi[i] - m_rho[i]))
                .collect();
            let mut out = vec![0.0; rho.len()];
            fft.apply_multiplier(
                &rhs,
                |k| 1.0 / (1.0 + dt * curvature_multiplier(gamma, rho_s, k)),
                &mut out,
            );
            out
        }
    };
    let margin = geometry_margin(eval.flat_state());
    let amp = max_abs(&next);
    if !amp.is_finite() || amp > margin {
        return Err(Error::StepRejected {
            t,
            reason: format!("max |rho| = {amp:.6e} leaves the admissible band {margin:.6e}"),
        });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub t_final: f64,
    pub dt0: f64,
    /// Upper bound on the adaptive step.
    pub dt_max: f64,
    /// Largest accepted `max|rho_next - rho| / max|rho|` per step.
    pub max_rel_change: f64,
    pub scheme: Scheme,
    /// Fraction of the samples, counted from the end, used by the rate fits.
    pub fit_window: f64,
    /// Subtract the discrete flux of the flat state so that it is an exact
    /// equilibrium of the scheme.
    pub well_balanced: bool,
    pub grid: GridConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            t_final: 5.0,
            dt0: 1e-3,
            dt_max: 1e-2,
            max_rel_change: 0.1,
            scheme: Scheme::Imex,
            fit_window: 0.5,
            well_balanced: true,
            grid: GridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub rejections: usize,
    pub psi_norm: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub obstacle_iterations: usize,
    pub pressure_iterations: usize,
}

/// Fitted exponential rate of one Fourier mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ModeRate {
    Fitted {
        k: usize,
        rate: f64,
        r_squared: f64,
        samples: usize,
    },
    /// The mode never rose above numerical noise in the fitting window.
    BelowFloor {
        k: usize,
    },
    Unavailable {
        k: usize,
        reason: String,
    },
}

impl ModeRate {
    pub fn k(&self) -> usize {
        match self {
            ModeRate::Fitted { k, .. }
            | ModeRate::BelowFloor { k }
            | ModeRate::Unavailable { k, .. } => *k,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match self {
            ModeRate::Fitted { rate, .. } => Some(*rate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub rho_snapshots: Vec<Vec<f64>>,
    /// Per sample, `A_k` for `0 <= k <= nx/2` (`eps cos(kx)` has `A_k = eps`).
    pub mode_amplitudes: Vec<Vec<f64>>,
    pub fitted_rates: Vec<ModeRate>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn amplitude_series(&self, k: usize) -> Vec<f64> {
        self.mode_amplitudes.iter().map(|a| a[k]).collect()
    }

    pub fn max_abs_rho(&self) -> Vec<f64> {
        self.rho_snapshots.iter().map(|r| max_abs(r)).collect()
    }

    fn push(&mut self, fft: &mut Periodic, t: f64, rho: &[f64]) {
        self.times.push(t);
        self.mode_amplitudes.push(fft.mode_amplitudes(rho));
        self.rho_snapshots.push(rho.to_vec());
    }
}

/// Least-squares exponential rate of mode `k` over the final `window_fraction` of the samples.
pub fn decay_rate_fit(trajectory: &Trajectory, k: usize, window_fraction: f64) -> Result<RateFit> {
    if trajectory
        .mode_amplitudes
        .first()
        .is_some_and(|a| k >= a.len())
    {
        return Err(Error::InvalidArgument(format!("mode {k} is not resolved")));
    }
    fit_log_linear(
        &trajectory.times,
        &trajectory.amplitude_series(k),
        window_fraction,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached the final time.
    Completed,
    /// `max|rho|` fell below `1e-12` of its initial value.
    Converged,
    /// `max|rho|` exceeded the blow-up threshold.
    BlowUp,
    /// Repeated rejections drove the step below `dt0 * 1e-6`.
    MinStepReached,
}

/// A finished or aborted run: the trajectory up to the last accepted step.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub termination: Termination,
    pub blowup_threshold: f64,
    /// Set when the run was aborted.
    pub failure: Option<Error>,
}

fn check_config(cfg: &SimulationConfig) -> Result<()> {
    let positive = [
        ("t_final", cfg.t_final),
        ("dt0", cfg.dt0),
        ("dt_max", cfg.dt_max),
        ("max_rel_change", cfg.max_rel_change),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if !(cfg.fit_window > 0.0 && cfg.fit_window <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fit_window must lie in (0, 1], got {}",
            cfg.fit_window
        )));
    }
    Ok(())
}

/// Largest admissible `max|rho0|`.
pub fn initial_data_bound(fs: &FlatStationary) -> f64 {
    fs.gap() / 8.0
}

/// Integrates from `rho0` with the adaptive controller and keeps whatever was
/// accepted even when the run aborts.
pub fn run_simulation(
    rho0: &[f64],
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    cfg: &SimulationConfig,
) -> Result<Simulation> {
    check_config(cfg)?;
    if rho0.len() != cfg.grid.nx {
        return Err(Error::InvalidArgument(format!(
            "initial data has {} samples, grid has {}",
            rho0.len(),
            cfg.grid.nx
        )));
    }
    let initial = max_abs(rho0);
    let bound = initial_data_bound(fs);
    if !(initial <= bound) {
        return Err(Error::GeometryViolation {
            reason: format!("max |rho0| = {initial:.6e} exceeds {bound:.6e}"),
        });
    }
    let mut eval = PsiEvaluator::new(params, fs, gamma, cfg.grid)?;
    if cfg.well_balanced {
        eval.subtract_flat_flux()?;
    }
    let margin = geometry_margin(fs);
    let blowup_threshold = if initial > 0.0 {
        (10.0 * initial).min(margin)
    } else {
        margin
    };
    let change_floor = 1e-3 * margin;
    let dt_min = cfg.dt0 * 1e-6;

    let mut fft = Periodic::new(cfg.grid.nx);
    let mut traj = Trajectory::default();
    let mut rho = rho0.to_vec();
    let mut t = 0.0;
    let mut dt = cfg.dt0.min(cfg.dt_max);
    traj.push(&mut fft, t, &rho);

    let mut termination = Termination::Completed;
    let mut failure = None;
    let end_tol = 1e-12 * cfg.t_final;
    while t < cfg.t_final - end_tol {
        let mut rejections = 0;
        let (next, taken, diag) = loop {
            let trial = dt.min(cfg.t_final - t);
            let attempt = step(&mut eval, t, &rho, trial, cfg.scheme).and_then(|next| {
                let change = next
                    .iter()
                    .zip(&rho)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                let rel = change / max_abs(&rho).max(change_floor);
                if rel > cfg.max_rel_change {
                    Err(Error::StepRejected {
                        t,
                        reason: format!("relative change {rel:.3e} exceeds {}", cfg.max_rel_change),
                    })
                } else {
                    Ok(next)
                }
            });
            match attempt {
                Ok(next) => break (next, trial, eval.last_diagnostics()),
                Err(_) => {
                    rejections += 1;
                    dt = 0.5 * trial;
                    if dt < dt_min {
                        termination = Termination::MinStepReached;
                        failure = Some(Error::MinStepReached { t, dt_min });
                        break (Vec::new(), 0.0, None);
                    }
                }
            }
        };
        if failure.is_some() {
            break;
        }
        t += taken;
        rho = next;
        traj.push(&mut fft, t, &rho);
        let d = diag.unwrap_or(PsiDiagnostics {
            psi_norm: f64::NAN,
            eta_min: f64::NAN,
            eta_max: f64::NAN,
            obstacle_iterations: 0,
            pressure_iterations: 0,
        });
        traj.diagnostics.push(StepDiagnostics {
            t,
            dt: taken,
            rejections,
            psi_norm: d.psi_norm,
            eta_min: d.eta_min,
            eta_max: d.eta_max,
            obstacle_iterations: d.obstacle_iterations,
            pressure_iterations: d.pressure_iterations,
        });
        dt = (1.2 * dt).min(cfg.dt_max);
        let amp = max_abs(&rho);
        if amp > blowup_threshold {
            termination = Termination::BlowUp;
            break;
        }
        if initial > 0.0 && amp < 1e-12 * initial {
            termination = Termination::Converged;
            break;
        }
    }

    traj.fitted_rates = fit_all_modes(&traj, cfg.fit_window);
    Ok(Simulation {
        trajectory: traj,
        termination,
        blowup_threshold,
        failure,
    })
}

/// Integrates from `rho0` up to `cfg.t_final` or a guard.
///
/// Fails with [`Error::MinStepReached`] when the step controller gives up;
/// use [`run_simulation`] to keep the partial trajectory in that case.
pub fn simulate(
    rho0: &[f64],
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    cfg: &SimulationConfig,
) -> Result<Trajectory> {
    let sim = run_simulation(rho0, params, fs, gamma, cfg)?;
    match sim.failure {
        Some(e) => Err(e),
        None => Ok(sim.trajectory),
    }
}

/// Window amplitudes below this are treated as numerical noise.
const NOISE_LEVEL: f64 = 1e3 * AMPLITUDE_FLOOR;

fn fit_all_modes(traj: &Trajectory, window: f64) -> Vec<ModeRate> {
    let n_modes = traj.mode_amplitudes.first().map_or(0, Vec::len);
    let n = traj.times.len();
    let start = n - ((n as f64 * window).ceil() as usize).min(n);
    (0..n_modes)
        .map(|k| {
            let series = traj.amplitude_series(k);
            if series[start..].iter().all(|&a| a < NOISE_LEVEL) {
                return ModeRate::BelowFloor { k };
            }
            match fit_log_linear(&traj.times, &series, window) {
                Ok(fit) => ModeRate::Fitted {
                    k,
                    rate: fit.rate,
                    r_squared: fit.r_squared,
                    samples: fit.samples,
                },
                Err(e) => ModeRate::Unavailable {
                    k,
                    reason: e.to_string(),
                },
            }
        })
        .collect()
}
