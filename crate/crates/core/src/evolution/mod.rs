//! Surface evolution `rho_t + Psi(rho) = 0` and its diagnostics.

mod export;
mod fit;
mod jacobian;
mod psi;
mod stepper;

pub use export::{write_trajectory_csv, ModeComparison, TrajectorySidecar};
pub use fit::{fit_log_linear, RateFit, AMPLITUDE_FLOOR, MIN_FIT_SAMPLES};
pub use jacobian::{numerical_jacobian_mode, JacobianProbe, JacobianProber};
pub use psi::{evaluate_psi, GridConfig, PsiDiagnostics, PsiEvaluator};
pub use stepper::{
    curvature_multiplier, decay_rate_fit, initial_data_bound, run_simulation, simulate, step,
    ModeRate, Scheme, Simulation, SimulationConfig, StepDiagnostics, Termination, Trajectory,
};
