use thiserror::Error;

/// Everything that can go wrong across the stationary, spectral, elliptic
/// and evolution layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ordering violated: need 0 < sigma_hat ({sigma_hat}) < sigma_tilde ({sigma_tilde}) < sigma_bar ({sigma_bar})")]
    OrderingViolation {
        sigma_hat: f64,
        sigma_tilde: f64,
        sigma_bar: f64,
    },

    #[error("rate `{name}` must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("parameter `{name}` is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },

    #[error("no flat stationary solution: sigma_bar = {sigma_bar} does not exceed the threshold sigma_star = {sigma_star}")]
    NoFlatStationary { sigma_bar: f64, sigma_star: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("y = {y} lies outside [0, {rho_s}]")]
    OutOfDomain { y: f64, rho_s: f64 },

    #[error("tail of gamma_k not certified at k_max = {k_max}; retry with k_max >= {suggested}")]
    TailNotCertified { k_max: u32, suggested: u32 },

    #[error("singular linear system in {what}")]
    SingularSystem { what: &'static str },

    #[error("geometry violation: {reason}")]
    GeometryViolation { reason: String },

    #[error("degenerate active set: {reason}")]
    DegenerateActiveSet { reason: String },

    #[error("column {column} switches between necrotic and proliferating more than once")]
    NonMonotoneColumn { column: usize },

    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("time step fell below {dt_min:e} at t = {t}")]
    MinStepReached { t: f64, dt_min: f64 },

    #[error("rate fit needs at least {needed} samples in the window, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("mode amplitude is not positive at sample {index}")]
    NonPositiveAmplitude { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Broad class of a failure, used by front ends to pick exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::OrderingViolation { .. }
            | Error::NonPositiveRate { .. }
            | Error::NonFinite { .. }
            | Error::OutOfDomain { .. }
            | Error::InvalidArgument(_) => ErrorKind::Validation,
            Error::NoFlatStationary { .. }
            | Error::GeometryViolation { .. }
            | Error::DegenerateActiveSet { .. } => ErrorKind::ModelRegime,
            Error::NoConvergence { .. }
            | Error::TailNotCertified { .. }
            | Error::SingularSystem { .. }
            | Error::NonMonotoneColumn { .. }
            | Error::StepRejected { .. }
            | Error::MinStepReached { .. }
            | Error::InsufficientData { .. }
            | Error::NonPositiveAmplitude { .. } => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    ModelRegime,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
