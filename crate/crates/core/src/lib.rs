//! Linear stability and free-boundary simulation of a flat tumor slab with a
//! necrotic core, on a horizontally periodic strip.
//!
//! The crate is layered bottom-up:
//! [`params`] (validated constants and the flat stationary state),
//! [`spectral`] (closed-form spectrum of the linearization),
//! [`elliptic`] (nutrient obstacle and pressure solves on the perturbed strip)
//! and [`evolution`] (surface evolution and rate diagnostics).

pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod linalg;
pub mod params;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use params::{
    eval_p_s, eval_sigma_s, existence_threshold, flat_stationary, threshold_function,
    threshold_ratio, validate_params, verify_stationary_residual, FlatStationary, Layer, RawParams,
    SideCondition, StationaryResidualReport, TumorParams,
};
pub use spectral::{
    bvp_oracle_lambda, classify_stability, gamma_k, gamma_star, gamma_star_sensitivity, lambda_k,
    mode_profiles, GammaStar, ModeProfile, ModeShape, SpectrumReport, Stability,
};
