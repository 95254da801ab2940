//! Closed-form spectrum of the linearization about the flat stationary state.
//!
//! A surface perturbation `zeta = sum c_k e^{ikx}` relaxes mode by mode:
//! `d c_k / dt = -lambda_k(gamma) c_k` with
//!
//! ```text
//! lambda_k(gamma) = k^3 tanh(k rho_s) (gamma - gamma_k),   k != 0
//! lambda_0        = nu
//! ```
//!
//! so the flat state is stable exactly when `gamma > gamma_* = sup_k gamma_k`.

mod oracle;

pub use oracle::bvp_oracle_lambda;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{flat_stationary, FlatStationary, TumorParams};

/// Arguments above this use exponentially scaled forms of the hyperbolic ratios.
const LARGE_ARG: f64 = 30.0;

/// `coth x` written to stay accurate for large `|x|`.
pub(crate) fn coth(x: f64) -> f64 {
    if x < 0.0 {
        return -coth(-x);
    }
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// `sinh(a) / sinh(b)` for `0 <= a <= b`.
pub(crate) fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b > LARGE_ARG {
        (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
    } else {
        a.sinh() / b.sinh()
    }
}

/// `cosh(a) / cosh(b)` for `0 <= a, b`.
pub(crate) fn cosh_ratio(a: f64, b: f64) -> f64 {
    if a.max(b) > LARGE_ARG {
        (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
    } else {
        a.cosh() / b.cosh()
    }
}

/// Shared pieces of the mode-k formulas.
struct ModeTerms {
    /// `k tanh(k rho_s)` (even in k)
    k_tanh: f64,
    /// `sqrt(k^2+1) coth(sqrt(k^2+1) gap)`
    big_k_coth: f64,
    /// `sqrt(k^2+1) q / (sigma_hat sinh(k gap) sinh(sqrt(k^2+1) gap) [coth(k gap) + tanh(k eta_s)])`
    interface: f64,
}

impl ModeTerms {
    fn new(params: &TumorParams, fs: &FlatStationary, k: i64) -> Self {
        debug_assert!(k != 0);
        let kf = k as f64;
        let gap = fs.gap();
        let big_k = (kf * kf + 1.0).sqrt();
        let q = params.surface_flux();
        let k_tanh = kf * (kf * fs.rho_s).tanh();
        let big_k_coth = big_k * coth(big_k * gap);
        let interface = if kf.abs() * gap <= LARGE_ARG {
            // Direct signed evaluation; even in k by construction.
            let denom = params.sigma_hat
                * (kf * gap).sinh()
                * (big_k * gap).sinh()
                * (coth(kf * gap) + (kf * fs.eta_s).tanh());
            big_k * q / denom
        } else {
            let ka = kf.abs();
            let log_s = big_k * gap + ka * gap - 4f64.ln()
                + (-(-2.0 * big_k * gap).exp_m1()).ln()
                + ((1.0 + (-2.0 * ka * gap).exp())
                    + (-(-2.0 * ka * gap).exp_m1()) * (ka * fs.eta_s).tanh())
                .ln();
            big_k * q / params.sigma_hat * (-log_s).exp()
        };
        Self {
            k_tanh,
            big_k_coth,
            interface,
        }
    }
}

/// Eigenvalue `lambda_k(gamma)` of the linearized surface operator.
/// Defined for every integer `k`; `lambda_{-k} = lambda_k`.
pub fn lambda_k(params: &TumorParams, fs: &FlatStationary, k: i64, gamma: f64) -> f64 {
    if k == 0 {
        return params.nu;
    }
    let t = ModeTerms::new(params, fs, k);
    let kf = k as f64;
    let q = params.surface_flux();
    gamma * kf * kf * t.k_tanh
        + params.mu * q * (t.big_k_coth - t.k_tanh)
        + (params.nu - params.mu * params.sigma_tilde) * t.interface
        - params.mu * (params.sigma_bar - params.sigma_tilde)
}

/// `k^3 tanh(k rho_s)`, the slope of `gamma -> lambda_k(gamma)`.
pub fn curvature_symbol(fs: &FlatStationary, k: i64) -> f64 {
    let kf = k as f64;
    kf * kf * kf * (kf * fs.rho_s).tanh()
}

/// Critical adhesiveness of mode `k`: `lambda_k(gamma_k) = 0`.
pub fn gamma_k(params: &TumorParams, fs: &FlatStationary, k: i64) -> f64 {
    assert!(k != 0, "gamma_k is defined for k != 0");
    let t = ModeTerms::new(params, fs, k);
    let q = params.surface_flux();
    let bracket = params.mu * q * (t.k_tanh - t.big_k_coth)
        + (params.mu * params.sigma_tilde - params.nu) * t.interface
        + params.mu * (params.sigma_bar - params.sigma_tilde);
    bracket / curvature_symbol(fs, k)
}

/// Smallest admissible `k_max` for [`gamma_star`].
pub const MIN_K_MAX: u32 = 8;

/// Supremum of the critical values over `1 <= k <= k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaStar {
    pub value: f64,
    /// Every k whose `gamma_k` is within relative `1e-12` of the max, ascending.
    pub argmax_k: Vec<i64>,
    /// The tail bound `2 mu (sigma_bar - sigma_tilde) / (K^3 tanh(K rho_s))`
    /// lies below the enumerated max.
    pub tail_bound_ok: bool,
}

impl GammaStar {
    /// Smallest maximizing wavenumber.
    pub fn leading_mode(&self) -> i64 {
        self.argmax_k[0]
    }
}

fn tail_bound(params: &TumorParams, fs: &FlatStationary, k_max: u32) -> f64 {
    2.0 * params.mu * (params.sigma_bar - params.sigma_tilde) / curvature_symbol(fs, k_max as i64)
}

/// `gamma_* = max_{1 <= k <= k_max} gamma_k` with a certificate that no
/// larger `gamma_k` exists past `k_max`.
pub fn gamma_star(params: &TumorParams, fs: &FlatStationary, k_max: u32) -> Result<GammaStar> {
    if k_max < MIN_K_MAX {
        return Err(Error::InvalidArgument(format!(
            "k_max must be at least {MIN_K_MAX}, got {k_max}"
        )));
    }
    let values: Vec<f64> = (1..=k_max as i64).map(|k| gamma_k(params, fs, k)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax_k: Vec<i64> = values
        .iter()
        .enumerate()
        .filter(|(_, &g)| (max - g).abs() <= 1e-12 * max.abs())
        .map(|(i, _)| i as i64 + 1)
        .collect();
    let tail_bound_ok = tail_bound(params, fs, k_max) < max;
    if !tail_bound_ok {
        let mut suggested = k_max;
        while tail_bound(params, fs, suggested) >= max && suggested < u32::MAX / 2 {
            suggested *= 2;
        }
        return Err(Error::TailNotCertified { k_max, suggested });
    }
    Ok(GammaStar {
        value: max,
        argmax_k,
        tail_bound_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub gamma: f64,
    /// `(k, lambda_k(gamma))` for `0 <= k <= k_max`.
    pub lambda: Vec<(i64, f64)>,
    /// `(k, gamma_k)` for `1 <= k <= k_max`.
    pub gamma_crit: Vec<(i64, f64)>,
    pub gamma_star: f64,
    pub argmax_k: Vec<i64>,
    pub classification: Stability,
    pub unstable_modes: Vec<i64>,
    pub tail_bound_ok: bool,
}

impl SpectrumReport {
    /// Smallest eigenvalue over the enumerated modes.
    pub fn min_lambda(&self) -> f64 {
        self.lambda
            .iter()
            .map(|&(_, l)| l)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Enumerates the spectrum at `gamma` and classifies the flat state.
pub fn classify_stability(
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    k_max: u32,
) -> Result<SpectrumReport> {
    let star = gamma_star(params, fs, k_max)?;
    let lambda: Vec<(i64, f64)> = (0..=k_max as i64)
        .map(|k| (k, lambda_k(params, fs, k, gamma)))
        .collect();
    let gamma_crit = (1..=k_max as i64)
        .map(|k| (k, gamma_k(params, fs, k)))
        .collect();
    let classification = if (gamma - star.value).abs() <= 1e-12 * star.value {
        Stability::Marginal
    } else if gamma > star.value {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    let unstable_modes = lambda
        .iter()
        .filter(|&&(_, l)| l < 0.0)
        .map(|&(k, _)| k)
        .collect();
    Ok(SpectrumReport {
        gamma,
        lambda,
        gamma_crit,
        gamma_star: star.value,
        argmax_k: star.argmax_k,
        classification,
        unstable_modes,
        tail_bound_ok: star.tail_bound_ok,
    })
}

/// Closed-form response of every field to a unit surface mode `c_k = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ModeShape {
    k: i64,
    gamma: f64,
    params: TumorParams,
    fs: FlatStationary,
    d: f64,
    e: Option<f64>,
}

impl ModeShape {
    pub fn new(params: &TumorParams, fs: &FlatStationary, k: i64, gamma: f64) -> Self {
        let ka = k.unsigned_abs() as f64;
        let big_k = (ka * ka + 1.0).sqrt();
        let gap = fs.gap();
        let q = params.surface_flux();
        // sqrt(k^2+1) q / (sigma_hat sinh(sqrt(k^2+1) gap))
        let inv_sinh = if big_k * gap > LARGE_ARG {
            2.0 * (-big_k * gap).exp() / (-(-2.0 * big_k * gap).exp_m1())
        } else {
            1.0 / (big_k * gap).sinh()
        };
        let d = big_k * q / params.sigma_hat * inv_sinh;
        let e = (k != 0).then(|| {
            (params.mu * params.sigma_tilde - params.nu) * d
                / (ka * (coth(ka * gap) + (ka * fs.eta_s).tanh()))
        });
        Self {
            k,
            gamma,
            params: *params,
            fs: *fs,
            d,
            e,
        }
    }

    /// Displacement coefficient of the necrotic interface.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Coefficient of the interface-driven pressure correction (`None` for k = 0).
    pub fn e(&self) -> Option<f64> {
        self.e
    }

    /// Nutrient perturbation profile; zero in the necrotic layer.
    pub fn a(&self, y: f64) -> f64 {
        let fs = &self.fs;
        if y < fs.eta_s {
            return 0.0;
        }
        let ka = self.k.unsigned_abs() as f64;
        let big_k = (ka * ka + 1.0).sqrt();
        -sinh_ratio(big_k * (y - fs.eta_s), big_k * fs.gap()) * self.params.surface_flux()
    }

    /// Pressure perturbation profile using the branch of `layer`-side formula.
    pub fn b_branch(&self, layer: crate::params::Layer, y: f64) -> f64 {
        use crate::params::Layer;
        let p = &self.params;
        let fs = &self.fs;
        let q = p.surface_flux();
        if self.k == 0 {
            let drive = p.mu * p.sigma_tilde - p.nu;
            return match layer {
                Layer::Proliferating => {
                    p.mu * q * ((y - fs.eta_s).sinh() / fs.gap().sinh() - 1.0)
                        + drive * (fs.rho_s - y)
                }
                Layer::Necrotic => -p.mu * q + drive * fs.gap(),
            };
        }
        let ka = self.k.unsigned_abs() as f64;
        let kf = self.k as f64;
        let alpha = self.gamma * kf * kf - p.mu * q;
        let e = self.e.unwrap_or(0.0);
        match layer {
            Layer::Proliferating => {
                let big_k = (ka * ka + 1.0).sqrt();
                let a = -sinh_ratio(big_k * (y - fs.eta_s), big_k * fs.gap()) * q;
                -p.mu * a
                    + alpha * cosh_ratio(ka * y, ka * fs.rho_s)
                    + e * sinh_ratio(ka * (fs.rho_s - y), ka * fs.gap())
            }
            Layer::Necrotic => {
                alpha * cosh_ratio(ka * y, ka * fs.rho_s) + e * cosh_ratio(ka * y, ka * fs.eta_s)
            }
        }
    }

    pub fn b(&self, y: f64) -> f64 {
        use crate::params::Layer;
        let layer = if y < self.fs.eta_s {
            Layer::Necrotic
        } else {
            Layer::Proliferating
        };
        self.b_branch(layer, y)
    }
}

/// Sampled mode profiles and their scalar coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeProfile {
    pub k: i64,
    /// Sample points on `[eta_s, rho_s]` and the nutrient profile there.
    pub y_a: Vec<f64>,
    pub a_k: Vec<f64>,
    /// Sample points on `[0, rho_s]` and the pressure profile there.
    pub y_b: Vec<f64>,
    pub b_k: Vec<f64>,
    pub d_k: f64,
    /// Absent for the mean mode, where the pressure response has no such term.
    pub e_k: Option<f64>,
}

pub fn mode_profiles(
    params: &TumorParams,
    fs: &FlatStationary,
    k: i64,
    gamma: f64,
    n_samples: usize,
) -> ModeProfile {
    let shape = ModeShape::new(params, fs, k, gamma);
    let n = n_samples.max(2);
    let y_a: Vec<f64> = (0..n)
        .map(|i| fs.eta_s + fs.gap() * i as f64 / (n - 1) as f64)
        .collect();
    let y_b: Vec<f64> = (0..n)
        .map(|i| fs.rho_s * i as f64 / (n - 1) as f64)
        .collect();
    ModeProfile {
        k,
        a_k: y_a.iter().map(|&y| shape.a(y)).collect(),
        b_k: y_b.iter().map(|&y| shape.b(y)).collect(),
        y_a,
        y_b,
        d_k: shape.d(),
        e_k: shape.e(),
    }
}

/// `gamma_*` as a function of the dissolution rate, all other constants fixed.
/// Output is sorted by `nu`.
pub fn gamma_star_sensitivity(
    params: &TumorParams,
    nu_grid: &[f64],
    k_max: u32,
) -> Result<Vec<(f64, f64)>> {
    let mut nus = nu_grid.to_vec();
    nus.sort_by(f64::total_cmp);
    nus.iter()
        .map(|&nu| {
            let p = params.with_nu(nu)?;
            let fs = flat_stationary(&p)?;
            Ok((nu, gamma_star(&p, &fs, k_max)?.value))
        })
        .collect()
}
