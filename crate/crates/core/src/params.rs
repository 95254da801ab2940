//! Model constants, the flat stationary state and its existence threshold.
//!
//! The flat state has a necrotic layer `0 < y < eta_s` where the nutrient sits
//! at the necrosis level `sigma_hat`, and a proliferating layer
//! `eta_s < y < rho_s` where it satisfies `sigma'' = sigma`. All profiles are
//! available in closed form; [`verify_stationary_residual`] re-checks them by
//! finite differencing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six positive model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TumorParams {
    /// External nutrient supply on the tumor surface.
    pub sigma_bar: f64,
    /// Nutrient level balancing apoptosis and mitosis.
    pub sigma_tilde: f64,
    /// Nutrient level below which cells become necrotic.
    pub sigma_hat: f64,
    /// Proliferation rate.
    pub mu: f64,
    /// Dissolution rate of necrotic cells.
    pub nu: f64,
    /// Cell-to-cell adhesiveness (surface tension coefficient).
    pub gamma: f64,
}

impl TumorParams {
    /// Validates the raw constants, see [`validate_params`].
    pub fn new(
        sigma_hat: f64,
        sigma_tilde: f64,
        sigma_bar: f64,
        mu: f64,
        nu: f64,
        gamma: f64,
    ) -> Result<Self> {
        validate_params(RawParams {
            sigma_hat,
            sigma_tilde,
            sigma_bar,
            mu,
            nu,
            gamma,
        })
    }

    /// Copy with a different adhesiveness. The new value is validated.
    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(
            self.sigma_hat,
            self.sigma_tilde,
            self.sigma_bar,
            self.mu,
            self.nu,
            gamma,
        )
    }

    /// Copy with a different dissolution rate. The new value is validated.
    pub fn with_nu(self, nu: f64) -> Result<Self> {
        Self::new(
            self.sigma_hat,
            self.sigma_tilde,
            self.sigma_bar,
            self.mu,
            nu,
            self.gamma,
        )
    }

    /// Copy with a different external supply. The new value is validated.
    pub fn with_sigma_bar(self, sigma_bar: f64) -> Result<Self> {
        Self::new(
            self.sigma_hat,
            self.sigma_tilde,
            sigma_bar,
            self.mu,
            self.nu,
            self.gamma,
        )
    }

    /// `sqrt(sigma_bar^2 - sigma_hat^2)`, the nutrient flux through the flat surface.
    pub fn surface_flux(&self) -> f64 {
        (self.sigma_bar * self.sigma_bar - self.sigma_hat * self.sigma_hat).sqrt()
    }
}

/// Unvalidated constants as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub sigma_hat: f64,
    pub sigma_tilde: f64,
    pub sigma_bar: f64,
    pub mu: f64,
    pub nu: f64,
    pub gamma: f64,
}

/// Checks `0 < sigma_hat < sigma_tilde < sigma_bar` and positivity of the rates.
pub fn validate_params(raw: RawParams) -> Result<TumorParams> {
    let named = [
        ("sigma_hat", raw.sigma_hat),
        ("sigma_tilde", raw.sigma_tilde),
        ("sigma_bar", raw.sigma_bar),
        ("mu", raw.mu),
        ("nu", raw.nu),
        ("gamma", raw.gamma),
    ];
    for (name, value) in named {
        if !value.is_finite() {
            return Err(Error::NonFinite { name, value });
        }
    }
    if !(0.0 < raw.sigma_hat && raw.sigma_hat < raw.sigma_tilde && raw.sigma_tilde < raw.sigma_bar)
    {
        return Err(Error::OrderingViolation {
            sigma_hat: raw.sigma_hat,
            sigma_tilde: raw.sigma_tilde,
            sigma_bar: raw.sigma_bar,
        });
    }
    for (name, value) in [("mu", raw.mu), ("nu", raw.nu), ("gamma", raw.gamma)] {
        if value <= 0.0 {
            return Err(Error::NonPositiveRate { name, value });
        }
    }
    Ok(TumorParams {
        sigma_bar: raw.sigma_bar,
        sigma_tilde: raw.sigma_tilde,
        sigma_hat: raw.sigma_hat,
        mu: raw.mu,
        nu: raw.nu,
        gamma: raw.gamma,
    })
}

/// `f(a, r) = sqrt(r^2 - 1) - a ln(r + sqrt(r^2 - 1))` for `r > 1`.
///
/// The sign of `f(sigma_tilde / sigma_hat, sigma_bar / sigma_hat)` is the sign
/// of `eta_s`.
pub fn threshold_function(a: f64, r: f64) -> f64 {
    let w = (r * r - 1.0).sqrt();
    w - a * (r + w).ln()
}

fn threshold_function_dr(a: f64, r: f64) -> f64 {
    (r - a) / (r * r - 1.0).sqrt()
}

const BISECTION_MAX_ITER: usize = 400;
const BRACKET_MAX_DOUBLINGS: usize = 200;

/// Root `a_* > a` of `r -> f(a, r)` for a given ratio `a > 1`.
pub fn threshold_ratio(a: f64) -> Result<f64> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ratio sigma_tilde/sigma_hat must exceed 1, got {a}"
        )));
    }
    // f(a, .) decreases on (1, a) and increases afterwards, so [a, hi] brackets
    // the unique root once f(a, hi) > 0.
    let mut lo = a;
    let mut hi = a * a.exp();
    let mut doublings = 0;
    while threshold_function(a, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > BRACKET_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::NoConvergence {
                what: "threshold bracketing",
                iterations: doublings,
                residual: threshold_function(a, lo).abs(),
            });
        }
    }

    let mut iterations = 0;
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if threshold_function(a, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > BISECTION_MAX_ITER {
            return Err(Error::NoConvergence {
                what: "threshold bisection",
                iterations,
                residual: hi - lo,
            });
        }
    }

    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = threshold_function_dr(a, r);
        if slope <= 0.0 {
            break;
        }
        let next = r - threshold_function(a, r) / slope;
        // Stay inside the bisection bracket.
        if next.is_finite() && next > lo && next < hi {
            r = next;
        }
    }
    Ok(r)
}

/// Smallest external supply admitting a flat stationary state:
/// `sigma_star = sigma_hat * a_*` with `a = sigma_tilde / sigma_hat`.
pub fn existence_threshold(sigma_hat: f64, sigma_tilde: f64) -> Result<f64> {
    if !(sigma_hat > 0.0 && sigma_tilde > sigma_hat) {
        return Err(Error::OrderingViolation {
            sigma_hat,
            sigma_tilde,
            sigma_bar: f64::NAN,
        });
    }
    Ok(sigma_hat * threshold_ratio(sigma_tilde / sigma_hat)?)
}

/// Heights and pressure constant of the flat stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatStationary {
    /// Height of the necrotic/proliferating interface.
    pub eta_s: f64,
    /// Height of the tumor surface.
    pub rho_s: f64,
    /// Pressure at the bottom of the necrotic layer, `p_s(0) = p0 - nu eta_s^2 / 2`.
    pub p0: f64,
}

/// Closed-form flat stationary state.
///
/// Fails with [`Error::NoFlatStationary`] when `sigma_bar <= sigma_star`,
/// including the degenerate boundary case of a zero-thickness necrotic layer.
pub fn flat_stationary(params: &TumorParams) -> Result<FlatStationary> {
    let sigma_star = existence_threshold(params.sigma_hat, params.sigma_tilde)?;
    if params.sigma_bar <= sigma_star {
        return Err(Error::NoFlatStationary {
            sigma_bar: params.sigma_bar,
            sigma_star,
        });
    }
    let TumorParams {
        sigma_bar,
        sigma_tilde,
        sigma_hat,
        mu,
        nu,
        ..
    } = *params;
    let flux = params.surface_flux();
    let log_top = (sigma_bar + flux).ln();
    let eta_s = mu / nu * (flux - sigma_tilde * log_top + sigma_tilde * sigma_hat.ln());
    let rho_s = eta_s + log_top - sigma_hat.ln();
    if !(eta_s > 0.0) {
        return Err(Error::NoFlatStationary {
            sigma_bar,
            sigma_star,
        });
    }
    Ok(FlatStationary::from_heights(params, eta_s, rho_s))
}

/// Which side of the stationary interface a branch formula belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Necrotic,
    Proliferating,
}

impl FlatStationary {
    /// Builds the state from the two heights, deriving `p0` from its closed form.
    /// No stationarity check is made; see [`verify_stationary_residual`].
    pub fn from_heights(params: &TumorParams, eta_s: f64, rho_s: f64) -> Self {
        let p0 = 0.5 * params.mu * params.sigma_tilde * (eta_s * eta_s - rho_s * rho_s)
            + (params.nu - params.mu * params.sigma_tilde) * (eta_s - rho_s) * eta_s
            + params.mu * (params.sigma_bar - params.sigma_hat);
        Self { eta_s, rho_s, p0 }
    }

    /// Thickness of the proliferating layer.
    pub fn gap(&self) -> f64 {
        self.rho_s - self.eta_s
    }

    /// Branch formula for the nutrient, valid as an analytic expression for any `y`.
    pub fn sigma_branch(&self, params: &TumorParams, layer: Layer, y: f64) -> f64 {
        match layer {
            Layer::Necrotic => params.sigma_hat,
            Layer::Proliferating => {
                (params.sigma_bar * (y - self.eta_s).sinh()
                    + params.sigma_hat * (self.rho_s - y).sinh())
                    / self.gap().sinh()
            }
        }
    }

    /// Branch formula for the pressure, valid as an analytic expression for any `y`.
    pub fn pressure_branch(&self, params: &TumorParams, layer: Layer, y: f64) -> f64 {
        match layer {
            Layer::Necrotic => 0.5 * params.nu * (y * y - self.eta_s * self.eta_s) + self.p0,
            Layer::Proliferating => {
                0.5 * params.mu * params.sigma_tilde * (y * y - self.rho_s * self.rho_s)
                    + (params.nu - params.mu * params.sigma_tilde) * (y - self.rho_s) * self.eta_s
                    + params.mu
                        * (params.sigma_bar - self.sigma_branch(params, Layer::Proliferating, y))
            }
        }
    }

    fn layer_of(&self, y: f64) -> Result<Layer> {
        if !(0.0..=self.rho_s).contains(&y) {
            return Err(Error::OutOfDomain {
                y,
                rho_s: self.rho_s,
            });
        }
        Ok(if y < self.eta_s {
            Layer::Necrotic
        } else {
            Layer::Proliferating
        })
    }
}

/// Stationary nutrient profile on `[0, rho_s]`.
pub fn eval_sigma_s(fs: &FlatStationary, params: &TumorParams, y: f64) -> Result<f64> {
    let layer = fs.layer_of(y)?;
    Ok(fs.sigma_branch(params, layer, y))
}

/// Stationary pressure profile on `[0, rho_s]`.
pub fn eval_p_s(fs: &FlatStationary, params: &TumorParams, y: f64) -> Result<f64> {
    let layer = fs.layer_of(y)?;
    Ok(fs.pressure_branch(params, layer, y))
}

/// One named side condition of the stationary two-layer problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCondition {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryResidualReport {
    /// Max over both layers of `|sigma'' - sigma chi_+|`.
    pub ode_residual_sigma: f64,
    /// Max over both layers of `|p'' + mu (sigma - sigma_tilde) chi_+ - nu chi_-|`.
    pub ode_residual_p: f64,
    pub interface_jump_residuals: Vec<SideCondition>,
    pub max_abs: f64,
}

// Fourth-order stencils on spacing h.
fn d2_central(f: &dyn Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    (-f(y + 2.0 * h) + 16.0 * f(y + h) - 30.0 * f(y) + 16.0 * f(y - h) - f(y - 2.0 * h))
        / (12.0 * h * h)
}

/// Second derivative from the six points `y, y + dir h, ..., y + 5 dir h`.
fn d2_one_sided(f: &dyn Fn(f64) -> f64, y: f64, h: f64, dir: f64) -> f64 {
    const C: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    C.iter()
        .enumerate()
        .map(|(i, c)| c * f(y + dir * h * i as f64))
        .sum::<f64>()
        / (12.0 * h * h)
}

/// First derivative from the five points `y, y + dir h, ..., y + 4 dir h`.
fn d1_one_sided(f: &dyn Fn(f64) -> f64, y: f64, h: f64, dir: f64) -> f64 {
    const C: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    dir * C
        .iter()
        .enumerate()
        .map(|(i, c)| c * f(y + dir * h * i as f64))
        .sum::<f64>()
        / (12.0 * h)
}

fn d2_in_layer(f: &dyn Fn(f64) -> f64, y: f64, h: f64, lo: f64, hi: f64) -> f64 {
    if y - 2.0 * h < lo {
        d2_one_sided(f, y, h, 1.0)
    } else if y + 2.0 * h > hi {
        d2_one_sided(f, y, h, -1.0)
    } else {
        d2_central(f, y, h)
    }
}

/// Re-derives the stationary ODEs and all side conditions by finite differences
/// of the closed forms, sampling `n_samples` points per layer.
pub fn verify_stationary_residual(
    fs: &FlatStationary,
    params: &TumorParams,
    n_samples: usize,
) -> StationaryResidualReport {
    let h = 1e-3 * fs.gap();
    let n = n_samples.max(2);
    let sigma_up = |y: f64| fs.sigma_branch(params, Layer::Proliferating, y);
    let sigma_lo = |y: f64| fs.sigma_branch(params, Layer::Necrotic, y);
    let p_up = |y: f64| fs.pressure_branch(params, Layer::Proliferating, y);
    let p_lo = |y: f64| fs.pressure_branch(params, Layer::Necrotic, y);

    let mut ode_sigma: f64 = 0.0;
    let mut ode_p: f64 = 0.0;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;

        let y = fs.eta_s + t * fs.gap();
        let s2 = d2_in_layer(&sigma_up, y, h, fs.eta_s, fs.rho_s);
        ode_sigma = ode_sigma.max((s2 - sigma_up(y)).abs());
        let p2 = d2_in_layer(&p_up, y, h, fs.eta_s, fs.rho_s);
        ode_p = ode_p.max((p2 + params.mu * (sigma_up(y) - params.sigma_tilde)).abs());

        let y = t * fs.eta_s;
        let s2 = d2_in_layer(&sigma_lo, y, h, 0.0, fs.eta_s);
        ode_sigma = ode_sigma.max(s2.abs());
        let p2 = d2_in_layer(&p_lo, y, h, 0.0, fs.eta_s);
        ode_p = ode_p.max((p2 - params.nu).abs());
    }

    let (eta, rho) = (fs.eta_s, fs.rho_s);
    let conditions = vec![
        SideCondition {
            name: "sigma(rho_s) = sigma_bar",
            residual: sigma_up(rho) - params.sigma_bar,
        },
        SideCondition {
            name: "p(rho_s) = 0",
            residual: p_up(rho),
        },
        SideCondition {
            name: "sigma(eta_s) = sigma_hat",
            residual: sigma_up(eta) - params.sigma_hat,
        },
        SideCondition {
            name: "sigma'(eta_s) = 0",
            residual: d1_one_sided(&sigma_up, eta, h, 1.0),
        },
        SideCondition {
            name: "p(eta_s+) = p(eta_s-)",
            residual: p_up(eta) - p_lo(eta),
        },
        SideCondition {
            name: "p'(eta_s+) = p'(eta_s-)",
            residual: d1_one_sided(&p_up, eta, h, 1.0) - d1_one_sided(&p_lo, eta, h, -1.0),
        },
        SideCondition {
            name: "sigma'(0) = 0",
            residual: d1_one_sided(&sigma_lo, 0.0, h, 1.0),
        },
        SideCondition {
            name: "p'(0) = 0",
            residual: d1_one_sided(&p_lo, 0.0, h, 1.0),
        },
        SideCondition {
            name: "p'(rho_s) = 0",
            residual: d1_one_sided(&p_up, rho, h, -1.0),
        },
    ];
    let max_abs = conditions
        .iter()
        .map(|c| c.residual.abs())
        .fold(ode_sigma.max(ode_p), f64::max);
    StationaryResidualReport {
        ode_residual_sigma: ode_sigma,
        ode_residual_p: ode_p,
        interface_jump_residuals: conditions,
        max_abs,
    }
}
