use serde::Serialize;

use super::psi::{GridConfig, PsiEvaluator};
use crate::error::{Error, Result};
use crate::fourier::{periodic_nodes, Periodic};
use crate::params::{FlatStationary, TumorParams};

/// Finite-difference estimate of one diagonal entry of `D Psi(0)` in the Fourier basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianProbe {
    pub k: u32,
    pub epsilon: f64,
    pub lambda_hat: f64,
    /// `sum_{m != k} A_m^2 / A_k^2` for the amplitudes of the response.
    pub leakage: f64,
}

/// Probes `D Psi(0)` with `epsilon cos(k x)` (a constant shift for `k = 0`).
///
/// Holds `Psi(0)` so that several wavenumbers can be probed against the same base state.
pub struct JacobianProber {
    eval: PsiEvaluator,
    base: Vec<f64>,
    fft: Periodic,
    x: Vec<f64>,
}

impl JacobianProber {
    pub fn new(
        params: &TumorParams,
        fs: &FlatStationary,
        gamma: f64,
        grid: GridConfig,
    ) -> Result<Self> {
        let mut eval = PsiEvaluator::new(params, fs, gamma, grid)?;
        let base = eval.evaluate(&vec![0.0; grid.nx])?;
        Ok(Self {
            eval,
            base,
            fft: Periodic::new(grid.nx),
            x: periodic_nodes(grid.nx),
        })
    }

    /// `Psi(0)` on this grid.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn probe(&mut self, k: u32, epsilon: f64) -> Result<JacobianProbe> {
        if !(1e-6..=1e-3).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "probe amplitude must lie in [1e-6, 1e-3], got {epsilon}"
            )));
        }
        let nx = self.x.len();
        if k as usize >= nx / 2 {
            return Err(Error::InvalidArgument(format!(
                "wavenumber {k} is not resolved by {nx} nodes"
            )));
        }
        let rho: Vec<f64> = self
            .x
            .iter()
            .map(|x| epsilon * (k as f64 * x).cos())
            .collect();
        // Each probe starts from the same state, independent of probe order.
        self.eval.reset();
        let psi = self.eval.evaluate(&rho)?;
        let diff: Vec<f64> = psi
            .iter()
            .zip(&self.base)
            .map(|(a, b)| (a - b) / epsilon)
            .collect();

        let coeffs = self.fft.coefficients(&diff);
        let ki = k as usize;
        let lambda_hat = if k == 0 {
            coeffs[0].re
        } else {
            2.0 * coeffs[ki].re
        };
        let amps = self.fft.mode_amplitudes(&diff);
        let main = amps[ki];
        let other: f64 = amps
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != ki)
            .map(|(_, a)| a * a)
            .sum();
        Ok(JacobianProbe {
            k,
            epsilon,
            lambda_hat,
            leakage: if main > 0.0 {
                other / (main * main)
            } else {
                f64::INFINITY
            },
        })
    }
}

/// One-shot probe of mode `k`.
pub fn numerical_jacobian_mode(
    k: u32,
    epsilon: f64,
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    grid: GridConfig,
) -> Result<JacobianProbe> {
    JacobianProber::new(params, fs, gamma, grid)?.probe(k, epsilon)
}
