use serde::{Deserialize, Serialize};

use crate::elliptic::{
    build_grid, solve_nutrient_obstacle_with, solve_pressure_with, ObstacleOptions,
    ObstacleSolution,
};
use crate::error::{Error, Result};
use crate::params::{FlatStationary, TumorParams};

/// Resolution of the mapped strip used by every surface-flux evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nx: 128, ny: 256 }
    }
}

/// Solver statistics of the most recent evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiDiagnostics {
    pub psi_norm: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub obstacle_iterations: usize,
    pub pressure_iterations: usize,
}

/// Evaluates the reduced operator `Psi(rho)`, so that `rho_t = -Psi(rho)`.
///
/// Each evaluation is seeded from the previous one, which makes a sequence of
/// nearby evaluations cheap. Results do not depend on the seed beyond solver
/// tolerance.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    params: TumorParams,
    fs: FlatStationary,
    gamma: f64,
    grid: GridConfig,
    warm_obstacle: Option<ObstacleSolution>,
    warm_pressure: Option<Vec<f64>>,
    last: Option<PsiDiagnostics>,
    flat_flux: Option<Vec<f64>>,
}

impl PsiEvaluator {
    pub fn new(
        params: &TumorParams,
        fs: &FlatStationary,
        gamma: f64,
        grid: GridConfig,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::NonPositiveRate {
                name: "gamma",
                value: gamma,
            });
        }
        // Validates the grid shape up front.
        build_grid(grid.nx, grid.ny, fs, &vec![0.0; grid.nx])?;
        Ok(Self {
            params: *params,
            fs: *fs,
            gamma,
            grid,
            warm_obstacle: None,
            warm_pressure: None,
            last: None,
            flat_flux: None,
        })
    }

    pub fn params(&self) -> &TumorParams {
        &self.params
    }

    pub fn flat_state(&self) -> &FlatStationary {
        &self.fs
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn last_diagnostics(&self) -> Option<PsiDiagnostics> {
        self.last
    }

    /// Drops the warm-start state so the next evaluation starts from scratch.
    pub fn reset(&mut self) {
        self.warm_obstacle = None;
        self.warm_pressure = None;
    }

    /// From now on, subtract the discrete flux of the flat state, making
    /// `rho = 0` an exact equilibrium on this grid.
    pub fn subtract_flat_flux(&mut self) -> Result<()> {
        self.flat_flux = None;
        let base = self.evaluate(&vec![0.0; self.grid.nx])?;
        self.flat_flux = Some(base);
        Ok(())
    }

    pub fn evaluate(&mut self, rho: &[f64]) -> Result<Vec<f64>> {
        let grid = build_grid(self.grid.nx, self.grid.ny, &self.fs, rho)?;
        let obstacle = solve_nutrient_obstacle_with(
            &grid,
            &self.params,
            &self.fs,
            &ObstacleOptions::default(),
            self.warm_obstacle.as_ref(),
        )?;
        let pressure = solve_pressure_with(
            &grid,
            &self.params,
            &self.fs,
            &obstacle,
            self.gamma,
            self.warm_pressure.as_deref(),
        )?;
        self.last = Some(PsiDiagnostics {
            psi_norm: pressure.top_flux.iter().fold(0.0, |m, v| m.max(v.abs())),
            eta_min: obstacle.eta.iter().copied().fold(f64::INFINITY, f64::min),
            eta_max: obstacle
                .eta
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            obstacle_iterations: obstacle.iterations,
            pressure_iterations: pressure.iterations,
        });
        self.warm_obstacle = Some(obstacle);
        let mut psi = pressure.top_flux;
        self.warm_pressure = Some(pressure.p_field);
        if let Some(base) = &self.flat_flux {
            psi.iter_mut().zip(base).for_each(|(v, b)| *v -= b);
        }
        Ok(psi)
    }
}

/// One cold evaluation of `Psi(rho)`.
pub fn evaluate_psi(
    rho: &[f64],
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    grid: GridConfig,
) -> Result<Vec<f64>> {
    PsiEvaluator::new(params, fs, gamma, grid)?.evaluate(rho)
}
