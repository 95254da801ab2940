//! Nutrient obstacle and pressure solves on the mapped periodic strip.

mod boundary;
mod curvature;
mod grid;
mod obstacle;
mod operator;
mod pressure;
mod snapshot;

pub use boundary::extract_free_boundary;
pub use curvature::curvature;
pub use grid::{build_grid, geometry_margin, StripGrid, MIN_NX, MIN_NY};
pub use obstacle::{
    solve_nutrient_obstacle, solve_nutrient_obstacle_with, ObstacleMethod, ObstacleOptions,
    ObstacleSolution,
};
#[allow(unused_imports)]
pub(crate) use pressure::solve_pressure_with;
pub use pressure::{solve_pressure, PressureSolution};
pub use snapshot::write_field_snapshot;

use crate::params::TumorParams;

/// Absolute tolerances of the obstacle solve, scaled by the supply level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Proliferating classification: `sigma > sigma_hat + act`.
    pub act: f64,
    pub pde: f64,
    pub comp: f64,
}

impl Tolerances {
    pub fn new(params: &TumorParams) -> Self {
        Self {
            act: 1e-9 * params.sigma_bar,
            pde: 1e-8 * params.sigma_bar,
            comp: 1e-8 * params.sigma_bar,
        }
    }
}
