use super::curvature::curvature;
use super::grid::StripGrid;
use super::obstacle::ObstacleSolution;
use super::operator::{FlatPreconditioner, MappedOperator, Metric};
use crate::error::{Error, Result};
use crate::fourier::Periodic;
use crate::linalg::{gmres, GmresOptions};
use crate::params::{FlatStationary, TumorParams};

#[derive(Debug, Clone)]
pub struct PressureSolution {
    /// Row-major nodal values, `ny + 1` rows of `nx`.
    pub p_field: Vec<f64>,
    /// `<grad p, (-rho_x, 1)>` on the upper surface.
    pub top_flux: Vec<f64>,
    /// Largest residual of the single-field discrete equations, which carry
    /// continuity of `p` and of its normal derivative across the interface.
    pub transmission_residual: f64,
    pub iterations: usize,
}

/// Fraction of a unit hat function centred at `0` lying below `t` (in units of its half-width).
fn hat_fraction_below(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t <= 0.0 {
        0.5 * (1.0 + t) * (1.0 + t)
    } else if t < 1.0 {
        1.0 - 0.5 * (1.0 - t) * (1.0 - t)
    } else {
        1.0
    }
}

/// Source `Delta p` sampled at the nodes: `nu` in the necrotic core,
/// `-mu (sigma - sigma_tilde)` in the proliferating layer, blended by the
/// share of each node's hat function lying below the interface.
pub(crate) fn pressure_source(
    grid: &StripGrid,
    params: &TumorParams,
    obstacle: &ObstacleSolution,
) -> Vec<f64> {
    let mut f = vec![0.0; grid.n_nodes()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            let theta = hat_fraction_below((obstacle.eta[i] - grid.y_physical(i, j)) / grid.dy(i));
            let growth = -params.mu * (obstacle.sigma_field[k] - params.sigma_tilde);
            f[k] = theta * params.nu + (1.0 - theta) * growth;
        }
    }
    f
}

/// Solves `Delta p = f` with `p = gamma K(rho)` on the surface and
/// `dp/dy = 0` on the bottom, and returns the surface flux.
pub fn solve_pressure(
    grid: &StripGrid,
    params: &TumorParams,
    fs: &FlatStationary,
    obstacle: &ObstacleSolution,
    gamma: f64,
) -> Result<PressureSolution> {
    solve_pressure_with(grid, params, fs, obstacle, gamma, None)
}

pub(crate) fn solve_pressure_with(
    grid: &StripGrid,
    params: &TumorParams,
    _fs: &FlatStationary,
    obstacle: &ObstacleSolution,
    gamma: f64,
    warm: Option<&[f64]>,
) -> Result<PressureSolution> {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.n_nodes();
    if obstacle.sigma_field.len() != n || obstacle.eta.len() != nx {
        return Err(Error::InvalidArgument(
            "obstacle solution does not match the grid".into(),
        ));
    }
    let metric = Metric::new(grid);
    let source = pressure_source(grid, params, obstacle);
    let kappa = curvature(&grid.rho);

    let mut b: Vec<f64> = source.iter().map(|v| -v).collect();
    for i in 0..nx {
        b[grid.idx(i, ny)] = gamma * kappa[i];
    }
    let mut p = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![0.0; n],
    };
    let fixed = vec![false; n];
    let mut op = MappedOperator::new(grid, &metric, 0.0, &fixed);
    let mut pc = FlatPreconditioner::new(grid, 0.0, None)?;
    let report =
        gmres(&mut op, &mut pc, &b, &mut p, &GmresOptions::default()).map_err(|e| match e {
            Error::NoConvergence { .. } => e,
            _ => Error::SingularSystem {
                what: "pressure solve",
            },
        })?;

    let mut r = vec![0.0; n];
    op.residual_form(&p, &mut r);
    let transmission_residual = (0..ny * nx)
        .map(|k| (r[k] - b[k]).abs())
        .fold(0.0, f64::max);

    let top_flux = surface_flux(grid, &p);
    Ok(PressureSolution {
        p_field: p,
        top_flux,
        transmission_residual,
        iterations: report.iterations,
    })
}

/// `<grad p, (-rho_x, 1)> = -rho_x U_x + (1 + rho_x^2) U_s / H` at `s = 1`.
fn surface_flux(grid: &StripGrid, p: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let ds = grid.ds();
    let top = &p[ny * nx..];
    let mut u_x = vec![0.0; nx];
    let mut scratch = vec![0.0; nx];
    Periodic::new(nx).derivatives(top, &mut u_x, &mut scratch);
    (0..nx)
        .map(|i| {
            let u_s = (3.0 * p[grid.idx(i, ny)] - 4.0 * p[grid.idx(i, ny - 1)]
                + p[grid.idx(i, ny - 2)])
                / (2.0 * ds);
            let slope = grid.slope[i];
            -slope * u_x[i] + (1.0 + slope * slope) * u_s / grid.height(i)
        })
        .collect()
}
