use serde::Serialize;

use super::boundary::extract_free_boundary;
use super::grid::StripGrid;
use super::operator::{CirculantDerivatives, FlatPreconditioner, MappedOperator, Metric};
use super::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{gmres, GmresOptions};
use crate::params::{FlatStationary, Layer, TumorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObstacleMethod {
    ActiveSet,
    ProjectedGaussSeidel,
}

#[derive(Debug, Clone, Copy)]
pub struct ObstacleOptions {
    pub max_active_set_iterations: usize,
    pub max_sweeps: usize,
    /// Skip the active-set iteration and go straight to projected Gauss-Seidel.
    pub force_gauss_seidel: bool,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        Self {
            max_active_set_iterations: 50,
            max_sweeps: 100_000,
            force_gauss_seidel: false,
        }
    }
}

/// Nutrient field on the mapped strip together with its free boundary.
#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    /// Row-major nodal values, `ny + 1` rows of `nx`.
    pub sigma_field: Vec<f64>,
    /// Proliferating nodes: `sigma > sigma_hat + tol_act`.
    pub active_mask: Vec<bool>,
    /// Physical height of the necrotic interface per column.
    pub eta: Vec<f64>,
    pub complementarity_residual: f64,
    /// Largest `|-Delta_h sigma + sigma|` over proliferating nodes.
    pub pde_residual: f64,
    pub sigma_hat: f64,
    pub method: ObstacleMethod,
    pub iterations: usize,
    /// Coincidence set of the discrete obstacle problem (warm start for the next solve).
    pub(crate) coincident: Vec<bool>,
}

/// Solves `-Delta sigma + sigma >= 0`, `sigma >= sigma_hat` with complementarity,
/// `sigma = sigma_bar` on the surface and `d sigma / dy = 0` on the bottom.
pub fn solve_nutrient_obstacle(
    grid: &StripGrid,
    params: &TumorParams,
    fs: &FlatStationary,
) -> Result<ObstacleSolution> {
    solve_nutrient_obstacle_with(grid, params, fs, &ObstacleOptions::default(), None)
}

/// As [`solve_nutrient_obstacle`], optionally seeded from a previous solution
/// on a grid of the same shape.
pub fn solve_nutrient_obstacle_with(
    grid: &StripGrid,
    params: &TumorParams,
    fs: &FlatStationary,
    opts: &ObstacleOptions,
    warm: Option<&ObstacleSolution>,
) -> Result<ObstacleSolution> {
    let tol = Tolerances::new(params);
    let n = grid.n_nodes();
    let (nx, ny) = (grid.nx, grid.ny);
    let sigma_hat = params.sigma_hat;
    let metric = Metric::new(grid);

    let warm = warm.filter(|w| w.sigma_field.len() == n);
    let (mut x, mut coincident) = match warm {
        Some(w) => (w.sigma_field.clone(), w.coincident.clone()),
        None => initial_guess(grid, params, fs),
    };
    for i in 0..nx {
        x[grid.idx(i, ny)] = params.sigma_bar;
    }

    let mut method = ObstacleMethod::ActiveSet;
    let mut iterations = 0;
    let mut converged = false;
    if !opts.force_gauss_seidel {
        let mut history: Vec<Vec<bool>> = vec![coincident.clone()];
        let mut r = vec![0.0; n];
        for it in 1..=opts.max_active_set_iterations {
            iterations = it;
            solve_with_coincidence(grid, &metric, params, &coincident, &mut x)?;
            let mut op = MappedOperator::new(grid, &metric, 1.0, &coincident);
            op.residual_form(&x, &mut r);
            let next: Vec<bool> = (0..n)
                .map(|k| {
                    k < ny * nx
                        && if coincident[k] {
                            r[k] > 0.0
                        } else {
                            x[k] < sigma_hat
                        }
                })
                .collect();
            if next == coincident {
                converged = true;
                break;
            }
            if history.contains(&next) {
                break;
            }
            history.push(next.clone());
            coincident = next;
        }
    }
    if !converged {
        method = ObstacleMethod::ProjectedGaussSeidel;
        for v in &mut x[..ny * nx] {
            *v = v.max(sigma_hat);
        }
        iterations = projected_gauss_seidel(grid, &metric, params, &tol, opts.max_sweeps, &mut x)?;
        coincident = (0..n).map(|k| k < ny * nx && x[k] <= sigma_hat).collect();
    }

    finish(
        grid, &metric, params, &tol, x, coincident, method, iterations,
    )
}

fn initial_guess(
    grid: &StripGrid,
    params: &TumorParams,
    fs: &FlatStationary,
) -> (Vec<f64>, Vec<bool>) {
    let n = grid.n_nodes();
    let mut x = vec![params.sigma_hat; n];
    let mut coincident = vec![false; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            // Shift so that each column keeps the stationary layer thickness below its surface.
            let y = grid.y_physical(i, j) - (grid.height(i) - fs.rho_s);
            if y < fs.eta_s {
                coincident[k] = true;
            } else {
                x[k] = fs.sigma_branch(params, Layer::Proliferating, y);
            }
        }
    }
    (x, coincident)
}

/// Number of contiguous coincidence rows from the bottom common to all columns, minus one.
fn common_fixed_rows(grid: &StripGrid, coincident: &[bool]) -> Option<usize> {
    let depth = (0..grid.nx)
        .map(|i| {
            (0..grid.ny)
                .take_while(|&j| coincident[grid.idx(i, j)])
                .count()
        })
        .min()
        .unwrap_or(0);
    depth.checked_sub(1)
}

fn solve_with_coincidence(
    grid: &StripGrid,
    metric: &Metric,
    params: &TumorParams,
    coincident: &[bool],
    x: &mut [f64],
) -> Result<()> {
    let n = grid.n_nodes();
    let top = grid.ny * grid.nx;
    let mut b = vec![0.0; n];
    for k in 0..n {
        if k >= top {
            b[k] = params.sigma_bar;
        } else if coincident[k] {
            b[k] = params.sigma_hat;
        }
    }
    let mut op = MappedOperator::new(grid, metric, 1.0, coincident);
    let mut pc = FlatPreconditioner::new(grid, 1.0, common_fixed_rows(grid, coincident))?;
    gmres(&mut op, &mut pc, &b, x, &GmresOptions::default())?;
    Ok(())
}

fn projected_gauss_seidel(
    grid: &StripGrid,
    metric: &Metric,
    params: &TumorParams,
    tol: &Tolerances,
    max_sweeps: usize,
    x: &mut [f64],
) -> Result<usize> {
    let (nx, ny) = (grid.nx, grid.ny);
    let ds = grid.ds();
    let d = CirculantDerivatives::new(nx);
    let ent = CirculantDerivatives::entry;
    let n = grid.n_nodes();
    let no_fixed = vec![false; n];
    let mut r = vec![0.0; n];
    for sweep in 1..=max_sweeps {
        let mut max_update = 0.0_f64;
        for j in 0..ny {
            let s = grid.y_map[j];
            for i in 0..nx {
                let g = metric.g[i];
                let k = grid.idx(i, j);
                let mut lap = 0.0;
                for m in 0..nx {
                    lap += ent(&d.second, i, m) * x[grid.idx(m, j)];
                }
                let diag;
                if j == 0 {
                    lap += metric.inv_h2[i] * 2.0 * (x[k + nx] - x[k]) / (ds * ds);
                    diag = -ent(&d.second, i, i) + 2.0 * metric.inv_h2[i] / (ds * ds) + 1.0;
                } else {
                    let mut u_xs = 0.0;
                    for m in 0..nx {
                        u_xs +=
                            ent(&d.first, i, m) * (x[grid.idx(m, j + 1)] - x[grid.idx(m, j - 1)]);
                    }
                    u_xs /= 2.0 * ds;
                    let c_ss = s * s * g * g + metric.inv_h2[i];
                    lap += -2.0 * s * g * u_xs
                        + c_ss * (x[k + nx] - 2.0 * x[k] + x[k - nx]) / (ds * ds)
                        + s * metric.drift[i] * (x[k + nx] - x[k - nx]) / (2.0 * ds);
                    diag = -ent(&d.second, i, i) + 2.0 * c_ss / (ds * ds) + 1.0;
                }
                let res = -lap + x[k];
                let next = (x[k] - res / diag).max(params.sigma_hat);
                max_update = max_update.max((next - x[k]).abs());
                x[k] = next;
            }
        }
        if sweep % 10 == 0 || max_update == 0.0 {
            let mut op = MappedOperator::new(grid, metric, 1.0, &no_fixed);
            op.residual_form(x, &mut r);
            let comp = (0..ny * nx)
                .map(|k| (x[k] - params.sigma_hat).min(r[k]).abs())
                .fold(0.0, f64::max);
            if comp <= 0.5 * tol.comp {
                return Ok(sweep);
            }
        }
    }
    Err(Error::NoConvergence {
        what: "projected Gauss-Seidel",
        iterations: max_sweeps,
        residual: f64::NAN,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    grid: &StripGrid,
    metric: &Metric,
    params: &TumorParams,
    tol: &Tolerances,
    x: Vec<f64>,
    coincident: Vec<bool>,
    method: ObstacleMethod,
    iterations: usize,
) -> Result<ObstacleSolution> {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.n_nodes();
    let no_fixed = vec![false; n];
    let mut r = vec![0.0; n];
    MappedOperator::new(grid, metric, 1.0, &no_fixed).residual_form(&x, &mut r);

    let active_mask: Vec<bool> = (0..n)
        .map(|k| k >= ny * nx || x[k] > params.sigma_hat + tol.act)
        .collect();
    let complementarity_residual = (0..ny * nx)
        .map(|k| (x[k] - params.sigma_hat).min(r[k]).abs())
        .fold(0.0, f64::max);
    let pde_residual = (0..ny * nx)
        .filter(|&k| active_mask[k])
        .map(|k| r[k].abs())
        .fold(0.0, f64::max);

    for i in 0..nx {
        if active_mask[grid.idx(i, 0)] {
            return Err(Error::DegenerateActiveSet {
                reason: format!("proliferating region reaches the bottom in column {i}"),
            });
        }
        let above = (0..=ny).filter(|&j| active_mask[grid.idx(i, j)]).count();
        if above < 3 {
            return Err(Error::DegenerateActiveSet {
                reason: format!("necrotic region fills column {i}"),
            });
        }
    }
    if complementarity_residual > tol.comp || pde_residual > tol.pde {
        return Err(Error::NoConvergence {
            what: "nutrient obstacle solve",
            iterations,
            residual: complementarity_residual.max(pde_residual),
        });
    }

    let mut sol = ObstacleSolution {
        sigma_field: x,
        active_mask,
        eta: Vec::new(),
        complementarity_residual,
        pde_residual,
        sigma_hat: params.sigma_hat,
        method,
        iterations,
        coincident,
    };
    sol.eta = extract_free_boundary(&sol, grid)?;
    Ok(sol)
}
