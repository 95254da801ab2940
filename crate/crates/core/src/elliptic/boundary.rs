use super::grid::StripGrid;
use super::obstacle::ObstacleSolution;
use crate::error::{Error, Result};

/// Height of the necrotic interface in every column.
///
/// The nutrient detaches from the obstacle tangentially, so `sigma - sigma_hat`
/// is locally a parabola with its vertex on the interface. The vertex of the
/// quadratic through the first three proliferating nodes is used.
pub fn extract_free_boundary(obstacle: &ObstacleSolution, grid: &StripGrid) -> Result<Vec<f64>> {
    let ny = grid.ny;
    (0..grid.nx)
        .map(|i| {
            let mask = |j: usize| obstacle.active_mask[grid.idx(i, j)];
            let first_active =
                (0..=ny)
                    .find(|&j| mask(j))
                    .ok_or_else(|| Error::DegenerateActiveSet {
                        reason: format!("no proliferating node in column {i}"),
                    })?;
            if first_active == 0 {
                return Err(Error::DegenerateActiveSet {
                    reason: format!("no necrotic node in column {i}"),
                });
            }
            if (first_active..=ny).any(|j| !mask(j)) {
                return Err(Error::NonMonotoneColumn { column: i });
            }
            if ny + 1 - first_active < 3 {
                return Err(Error::DegenerateActiveSet {
                    reason: format!("fewer than three proliferating nodes in column {i}"),
                });
            }
            let y = |j: usize| grid.y_physical(i, j);
            let f = |j: usize| obstacle.sigma_field[grid.idx(i, j)] - obstacle.sigma_hat;
            Ok(vertex_estimate(
                [y(first_active), y(first_active + 1), y(first_active + 2)],
                [f(first_active), f(first_active + 1), f(first_active + 2)],
                y(first_active - 1),
                grid.dy(i),
            ))
        })
        .collect()
}

/// Vertex of the interpolating parabola, clamped to `[y_last - dy, y[0]]`.
pub(crate) fn vertex_estimate(y: [f64; 3], f: [f64; 3], y_last: f64, dy: f64) -> f64 {
    let c1 = (f[1] - f[0]) / (y[1] - y[0]);
    let c12 = (f[2] - f[1]) / (y[2] - y[1]);
    let c2 = (c12 - c1) / (y[2] - y[0]);
    let raw = if c2 > 0.0 {
        0.5 * (y[0] + y[1]) - c1 / (2.0 * c2)
    } else if c1 > 0.0 {
        y[0] - f[0] / c1
    } else {
        y_last
    };
    raw.clamp(y_last - dy, y[0])
}
