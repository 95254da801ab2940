use crate::error::{Error, Result};
use crate::fourier::{periodic_nodes, Periodic};
use crate::params::FlatStationary;

/// Smallest admissible number of periodic nodes.
pub const MIN_NX: usize = 16;
/// Smallest admissible number of vertical intervals.
pub const MIN_NY: usize = 32;

/// Periodic strip `0 < y < rho_s + rho(x)` mapped onto the reference
/// rectangle `[0, 2 pi) x [0, 1]` by `y = s (rho_s + rho(x))`.
///
/// Nodes are stored row-major: node `(i, j)` lives at `j * nx + i`, with
/// `j = 0` on the bottom and `j = ny` on the upper surface.
#[derive(Debug, Clone)]
pub struct StripGrid {
    pub nx: usize,
    /// Number of intervals in the reference coordinate `s`.
    pub ny: usize,
    pub x_nodes: Vec<f64>,
    /// Reference coordinate `s_j = j / ny`, `0 <= j <= ny`.
    pub y_map: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_s: f64,
    pub eta_s: f64,
    /// Column heights `H = rho_s + rho`.
    pub(crate) height: Vec<f64>,
    /// `rho_x` (equal to `H'`).
    pub(crate) slope: Vec<f64>,
    /// `rho_xx` (equal to `H''`).
    pub(crate) bend: Vec<f64>,
}

impl StripGrid {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Total number of nodes, including the upper surface row.
    pub fn n_nodes(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.nx as f64
    }

    /// Physical height of column `i`.
    pub fn height(&self, i: usize) -> f64 {
        self.height[i]
    }

    pub fn y_physical(&self, i: usize, j: usize) -> f64 {
        self.y_map[j] * self.height[i]
    }

    /// Vertical node spacing of column `i` in physical units.
    pub fn dy(&self, i: usize) -> f64 {
        self.height[i] * self.ds()
    }

    /// Surface slope `rho_x` at the nodes.
    pub fn surface_slope(&self) -> &[f64] {
        &self.slope
    }
}

/// Largest admissible `max |rho|` for a given flat state.
pub fn geometry_margin(fs: &FlatStationary) -> f64 {
    0.25 * fs.gap()
}

/// Builds the mapped grid for the surface perturbation `rho_samples`.
pub fn build_grid(
    nx: usize,
    ny: usize,
    fs: &FlatStationary,
    rho_samples: &[f64],
) -> Result<StripGrid> {
    if nx < MIN_NX || !nx.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "nx must be a power of two >= {MIN_NX}, got {nx}"
        )));
    }
    if ny < MIN_NY {
        return Err(Error::InvalidArgument(format!(
            "ny must be >= {MIN_NY}, got {ny}"
        )));
    }
    if rho_samples.len() != nx {
        return Err(Error::InvalidArgument(format!(
            "expected {nx} surface samples, got {}",
            rho_samples.len()
        )));
    }
    if let Some(bad) = rho_samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::GeometryViolation {
            reason: format!("non-finite surface sample {bad}"),
        });
    }
    let margin = geometry_margin(fs);
    let amp = rho_samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if amp > margin {
        return Err(Error::GeometryViolation {
            reason: format!(
                "max |rho| = {amp:.6e} exceeds the admissible {margin:.6e} (a quarter of the proliferating layer)"
            ),
        });
    }
    let min_top = fs.rho_s + rho_samples.iter().copied().fold(f64::INFINITY, f64::min);
    if min_top <= fs.eta_s + margin {
        return Err(Error::GeometryViolation {
            reason: format!(
                "surface dips to {min_top:.6e}, within {margin:.6e} of the necrotic interface"
            ),
        });
    }

    let mut fft = Periodic::new(nx);
    let mut slope = vec![0.0; nx];
    let mut bend = vec![0.0; nx];
    fft.derivatives(rho_samples, &mut slope, &mut bend);
    Ok(StripGrid {
        nx,
        ny,
        x_nodes: periodic_nodes(nx),
        y_map: (0..=ny).map(|j| j as f64 / ny as f64).collect(),
        rho: rho_samples.to_vec(),
        rho_s: fs.rho_s,
        eta_s: fs.eta_s,
        height: rho_samples.iter().map(|r| fs.rho_s + r).collect(),
        slope,
        bend,
    })
}
