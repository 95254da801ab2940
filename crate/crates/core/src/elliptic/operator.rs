//! `-Delta + c` pulled back to the reference rectangle, and a flat-geometry
//! preconditioner for it.

use rustfft::num_complex::Complex64;

use super::grid::StripGrid;
use crate::error::Result;
use crate::fourier::Periodic;
use crate::linalg::{LinearOperator, Preconditioner, Tridiagonal};

/// Per-column metric coefficients of the mapped Laplacian
/// `U_xx - 2 s g U_xs + (s^2 g^2 + 1/H^2) U_ss + s (2 g^2 - H''/H) U_s`.
#[derive(Debug, Clone)]
pub(crate) struct Metric {
    /// `g = H'/H`
    pub g: Vec<f64>,
    pub inv_h2: Vec<f64>,
    /// `2 g^2 - H''/H`
    pub drift: Vec<f64>,
}

impl Metric {
    pub fn new(grid: &StripGrid) -> Self {
        let g: Vec<f64> = (0..grid.nx)
            .map(|i| grid.slope[i] / grid.height[i])
            .collect();
        Self {
            inv_h2: grid.height.iter().map(|h| 1.0 / (h * h)).collect(),
            drift: (0..grid.nx)
                .map(|i| 2.0 * g[i] * g[i] - grid.bend[i] / grid.height[i])
                .collect(),
            g,
        }
    }
}

/// Discrete `-Delta_h + shift` with Neumann bottom (ghost reflection) and
/// identity rows wherever `fixed` is set. The top row is always fixed.
pub(crate) struct MappedOperator<'a> {
    grid: &'a StripGrid,
    metric: &'a Metric,
    fft: Periodic,
    shift: f64,
    fixed: &'a [bool],
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl<'a> MappedOperator<'a> {
    pub fn new(grid: &'a StripGrid, metric: &'a Metric, shift: f64, fixed: &'a [bool]) -> Self {
        assert_eq!(fixed.len(), grid.n_nodes());
        let n = grid.n_nodes();
        Self {
            grid,
            metric,
            fft: Periodic::new(grid.nx),
            shift,
            fixed,
            d1: vec![0.0; n],
            d2: vec![0.0; n],
        }
    }

    fn row_derivatives(&mut self, x: &[f64]) {
        let nx = self.grid.nx;
        for j in 0..=self.grid.ny {
            let r = j * nx..(j + 1) * nx;
            let (d1, d2) = (&mut self.d1[r.clone()], &mut self.d2[r.clone()]);
            self.fft.derivatives(&x[r], d1, d2);
        }
    }

    /// `Delta_h x` at node `(i, j)`, `j < ny`, after [`Self::row_derivatives`].
    #[inline]
    fn laplacian_at(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let nx = self.grid.nx;
        let ds = self.grid.ds();
        let k = j * nx + i;
        let m = self.metric;
        if j == 0 {
            return self.d2[k] + m.inv_h2[i] * 2.0 * (x[k + nx] - x[k]) / (ds * ds);
        }
        let s = self.grid.y_map[j];
        let (up, dn) = (k + nx, k - nx);
        let u_s = (x[up] - x[dn]) / (2.0 * ds);
        let u_ss = (x[up] - 2.0 * x[k] + x[dn]) / (ds * ds);
        let u_xs = (self.d1[up] - self.d1[dn]) / (2.0 * ds);
        let g = m.g[i];
        self.d2[k] - 2.0 * s * g * u_xs
            + (s * s * g * g + m.inv_h2[i]) * u_ss
            + s * m.drift[i] * u_s
    }

    /// `(-Delta_h + shift) x` at every non-fixed node, ignoring the mask.
    pub fn residual_form(&mut self, x: &[f64], out: &mut [f64]) {
        self.row_derivatives(x);
        let nx = self.grid.nx;
        for j in 0..self.grid.ny {
            for i in 0..nx {
                let k = j * nx + i;
                out[k] = -self.laplacian_at(x, i, j) + self.shift * x[k];
            }
        }
        for v in &mut out[self.grid.ny * nx..] {
            *v = 0.0;
        }
    }
}

impl LinearOperator for MappedOperator<'_> {
    fn dim(&self) -> usize {
        self.grid.n_nodes()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.row_derivatives(x);
        let nx = self.grid.nx;
        for j in 0..=self.grid.ny {
            for i in 0..nx {
                let k = j * nx + i;
                y[k] = if j == self.grid.ny || self.fixed[k] {
                    x[k]
                } else {
                    -self.laplacian_at(x, i, j) + self.shift * x[k]
                };
            }
        }
    }
}

/// Exact inverse of the operator on the flat strip of mean height, with rows
/// `0..=fixed_below` and the top row replaced by the identity.
pub(crate) struct FlatPreconditioner {
    nx: usize,
    ny: usize,
    fft: Periodic,
    /// One factorization per `|k|`, `0 <= |k| <= nx/2`.
    factors: Vec<Tridiagonal>,
    spec: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl FlatPreconditioner {
    pub fn new(grid: &StripGrid, shift: f64, fixed_below: Option<usize>) -> Result<Self> {
        let (nx, ny) = (grid.nx, grid.ny);
        let ds = grid.ds();
        let mean_inv_h2 = grid.height.iter().map(|h| 1.0 / (h * h)).sum::<f64>() / nx as f64;
        let a = mean_inv_h2 / (ds * ds);
        let n = ny + 1;
        let is_fixed = |j: usize| j == ny || fixed_below.is_some_and(|f| j <= f);
        let factors = (0..=nx / 2)
            .map(|k| {
                let k2 = (k * k) as f64;
                let mut lower = vec![0.0; n];
                let mut diag = vec![1.0; n];
                let mut upper = vec![0.0; n];
                for j in 0..n {
                    if is_fixed(j) {
                        continue;
                    }
                    diag[j] = k2 + shift + 2.0 * a;
                    if j == 0 {
                        upper[j] = -2.0 * a;
                    } else {
                        lower[j] = -a;
                        upper[j] = -a;
                    }
                }
                Tridiagonal::factor(&lower, &diag, &upper)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nx,
            ny,
            fft: Periodic::new(nx),
            factors,
            spec: vec![Complex64::default(); nx * (ny + 1)],
            column: vec![Complex64::default(); ny + 1],
        })
    }
}

impl Preconditioner for FlatPreconditioner {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        for j in 0..=self.ny {
            let r = j * nx..(j + 1) * nx;
            self.fft.forward_real(&x[r.clone()], &mut self.spec[r]);
        }
        for i in 0..nx {
            let k = self.fft.wavenumber(i).unsigned_abs() as usize;
            for j in 0..=self.ny {
                self.column[j] = self.spec[j * nx + i];
            }
            self.factors[k].solve_complex(&mut self.column);
            for j in 0..=self.ny {
                self.spec[j * nx + i] = self.column[j];
            }
        }
        for j in 0..=self.ny {
            let r = j * nx..(j + 1) * nx;
            self.fft.inverse_real(&self.spec[r.clone()], &mut y[r]);
        }
    }
}

/// Dense circulant spectral differentiation matrices, `D[i][m] = c[(i - m) mod n]`.
pub(crate) struct CirculantDerivatives {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl CirculantDerivatives {
    pub fn new(nx: usize) -> Self {
        let mut e0 = vec![0.0; nx];
        e0[0] = 1.0;
        let mut first = vec![0.0; nx];
        let mut second = vec![0.0; nx];
        Periodic::new(nx).derivatives(&e0, &mut first, &mut second);
        Self { first, second }
    }

    #[inline]
    pub fn entry(stencil: &[f64], i: usize, m: usize) -> f64 {
        let n = stencil.len();
        stencil[(i + n - m) % n]
    }
}
