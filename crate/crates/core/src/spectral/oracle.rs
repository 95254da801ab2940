//! Finite-difference reconstruction of `lambda_k` from the mode-k boundary
//! value problems, independent of the closed forms.

use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, Tridiagonal};
use crate::params::{FlatStationary, TumorParams};

/// Solves the nutrient and pressure mode problems with second-order finite
/// differences on `n_grid` uniform intervals per layer and returns
/// `b_k'(rho_s) - mu (sigma_bar - sigma_tilde)`.
pub fn bvp_oracle_lambda(
    params: &TumorParams,
    fs: &FlatStationary,
    k: i64,
    gamma: f64,
    n_grid: usize,
) -> Result<f64> {
    if n_grid < 4 {
        return Err(Error::InvalidArgument(format!(
            "n_grid must be at least 4, got {n_grid}"
        )));
    }
    let n = n_grid;
    let kf = k.unsigned_abs() as f64;
    let k2 = kf * kf;
    let q = params.surface_flux();
    let hu = fs.gap() / n as f64;
    let hl = fs.eta_s / n as f64;

    // Nutrient: a'' - (k^2 + 1) a = 0 on the proliferating layer, a(eta) = 0, a(rho) = -q.
    let mut a = vec![0.0; n + 1];
    a[n] = -q;
    let m = n - 1;
    let off = vec![1.0 / (hu * hu); m];
    let diag = vec![-2.0 / (hu * hu) - (k2 + 1.0); m];
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = -a[n] / (hu * hu);
    Tridiagonal::factor(&off, &diag, &off)
        .map_err(|_| Error::SingularSystem {
            what: "nutrient mode problem",
        })?
        .solve_real(&mut rhs);
    a[1..n].copy_from_slice(&rhs);
    let a_slope = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * hu);
    let d = -a_slope / params.sigma_hat;

    // Pressure: lower nodes 0..=n, then upper nodes n+1..=2n+1 (upper node 0 sits on the interface).
    let dim = 2 * n + 2;
    let up = |i: usize| n + 1 + i;
    let mut mat = BandedMatrix::new(dim, 3, 2);
    let mut b = vec![0.0; dim];
    let (il, iu) = (1.0 / (hl * hl), 1.0 / (hu * hu));

    mat.set(0, 0, -2.0 * il - k2);
    mat.set(0, 1, 2.0 * il);
    for i in 1..n {
        mat.set(i, i - 1, il);
        mat.set(i, i, -2.0 * il - k2);
        mat.set(i, i + 1, il);
    }
    mat.set(n, n, 1.0);
    mat.set(n, up(0), -1.0);

    let r = up(0);
    let jump = params.mu * (params.sigma_hat - params.sigma_tilde) + params.nu;
    mat.set(r, up(0), -3.0 / (2.0 * hu));
    mat.set(r, up(1), 4.0 / (2.0 * hu));
    mat.set(r, up(2), -1.0 / (2.0 * hu));
    mat.set(r, n, -3.0 / (2.0 * hl));
    mat.set(r, n - 1, 4.0 / (2.0 * hl));
    mat.set(r, n - 2, -1.0 / (2.0 * hl));
    b[r] = jump * d;

    for i in 1..n {
        let row = up(i);
        mat.set(row, row - 1, iu);
        mat.set(row, row, -2.0 * iu - k2);
        mat.set(row, row + 1, iu);
        b[row] = -params.mu * a[i];
    }
    mat.set(up(n), up(n), 1.0);
    b[up(n)] = gamma * k2;

    mat.factor()?;
    mat.solve(&mut b)?;

    let slope = (3.0 * b[up(n)] - 4.0 * b[up(n - 1)] + b[up(n - 2)]) / (2.0 * hu);
    Ok(slope - params.mu * (params.sigma_bar - params.sigma_tilde))
}
