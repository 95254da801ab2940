//! Small dense-free linear algebra: banded LU, tridiagonal factors and a
//! right-preconditioned restarted GMRES.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// General banded matrix with `kl` sub- and `ku` super-diagonals, factored in
/// place by Gaussian elimination with partial pivoting (LAPACK `gbtrf` layout:
/// `kl` extra rows of storage hold the fill-in).
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage, `ldab = 2 kl + ku + 1` rows per column.
    ab: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ab: vec![0.0; ldab * n],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // Row kl + ku + i - j of column j.
        (self.kl + self.ku + i - j) + j * self.ldab()
    }

    /// Sets entry `(i, j)`, which must lie inside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            i <= j + self.kl && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.ab[k] = value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > j + self.kl || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.ab[self.idx(i, j)]
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = ku + kl;
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.get(j, j).abs();
            for i in j + 1..=last {
                let v = self.get(i, j).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem { what: "banded LU" });
            }
            self.pivots[j] = p;
            let col_end = (j + kv).min(n - 1);
            if p != j {
                for c in j..=col_end {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.get(j, j);
            for i in j + 1..=last {
                let li = self.idx(i, j);
                let l = self.ab[li] / pivot;
                self.ab[li] = l;
                if l != 0.0 {
                    for c in j + 1..=col_end {
                        let u = self.ab[self.idx(j, c)];
                        let t = self.idx(i, c);
                        self.ab[t] -= l * u;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place; factors first if needed.
    pub fn solve(&mut self, b: &mut [f64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        if !self.factored {
            self.factor()?;
        }
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let last = (j + kl).min(n - 1);
            for i in j + 1..=last {
                b[i] -= self.ab[self.idx(i, j)] * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[self.idx(j, j)];
            let first = j.saturating_sub(kl + ku);
            for i in first..j {
                b[i] -= self.ab[self.idx(i, j)] * b[j];
            }
        }
        Ok(())
    }
}

/// Tridiagonal matrix with real coefficients, pre-factored by the Thomas
/// algorithm. Used with both real and complex right-hand sides.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    /// Modified super-diagonal `c'_i`.
    upper: Vec<f64>,
    /// Reciprocal of the modified diagonal.
    inv_diag: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[0]` and `upper[n - 1]` are ignored.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n);
        let mut c = vec![0.0; n];
        let mut inv = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let m = diag[i] - if i > 0 { lower[i] * prev_c } else { 0.0 };
            if m == 0.0 || !m.is_finite() {
                return Err(Error::SingularSystem {
                    what: "tridiagonal solve",
                });
            }
            inv[i] = 1.0 / m;
            c[i] = upper[i] * inv[i];
            prev_c = c[i];
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: c,
            inv_diag: inv,
        })
    }

    pub fn solve_complex(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_diag[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.lower[i]) * self.inv_diag[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * self.upper[i];
        }
    }

    pub fn solve_real(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_diag[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.lower[i]) * self.inv_diag[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= rhs[i + 1] * self.upper[i];
        }
    }
}

/// Linear operator `y = A x` on flat `f64` vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], y: &mut [f64]);
}

/// Approximate inverse `y ~ A^{-1} x`.
pub trait Preconditioner {
    fn apply(&mut self, x: &[f64], y: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Stop when `||b - A x|| <= rel_tol ||b|| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 80,
            max_iterations: 4000,
            rel_tol: 1e-10,
            abs_tol: 1e-300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub residual_norm: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
/// `x` holds the initial guess on entry and the solution on exit.
pub fn gmres<A: LinearOperator, P: Preconditioner>(
    op: &mut A,
    precond: &mut P,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<GmresReport> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let m = opts.restart.max(1);
    let target = opts.rel_tol * norm(b) + opts.abs_tol;

    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut total = 0;

    loop {
        op.apply(x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let beta = norm(&r);
        if beta <= target {
            return Ok(GmresReport {
                iterations: total,
                residual_norm: beta,
            });
        }
        if total >= opts.max_iterations {
            return Err(Error::NoConvergence {
                what: "GMRES",
                iterations: total,
                residual: beta / norm(b).max(f64::MIN_POSITIVE),
            });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;

        let mut k_used = 0;
        for k in 0..m {
            precond.apply(&basis[k], &mut z);
            op.apply(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(&w, v);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj -= hik * vj;
                }
            }
            let hnext = norm(&w);
            h[k + 1][k] = hnext;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= target || hnext == 0.0 || total >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            if h[i][i] == 0.0 {
                return Err(Error::SingularSystem { what: "GMRES" });
            }
            y[i] = s / h[i][i];
        }
        w.iter_mut().for_each(|v| *v = 0.0);
        for (yi, v) in y.iter().zip(&basis) {
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj += yi * vj;
            }
        }
        precond.apply(&w, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}
