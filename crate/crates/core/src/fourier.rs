//! Fourier collocation on the periodic interval `[0, 2 pi)`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for one transform length, plus a scratch buffer.
#[derive(Clone)]
pub struct Periodic {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Periodic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Periodic").field("n", &self.n).finish()
    }
}

impl Periodic {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "even transform length required");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            buf: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber of FFT bin `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward_real(&mut self, x: &[f64], out: &mut [Complex64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = Complex64::new(v, 0.0);
        }
        self.forward.process_with_scratch(out, &mut self.scratch);
    }

    /// Inverse transform (including the `1/n` factor), keeping the real part.
    pub fn inverse_real(&mut self, coeffs: &[Complex64], out: &mut [f64]) {
        self.buf.copy_from_slice(coeffs);
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for (o, v) in out.iter_mut().zip(&self.buf) {
            *o = v.re * scale;
        }
    }

    pub fn forward_inplace(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse_inplace(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// First and second derivatives of periodic samples. The Nyquist mode is
    /// dropped from the odd derivative.
    pub fn derivatives(&mut self, x: &[f64], d1: &mut [f64], d2: &mut [f64]) {
        let n = self.n;
        let mut coeffs = vec![Complex64::default(); n];
        self.forward_real(x, &mut coeffs);
        let mut s1 = coeffs.clone();
        for i in 0..n {
            let k = self.wavenumber(i) as f64;
            s1[i] = if i == n / 2 {
                Complex64::default()
            } else {
                coeffs[i] * Complex64::new(0.0, k)
            };
            coeffs[i] *= -k * k;
        }
        self.inverse_real(&s1, d1);
        self.inverse_real(&coeffs, d2);
    }

    /// Amplitudes `A_k`, `0 <= k <= n/2`, such that `eps cos(k x + phi)` has `A_k = eps`.
    pub fn mode_amplitudes(&mut self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut coeffs = vec![Complex64::default(); n];
        self.forward_real(x, &mut coeffs);
        (0..=n / 2)
            .map(|k| {
                let a = coeffs[k].norm() / n as f64;
                if k == 0 || k == n / 2 {
                    a
                } else {
                    2.0 * a
                }
            })
            .collect()
    }

    /// Complex coefficients `c_k` with `x_j = sum_k c_k e^{i k x_j}` (full FFT order).
    pub fn coefficients(&mut self, x: &[f64]) -> Vec<Complex64> {
        let mut coeffs = vec![Complex64::default(); self.n];
        self.forward_real(x, &mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        coeffs
    }

    /// Applies the even real multiplier `symbol(|k|)` to periodic samples.
    pub fn apply_multiplier(&mut self, x: &[f64], symbol: impl Fn(u64) -> f64, out: &mut [f64]) {
        let mut coeffs = vec![Complex64::default(); self.n];
        self.forward_real(x, &mut coeffs);
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c *= symbol(self.wavenumber(i).unsigned_abs());
        }
        self.inverse_real(&coeffs, out);
    }
}

/// Uniform nodes `2 pi i / n`.
pub fn periodic_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect()
}
