use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples in a fitting window.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Amplitudes are clipped to this floor before taking logarithms.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `log A` against `t`: negative for decay, positive for growth.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares slope of `log(amplitude)` against time over the final
/// `window_fraction` of the samples.
pub fn fit_log_linear(times: &[f64], amplitudes: &[f64], window_fraction: f64) -> Result<RateFit> {
    if times.len() != amplitudes.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times but {} amplitudes",
            times.len(),
            amplitudes.len()
        )));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let n = times.len();
    let len = ((n as f64) * window_fraction).ceil() as usize;
    if len < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: len,
        });
    }
    let start = n - len;
    let mut ys = Vec::with_capacity(len);
    for (idx, &a) in amplitudes.iter().enumerate().skip(start) {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::NonPositiveAmplitude { index: idx });
        }
        ys.push(a.max(AMPLITUDE_FLOOR).ln());
    }
    let ts = &times[start..];
    let m = len as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let (dt, dy) = (t - t_mean, y - y_mean);
        sxy += dt * dy;
        sxx += dt * dt;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: 1,
        });
    }
    let rate = sxy / sxx;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| {
            let e = y - (y_mean + rate * (t - t_mean));
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        rate,
        r_squared,
        samples: len,
    })
}
