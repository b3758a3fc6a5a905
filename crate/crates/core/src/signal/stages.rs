use super::Signal;
use crate::error::{Error, Result};

/// Five-point derivative `y[n] = (2x[n] + x[n-1] - x[n-3] - 2x[n-4]) / 8`
/// with zero history before the first sample.
pub fn derivative(x: &Signal) -> Result<Signal> {
    let s = x.samples();
    if s.len() < 5 {
        return Err(Error::InputTooShort {
            needed: 5,
            got: s.len(),
        });
    }
    let at = |i: usize, back: usize| if i >= back { s[i - back] } else { 0.0 };
    let y = (0..s.len())
        .map(|n| (2.0 * s[n] + at(n, 1) - at(n, 3) - 2.0 * at(n, 4)) / 8.0)
        .collect();
    Ok(x.derived(y))
}

pub fn square(x: &Signal) -> Signal {
    x.derived(x.samples().iter().map(|v| v * v).collect())
}

/// Causal moving average over `round(window_s * fs)` samples, zero history.
///
/// Each output is summed directly over its window so the result does not
/// depend on accumulated rounding from earlier samples.
pub fn moving_window_integrate(x: &Signal, window_s: f64) -> Result<Signal> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(Error::param(format!(
            "integrator window must be positive, got {window_s}"
        )));
    }
    let n = (window_s * x.fs()).round() as usize;
    if n < 1 {
        return Err(Error::param(format!(
            "integrator window {window_s} s is shorter than one sample at {} Hz",
            x.fs()
        )));
    }
    let s = x.samples();
    if n > s.len() {
        return Err(Error::param(format!(
            "integrator window of {n} samples exceeds signal length {}",
            s.len()
        )));
    }
    let scale = 1.0 / n as f64;
    let y = (0..s.len())
        .map(|i| s[(i + 1).saturating_sub(n)..=i].iter().sum::<f64>() * scale)
        .collect();
    Ok(x.derived(y))
}
