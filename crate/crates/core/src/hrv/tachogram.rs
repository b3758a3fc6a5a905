//! Uniform resampling of the interval series by natural cubic spline.

use super::IntervalSeries;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Default tachogram sampling rate in Hz.
pub const DEFAULT_RESAMPLE_HZ: f64 = 4.0;
/// Below this span the spectral bands are poorly resolved.
pub const MIN_SPECTRAL_SPAN_S: f64 = 60.0;

/// Natural cubic spline (zero second derivative at both ends).
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    /// `x` must be strictly increasing with at least two knots.
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 2 {
            return Err(Error::param(
                "spline needs at least two knots with matching values",
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("spline knots must be strictly increasing"));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
            }
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
            }
        }
        Ok(NaturalCubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    /// Value at `t`; outside the knot range the end cubic is extended.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&k| k <= t).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - t, t - x0);
        self.m[i] * a.powi(3) / (6.0 * h)
            + self.m[i + 1] * b.powi(3) / (6.0 * h)
            + (self.y[i] / h - self.m[i] * h / 6.0) * a
            + (self.y[i + 1] / h - self.m[i + 1] * h / 6.0) * b
    }
}

/// Evenly resampled interval series, plus anything worth flagging about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tachogram {
    /// Spline samples before detrending, in ms.
    pub raw: Signal,
    /// `raw` with its least-squares line removed.
    pub detrended: Signal,
    pub warnings: Vec<String>,
}

/// Removes the least-squares straight line (over sample index).
pub fn linear_detrend(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let kbar = (n - 1) as f64 / 2.0;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = y.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (k, v)| {
        let dk = k as f64 - kbar;
        (sxy + dk * (v - ybar), sxx + dk * dk)
    });
    let slope = sxy / sxx;
    y.iter()
        .enumerate()
        .map(|(k, v)| v - ybar - slope * (k as f64 - kbar))
        .collect()
}

/// Knot times are snapped to this grid (seconds) after subtracting the first
/// anchor, so shifting every anchor by a constant leaves them unchanged.
const KNOT_QUANTUM_S: f64 = 1.0 / 1_048_576.0;

fn knot_times(anchors: &[f64]) -> Vec<f64> {
    let start = anchors[0];
    anchors
        .iter()
        .map(|a| ((a - start) / KNOT_QUANTUM_S).round() * KNOT_QUANTUM_S)
        .collect()
}

/// Spline through (anchor, interval) sampled at `fs_resample` from the first
/// to the last anchor, then linearly detrended.
pub fn resample_tachogram(iv: &IntervalSeries, fs_resample: f64) -> Result<Tachogram> {
    resample_tachogram_for_band(iv, fs_resample, super::FreqBands::default().hf.1)
}

/// As [`resample_tachogram`], requiring `fs_resample` above twice `band_top_hz`.
pub fn resample_tachogram_for_band(
    iv: &IntervalSeries,
    fs_resample: f64,
    band_top_hz: f64,
) -> Result<Tachogram> {
    if iv.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: iv.len(),
        });
    }
    if !(fs_resample.is_finite() && fs_resample > 2.0 * band_top_hz) {
        return Err(Error::param(format!(
            "tachogram rate {fs_resample} Hz must exceed twice the top band edge {band_top_hz} Hz"
        )));
    }
    let start = iv.anchors()[0];
    let rel = knot_times(iv.anchors());
    let spline = NaturalCubicSpline::new(&rel, iv.intervals())?;
    let span = rel[rel.len() - 1];
    let count = (span * fs_resample + 1e-9).floor() as usize + 1;
    let raw: Vec<f64> = (0..count)
        .map(|k| spline.eval(k as f64 / fs_resample))
        .collect();
    let detrended = linear_detrend(&raw);

    let mut warnings = Vec::new();
    if span < MIN_SPECTRAL_SPAN_S {
        warnings.push(format!(
            "insufficient duration: tachogram spans {span:.1} s, under {MIN_SPECTRAL_SPAN_S} s"
        ));
    }
    Ok(Tachogram {
        raw: Signal::with_start(raw, fs_resample, start)?,
        detrended: Signal::with_start(detrended, fs_resample, start)?,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrv::IntervalKind;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Natural spline via first-derivative (slope) unknowns, solved densely
    /// with partial pivoting, evaluated in Hermite form.
    fn hermite_oracle(x: &[f64], y: &[f64], t: f64) -> f64 {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut a = vec![vec![0.0; n + 1]; n];
        a[0][0] = 2.0;
        a[0][1] = 1.0;
        a[0][n] = 3.0 * s[0];
        a[n - 1][n - 2] = 1.0;
        a[n - 1][n - 1] = 2.0;
        a[n - 1][n] = 3.0 * s[n - 2];
        for i in 1..n - 1 {
            a[i][i - 1] = 1.0 / h[i - 1];
            a[i][i] = 2.0 / h[i - 1] + 2.0 / h[i];
            a[i][i + 1] = 1.0 / h[i];
            a[i][n] = 3.0 * (s[i - 1] / h[i - 1] + s[i] / h[i]);
        }
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let d: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        let i = (0..n - 1).rfind(|&i| x[i] <= t).unwrap_or(0);
        let u = (t - x[i]) / h[i];
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        h00 * y[i] + h10 * h[i] * d[i] + h01 * y[i + 1] + h11 * h[i] * d[i + 1]
    }

    fn random_series(seed: u64, n: usize) -> IntervalSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(400.0..1200.0)).collect();
        IntervalSeries::from_intervals(v, 3.0, IntervalKind::Rr).unwrap()
    }

    #[test]
    fn spline_matches_independent_oracle() {
        for seed in 0..20 {
            let iv = random_series(seed, 4 + seed as usize * 7);
            let rel = knot_times(iv.anchors());
            let tach = resample_tachogram(&iv, 4.0).unwrap();
            for (k, v) in tach.raw.samples().iter().enumerate() {
                let expected = hermite_oracle(&rel, iv.intervals(), k as f64 / 4.0);
                assert!(
                    (v - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                    "seed {seed} k {k}: {v} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn knots_ignore_anchor_offset() {
        let iv = random_series(11, 400);
        let base = knot_times(iv.anchors());
        for dt in [-4999.3, -0.1, 0.7, 1234.5, 4999.9] {
            assert_eq!(knot_times(iv.shifted(dt).anchors()), base, "shift {dt}");
        }
        let raw: Vec<f64> = iv.anchors().iter().map(|a| a - iv.anchors()[0]).collect();
        for (q, r) in base.iter().zip(&raw) {
            assert!((q - r).abs() <= KNOT_QUANTUM_S / 2.0);
        }
    }

    #[test]
    fn spline_interpolates_knots() {
        let x = [0.0, 0.7, 1.9, 2.0, 3.5];
        let y = [1.0, -2.0, 0.5, 0.6, 4.0];
        let s = NaturalCubicSpline::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_intervals_detrend_to_zero() {
        let iv = IntervalSeries::from_intervals(vec![800.0; 100], 0.0, IntervalKind::Rr).unwrap();
        let t = resample_tachogram(&iv, 4.0).unwrap();
        assert!(t.raw.samples().iter().all(|v| (v - 800.0).abs() < 1e-9));
        assert!(t.detrended.samples().iter().all(|v| v.abs() < 1e-9));
        assert_eq!(t.raw.fs(), 4.0);
        assert_eq!(t.raw.t0(), 0.8);
    }

    #[test]
    fn linear_intervals_detrend_to_zero() {
        // Interval grows linearly with anchor time.
        let anchors: Vec<f64> = (0..80)
            .map(|i| i as f64 * 0.90625 + 0.046875 * (i % 3) as f64)
            .collect();
        let iv: Vec<f64> = anchors.iter().map(|a| 700.0 + 2.5 * a).collect();
        let iv = IntervalSeries::new(iv, anchors, IntervalKind::Rr).unwrap();
        let t = resample_tachogram(&iv, 4.0).unwrap();
        assert!(t.detrended.samples().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn grid_covers_anchor_span() {
        let iv = IntervalSeries::from_intervals(vec![1000.0; 61], 0.0, IntervalKind::Rr).unwrap();
        let t = resample_tachogram(&iv, 4.0).unwrap();
        assert_eq!(t.raw.len(), 241);
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn short_span_warns_and_tiny_series_fails() {
        let iv = IntervalSeries::from_intervals(vec![800.0; 10], 0.0, IntervalKind::Rr).unwrap();
        let t = resample_tachogram(&iv, 4.0).unwrap();
        assert_eq!(t.warnings.len(), 1);
        assert!(t.warnings[0].contains("insufficient duration"));

        let iv = IntervalSeries::from_intervals(vec![800.0; 3], 0.0, IntervalKind::Rr).unwrap();
        assert!(matches!(
            resample_tachogram(&iv, 4.0),
            Err(Error::InsufficientData { needed: 4, got: 3 })
        ));

        let iv = IntervalSeries::from_intervals(vec![800.0; 10], 0.0, IntervalKind::Rr).unwrap();
        assert!(matches!(
            resample_tachogram(&iv, 0.8),
            Err(Error::Parameter(_))
        ));
    }
}
