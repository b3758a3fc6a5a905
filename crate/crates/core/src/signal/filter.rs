//! Butterworth band-pass design as a cascade of second-order sections, with
//! forward-backward (zero-phase) application.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Signal;
use crate::error::{Error, Result};

/// Pass band edges in Hz and the band-pass filter order.
///
/// The order counts poles of the band-pass filter, so order 4 is two biquads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub lo: f64,
    pub hi: f64,
    pub order: usize,
}

impl BandSpec {
    pub const fn new(lo: f64, hi: f64, order: usize) -> Self {
        BandSpec { lo, hi, order }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if self.order < 2 || self.order % 2 != 0 {
            return Err(Error::param(format!(
                "filter order must be even and at least 2, got {}",
                self.order
            )));
        }
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi < fs / 2.0) {
            return Err(Error::param(format!(
                "band {}-{} Hz is not inside (0, {}) Hz for fs {} Hz",
                self.lo,
                self.hi,
                fs / 2.0,
                fs
            )));
        }
        Ok(())
    }
}

/// One second-order section, `a[0]` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2)
            / (self.a[0] + self.a[1] * z1 + self.a[2] * z2)
    }

    /// Transposed direct form II state that holds the output steady for a
    /// constant input of `level`.
    fn steady_state(&self, level: f64) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = (self.b[2] - self.a[2] * g) * level;
        let z1 = (self.b[1] - self.a[1] * g) * level + z2;
        [z1, z2]
    }

    #[inline]
    fn step(&self, x: f64, z: &mut [f64; 2]) -> f64 {
        let y = self.b[0] * x + z[0];
        z[0] = self.b[1] * x - self.a[1] * y + z[1];
        z[1] = self.b[2] * x - self.a[2] * y;
        y
    }
}

/// A cascade of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
}

impl SosFilter {
    /// Designs a digital Butterworth band-pass by bilinear transform of the
    /// analog low-pass prototype, with pre-warped edges. Unit gain at the
    /// geometric band center.
    pub fn butterworth_bandpass(band: BandSpec, fs: f64) -> Result<Self> {
        band.validate(fs)?;
        let n = band.order / 2;
        let k = 2.0 * fs;
        let wl = k * (PI * band.lo / fs).tan();
        let wh = k * (PI * band.hi / fs).tan();
        let w0 = (wl * wh).sqrt();
        let bw = wh - wl;

        let bilinear = |s: Complex64| (k + s) / (k - s);
        let section = |p1: Complex64, p2: Complex64| {
            let (z1, z2) = (bilinear(p1), bilinear(p2));
            Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(z1 + z2).re, (z1 * z2).re],
            }
        };
        let split = |p: Complex64| {
            let pb = p * bw;
            let root = (pb * pb - 4.0 * w0 * w0).sqrt();
            ((pb + root) / 2.0, (pb - root) / 2.0)
        };

        let mut sections = Vec::with_capacity(n);
        for i in 0..n {
            let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
            let p = Complex64::from_polar(1.0, theta);
            if p.im > 1e-12 {
                // Conjugate partner yields the conjugates of both band-pass poles.
                let (s1, s2) = split(p);
                sections.push(section(s1, s1.conj()));
                sections.push(section(s2, s2.conj()));
            } else if p.im.abs() <= 1e-12 {
                let (s1, s2) = split(Complex64::new(p.re, 0.0));
                sections.push(section(s1, s2));
            }
        }
        debug_assert_eq!(sections.len(), n);

        let wc = 2.0 * (w0 / k).atan();
        let mut filt = SosFilter { sections };
        let gain = 1.0 / filt.response(wc).norm();
        let per_section = gain.powf(1.0 / n as f64);
        for s in &mut filt.sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(filt)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Complex response at normalized angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        self.sections.iter().map(|s| s.response(w)).product()
    }

    /// Padding used by [`SosFilter::filtfilt`] at each end.
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.sections.len() + 1)
    }

    /// Single causal pass from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut state = vec![[0.0; 2]; self.sections.len()];
        self.run(x.iter().copied(), &mut state)
    }

    fn run(&self, x: impl Iterator<Item = f64>, state: &mut [[f64; 2]]) -> Vec<f64> {
        x.map(|mut v| {
            for (s, z) in self.sections.iter().zip(state.iter_mut()) {
                v = s.step(v, z);
            }
            v
        })
        .collect()
    }

    fn initial_state(&self, level: f64) -> Vec<[f64; 2]> {
        let mut u = level;
        self.sections
            .iter()
            .map(|s| {
                let z = s.steady_state(u);
                u *= s.dc_gain();
                z
            })
            .collect()
    }

    /// Zero-phase forward-backward application. Ends are extended by odd
    /// reflection and each pass starts from the steady state of its first
    /// sample, so the result is linear in `x`.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pad = self.pad_len();
        if x.len() <= pad {
            return Err(Error::InputTooShort {
                needed: pad + 1,
                got: x.len(),
            });
        }
        let n = x.len();
        let (first, last) = (x[0], x[n - 1]);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        let mut state = self.initial_state(ext[0]);
        let mut fwd = self.run(ext.iter().copied(), &mut state);
        fwd.reverse();
        let mut state = self.initial_state(fwd[0]);
        let mut back = self.run(fwd.iter().copied(), &mut state);
        back.reverse();
        back.truncate(pad + n);
        back.drain(..pad);
        Ok(back)
    }
}

/// Zero-phase Butterworth band-pass of `x`.
pub fn bandpass_filter(x: &Signal, band: BandSpec) -> Result<Signal> {
    let filt = SosFilter::butterworth_bandpass(band, x.fs())?;
    Ok(x.derived(filt.filtfilt(x.samples())?))
}
