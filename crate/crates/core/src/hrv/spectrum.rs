use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Shortest allowed segment, in samples.
pub const MIN_SEGMENT: usize = 16;

/// One-sided power spectral density on a uniform grid starting at 0 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Hz
    pub freqs: Vec<f64>,
    /// signal units squared per Hz (ms²/Hz for tachograms)
    pub psd: Vec<f64>,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    /// Integral of the piecewise-linear density over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.freqs.len().saturating_sub(1) {
            let (f0, f1) = (self.freqs[k], self.freqs[k + 1]);
            let (a, b) = (lo.max(f0), hi.min(f1));
            if b <= a {
                continue;
            }
            let at = |f: f64| self.psd[k] + (self.psd[k + 1] - self.psd[k]) * (f - f0) / (f1 - f0);
            acc += 0.5 * (at(a) + at(b)) * (b - a);
        }
        acc
    }

    /// Frequency of the largest density value.
    pub fn peak_frequency(&self) -> f64 {
        let k = (0..self.psd.len()).fold(0, |b, k| if self.psd[k] > self.psd[b] { k } else { b });
        self.freqs[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelchEstimate {
    pub spectrum: Spectrum,
    pub segments: usize,
    pub warnings: Vec<String>,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Averaged Hann-windowed periodogram, density-scaled so the spectrum
/// integrates to the mean square of the input.
///
/// A signal shorter than one segment falls back to a single periodogram
/// over its full length and says so in `warnings`.
pub fn welch_psd(x: &Signal, segment_s: f64, overlap_fraction: f64) -> Result<WelchEstimate> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::param(format!(
            "overlap fraction must be in [0, 1), got {overlap_fraction}"
        )));
    }
    let fs = x.fs();
    let requested = (segment_s * fs).round();
    if !(requested.is_finite() && requested >= MIN_SEGMENT as f64) {
        return Err(Error::param(format!(
            "segment of {segment_s} s at {fs} Hz is shorter than {MIN_SEGMENT} samples"
        )));
    }
    let data = x.samples();
    let mut warnings = Vec::new();
    let mut nseg = requested as usize;
    if data.len() < nseg {
        if data.len() < MIN_SEGMENT {
            return Err(Error::InputTooShort {
                needed: MIN_SEGMENT,
                got: data.len(),
            });
        }
        warnings.push(format!(
            "signal of {} samples is shorter than one {nseg}-sample segment; using a single periodogram",
            data.len()
        ));
        nseg = data.len();
    }
    let step = (nseg - (overlap_fraction * nseg as f64).floor() as usize).max(1);
    let window = hann(nseg);
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nseg);

    let bins = nseg / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); nseg];
    let mut segments = 0;
    let mut start = 0;
    while start + nseg <= data.len() {
        for (b, (v, w)) in buf
            .iter_mut()
            .zip(data[start..start + nseg].iter().zip(&window))
        {
            *b = Complex::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (fs * power * segments as f64);
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (nseg % 2 == 0 && k == nseg / 2) {
                1.0
            } else {
                2.0
            };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..bins).map(|k| k as f64 * fs / nseg as f64).collect();
    Ok(WelchEstimate {
        spectrum: Spectrum { freqs, psd },
        segments,
        warnings,
    })
}

/// Edges of the VLF, LF and HF bands in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqBands {
    pub vlf: (f64, f64),
    pub lf: (f64, f64),
    pub hf: (f64, f64),
}

impl Default for FreqBands {
    fn default() -> Self {
        FreqBands {
            vlf: (0.0033, 0.04),
            lf: (0.04, 0.15),
            hf: (0.15, 0.4),
        }
    }
}

impl FreqBands {
    pub fn validate(&self) -> Result<()> {
        let edges = [
            self.vlf.0, self.vlf.1, self.lf.0, self.lf.1, self.hf.0, self.hf.1,
        ];
        let ordered = edges.windows(2).all(|w| w[0] <= w[1])
            && self.vlf.0 < self.vlf.1
            && self.lf.0 < self.lf.1
            && self.hf.0 < self.hf.1;
        if edges[0] >= 0.0 && ordered {
            Ok(())
        } else {
            Err(Error::param(format!(
                "frequency bands must be ordered and non-overlapping: {self:?}"
            )))
        }
    }
}

/// Spectral HRV indices, all powers in ms².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqDomainIndices {
    pub vlf_power: f64,
    pub lf_power: f64,
    pub hf_power: f64,
    /// Power from the bottom of VLF to the top of HF.
    pub total_power: f64,
    /// Absent when HF power is zero.
    pub lf_hf_ratio: Option<f64>,
}

pub fn band_powers(s: &Spectrum) -> Result<FreqDomainIndices> {
    band_powers_with(s, &FreqBands::default())
}

/// Trapezoidal band integrals of the linearly interpolated density.
pub fn band_powers_with(s: &Spectrum, bands: &FreqBands) -> Result<FreqDomainIndices> {
    bands.validate()?;
    let top = s.freqs.last().copied().unwrap_or(0.0);
    if s.freqs.len() < 2 || top < bands.hf.1 {
        return Err(Error::param(format!(
            "spectrum ends at {top} Hz, below the {} Hz top of the HF band",
            bands.hf.1
        )));
    }
    let vlf = s.integrate(bands.vlf.0, bands.vlf.1);
    let lf = s.integrate(bands.lf.0, bands.lf.1);
    let hf = s.integrate(bands.hf.0, bands.hf.1);
    Ok(FreqDomainIndices {
        vlf_power: vlf,
        lf_power: lf,
        hf_power: hf,
        total_power: s.integrate(bands.vlf.0, bands.hf.1),
        lf_hf_ratio: (hf > 0.0).then(|| lf / hf),
    })
}
