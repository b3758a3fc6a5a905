//! Uniformly sampled signals and the preprocessing chain that feeds the
//! beat detectors: zero-phase band-pass, five-point derivative, squaring and
//! moving-window integration.

mod filter;
mod preprocess;
mod stages;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{bandpass_filter, BandSpec, Biquad, SosFilter};
pub use preprocess::{
    preprocess, preprocess_bcg, preprocess_bcg_with, preprocess_ecg, preprocess_ecg_with,
    PreprocessConfig, PreprocessedSignal, MIN_FS,
};
pub use stages::{derivative, moving_window_integrate, square};

/// Recording modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Ecg,
    Bcg,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Ecg => "ecg",
            Modality::Bcg => "bcg",
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ecg" => Ok(Modality::Ecg),
            "bcg" => Ok(Modality::Bcg),
            other => Err(Error::Config(format!("unknown modality `{other}`"))),
        }
    }
}

/// A uniformly sampled amplitude series.
///
/// Samples are finite, non-empty and `fs > 0`; [`Signal::new`] and
/// [`Signal::with_start`] enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
    t0: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        Self::with_start(samples, fs, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, fs: f64, t0: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::param(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if !t0.is_finite() {
            return Err(Error::param("start time must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(Signal { samples, fs, t0 })
    }

    /// Builds a signal derived from an already validated one.
    pub(crate) fn derived(&self, samples: Vec<f64>) -> Signal {
        debug_assert_eq!(samples.len(), self.samples.len());
        Signal {
            samples,
            fs: self.fs,
            t0: self.t0,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i` in seconds.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.fs
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    pub fn scaled(&self, gain: f64) -> Signal {
        self.derived(self.samples.iter().map(|v| v * gain).collect())
    }

    /// Same samples, different start time.
    pub fn shifted(&self, dt: f64) -> Signal {
        Signal {
            samples: self.samples.clone(),
            fs: self.fs,
            t0: self.t0 + dt,
        }
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }
}
