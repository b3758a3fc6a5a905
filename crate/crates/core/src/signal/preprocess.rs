use serde::{Deserialize, Serialize};

use super::{
    bandpass_filter, derivative, moving_window_integrate, square, BandSpec, Modality, Signal,
};
use crate::error::{Error, Result};

/// Minimum sampling rate accepted by the modality pipelines.
pub const MIN_FS: f64 = 100.0;

/// Tunables for both modality pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub ecg_band: BandSpec,
    pub ecg_window_s: f64,
    pub bcg_gain: f64,
    pub bcg_band: BandSpec,
    /// Narrower band applied to the conditioned BCG before the envelope chain.
    pub bcg_detect_band: BandSpec,
    pub bcg_window_s: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            ecg_band: BandSpec::new(5.0, 20.0, 4),
            ecg_window_s: 0.150,
            bcg_gain: 10.0,
            bcg_band: BandSpec::new(0.1, 30.0, 4),
            bcg_detect_band: BandSpec::new(1.0, 10.0, 4),
            bcg_window_s: 0.250,
        }
    }
}

impl PreprocessConfig {
    /// Checks every band against `fs` without touching any samples.
    pub fn validate(&self, modality: Modality, fs: f64) -> Result<()> {
        if fs < MIN_FS {
            return Err(Error::param(format!(
                "sampling rate {fs} Hz is below the {MIN_FS} Hz minimum"
            )));
        }
        match modality {
            Modality::Ecg => {
                self.ecg_band.validate(fs)?;
                positive("ecg integrator window", self.ecg_window_s)
            }
            Modality::Bcg => {
                positive("bcg gain", self.bcg_gain)?;
                self.bcg_band.validate(fs)?;
                self.bcg_detect_band.validate(fs)?;
                positive("bcg integrator window", self.bcg_window_s)
            }
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{what} must be positive, got {v}")))
    }
}

/// Output of a modality pipeline.
///
/// `filtered` is the conditioned waveform used to place beats; `integrated`
/// is the non-negative energy envelope the detector thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedSignal {
    modality: Modality,
    filtered: Signal,
    integrated: Signal,
    input_peak: f64,
    integrator_window: usize,
}

impl PreprocessedSignal {
    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn filtered(&self) -> &Signal {
        &self.filtered
    }

    pub fn integrated(&self) -> &Signal {
        &self.integrated
    }

    pub fn source_fs(&self) -> f64 {
        self.filtered.fs()
    }

    /// Largest absolute amplitude entering the chain (after gain).
    pub fn input_peak(&self) -> f64 {
        self.input_peak
    }

    /// Integrator length in samples.
    pub fn integrator_window(&self) -> usize {
        self.integrator_window
    }

    /// Samples by which an envelope lobe trails the waveform event that
    /// produced it: two for the derivative plus half the integrator.
    pub fn envelope_delay(&self) -> usize {
        2 + (self.integrator_window.saturating_sub(1)) / 2
    }
}

fn envelope(band_limited: &Signal, window_s: f64) -> Result<(Signal, usize)> {
    let d = derivative(band_limited)?;
    let integrated = moving_window_integrate(&square(&d), window_s)?;
    let window = (window_s * band_limited.fs()).round() as usize;
    Ok((integrated, window))
}

/// ECG chain: band-pass, derivative, square, moving-window integration.
pub fn preprocess_ecg(x: &Signal) -> Result<PreprocessedSignal> {
    preprocess_ecg_with(x, &PreprocessConfig::default())
}

pub fn preprocess_ecg_with(x: &Signal, cfg: &PreprocessConfig) -> Result<PreprocessedSignal> {
    cfg.validate(Modality::Ecg, x.fs())?;
    let filtered = bandpass_filter(x, cfg.ecg_band)?;
    let (integrated, integrator_window) = envelope(&filtered, cfg.ecg_window_s)?;
    Ok(PreprocessedSignal {
        modality: Modality::Ecg,
        filtered,
        integrated,
        input_peak: x.peak_abs(),
        integrator_window,
    })
}

/// BCG chain: gain, wide conditioning band-pass, then the envelope chain on a
/// narrower detection band.
pub fn preprocess_bcg(x: &Signal, gain: f64) -> Result<PreprocessedSignal> {
    let cfg = PreprocessConfig {
        bcg_gain: gain,
        ..PreprocessConfig::default()
    };
    preprocess_bcg_with(x, &cfg)
}

pub fn preprocess_bcg_with(x: &Signal, cfg: &PreprocessConfig) -> Result<PreprocessedSignal> {
    cfg.validate(Modality::Bcg, x.fs())?;
    let amplified = x.scaled(cfg.bcg_gain);
    let filtered = bandpass_filter(&amplified, cfg.bcg_band)?;
    let detect = bandpass_filter(&filtered, cfg.bcg_detect_band)?;
    let (integrated, integrator_window) = envelope(&detect, cfg.bcg_window_s)?;
    Ok(PreprocessedSignal {
        modality: Modality::Bcg,
        filtered,
        integrated,
        input_peak: amplified.peak_abs(),
        integrator_window,
    })
}

/// Dispatches on modality with the BCG gain taken from `cfg`.
pub fn preprocess(
    x: &Signal,
    modality: Modality,
    cfg: &PreprocessConfig,
) -> Result<PreprocessedSignal> {
    match modality {
        Modality::Ecg => preprocess_ecg_with(x, cfg),
        Modality::Bcg => preprocess_bcg_with(x, cfg),
    }
}
