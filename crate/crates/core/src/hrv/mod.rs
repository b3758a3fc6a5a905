//! Interval series and the time- and frequency-domain HRV indices.

mod intervals;
mod spectrum;
mod tachogram;
mod time_domain;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use intervals::{clean_nn, IntervalKind, IntervalSeries, NnConfig};
pub use spectrum::{
    band_powers, band_powers_with, welch_psd, FreqBands, FreqDomainIndices, Spectrum,
    WelchEstimate, MIN_SEGMENT,
};
pub use tachogram::{
    linear_detrend, resample_tachogram, resample_tachogram_for_band, NaturalCubicSpline, Tachogram,
    DEFAULT_RESAMPLE_HZ, MIN_SPECTRAL_SPAN_S,
};
pub use time_domain::{time_domain, TimeDomainIndices, NN50_MS};

/// Everything downstream of the interval series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrvConfig {
    /// NN screening; `None` analyzes raw intervals.
    pub nn: Option<NnConfig>,
    pub resample_hz: f64,
    pub welch_segment_s: f64,
    pub welch_overlap: f64,
    pub bands: FreqBands,
}

impl Default for HrvConfig {
    fn default() -> Self {
        HrvConfig {
            nn: None,
            resample_hz: DEFAULT_RESAMPLE_HZ,
            welch_segment_s: 120.0,
            welch_overlap: 0.5,
            bands: FreqBands::default(),
        }
    }
}

impl HrvConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(nn) = &self.nn {
            nn.validate()?;
        }
        self.bands.validate()?;
        if !(self.resample_hz > 2.0 * self.bands.hf.1) {
            return Err(Error::param(format!(
                "tachogram rate {} Hz must exceed twice the top band edge {} Hz",
                self.resample_hz, self.bands.hf.1
            )));
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(Error::param("Welch overlap must be in [0, 1)"));
        }
        if !(self.welch_segment_s * self.resample_hz >= MIN_SEGMENT as f64) {
            return Err(Error::param(format!(
                "Welch segment must hold at least {MIN_SEGMENT} tachogram samples"
            )));
        }
        Ok(())
    }
}

/// Spectral analysis of one interval series.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyAnalysis {
    pub tachogram: Tachogram,
    pub spectrum: Spectrum,
    pub indices: FreqDomainIndices,
    pub warnings: Vec<String>,
}

/// Tachogram, Welch PSD and band powers.
pub fn frequency_domain(iv: &IntervalSeries, cfg: &HrvConfig) -> Result<FrequencyAnalysis> {
    let tachogram = resample_tachogram_for_band(iv, cfg.resample_hz, cfg.bands.hf.1)?;
    let welch = welch_psd(&tachogram.detrended, cfg.welch_segment_s, cfg.welch_overlap)?;
    let indices = band_powers_with(&welch.spectrum, &cfg.bands)?;
    let mut warnings = tachogram.warnings.clone();
    warnings.extend(welch.warnings);
    Ok(FrequencyAnalysis {
        tachogram,
        spectrum: welch.spectrum,
        indices,
        warnings,
    })
}

/// Full index set for one interval series.
#[derive(Debug, Clone, PartialEq)]
pub struct HrvAnalysis {
    /// The series the indices were computed from (after screening, if any).
    pub intervals: IntervalSeries,
    pub time: TimeDomainIndices,
    /// Absent when the series is too short for spectral analysis.
    pub frequency: Option<FrequencyAnalysis>,
    pub warnings: Vec<String>,
}

/// Optional NN screening, then time-domain and (when possible) spectral
/// indices. Too few intervals for a tachogram downgrades to a warning.
pub fn analyze(iv: &IntervalSeries, cfg: &HrvConfig) -> Result<HrvAnalysis> {
    cfg.validate()?;
    let intervals = match &cfg.nn {
        Some(nn) => clean_nn(iv, nn)?,
        None => iv.clone(),
    };
    let mut warnings = Vec::new();
    if intervals.len() < iv.len() {
        warnings.push(format!(
            "NN screening removed {} of {} intervals",
            iv.len() - intervals.len(),
            iv.len()
        ));
    }
    let time = time_domain(&intervals)?;
    let frequency = match frequency_domain(&intervals, cfg) {
        Ok(f) => {
            warnings.extend(f.warnings.iter().cloned());
            Some(f)
        }
        Err(e @ (Error::InsufficientData { .. } | Error::InputTooShort { .. })) => {
            warnings.push(format!("frequency-domain indices unavailable: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(HrvAnalysis {
        intervals,
        time,
        frequency,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_series_yields_time_domain_only() {
        let iv = IntervalSeries::from_intervals(vec![800.0; 3], 0.0, IntervalKind::Rr).unwrap();
        let a = analyze(&iv, &HrvConfig::default()).unwrap();
        assert_eq!(a.time.mean_hr, 75.0);
        assert!(a.frequency.is_none());
        assert_eq!(a.warnings.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(HrvConfig::default().validate().is_ok());
        let bad = HrvConfig {
            resample_hz: 0.7,
            ..HrvConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = HrvConfig {
            welch_overlap: 1.0,
            ..HrvConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = HrvConfig {
            bands: FreqBands {
                lf: (0.2, 0.1),
                ..FreqBands::default()
            },
            ..HrvConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn screening_is_reported() {
        let mut v = vec![800.0; 30];
        v[10] = 2500.0;
        let iv = IntervalSeries::from_intervals(v, 0.0, IntervalKind::Rr).unwrap();
        let cfg = HrvConfig {
            nn: Some(NnConfig::default()),
            ..HrvConfig::default()
        };
        let a = analyze(&iv, &cfg).unwrap();
        assert_eq!(a.intervals.len(), 29);
        assert!(a.warnings[0].contains("removed 1 of 30"));
        assert_eq!(a.time.sdnn, 0.0);
    }
}
