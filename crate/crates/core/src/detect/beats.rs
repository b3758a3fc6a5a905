use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrv::{IntervalKind, IntervalSeries};
use crate::signal::Modality;

/// Which fiducial a beat series marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeatKind {
    /// ECG R apex.
    #[serde(rename = "ecg_r")]
    EcgR,
    /// BCG J apex.
    #[serde(rename = "bcg_j")]
    BcgJ,
}

impl BeatKind {
    pub fn modality(self) -> Modality {
        match self {
            BeatKind::EcgR => Modality::Ecg,
            BeatKind::BcgJ => Modality::Bcg,
        }
    }

    pub fn interval_kind(self) -> IntervalKind {
        match self {
            BeatKind::EcgR => IntervalKind::Rr,
            BeatKind::BcgJ => IntervalKind::Jj,
        }
    }
}

impl From<Modality> for BeatKind {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Ecg => BeatKind::EcgR,
            Modality::Bcg => BeatKind::BcgJ,
        }
    }
}

/// Beat timestamps in seconds with the waveform amplitude at each beat.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatSeries {
    times: Vec<f64>,
    amplitudes: Vec<f64>,
    kind: BeatKind,
}

impl BeatSeries {
    pub fn new(times: Vec<f64>, amplitudes: Vec<f64>, kind: BeatKind) -> Result<Self> {
        if times.len() != amplitudes.len() {
            return Err(Error::param(format!(
                "{} beat times but {} amplitudes",
                times.len(),
                amplitudes.len()
            )));
        }
        if times.iter().chain(&amplitudes).any(|v| !v.is_finite()) {
            return Err(Error::param("beat times and amplitudes must be finite"));
        }
        if let Some(w) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::param(format!(
                "beat times not strictly increasing at beat {}",
                w + 1
            )));
        }
        Ok(BeatSeries {
            times,
            amplitudes,
            kind,
        })
    }

    pub fn empty(kind: BeatKind) -> Self {
        BeatSeries {
            times: Vec::new(),
            amplitudes: Vec::new(),
            kind,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn kind(&self) -> BeatKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Every beat moved by `dt` seconds, e.g. a fixed electromechanical delay.
    pub fn shifted(&self, dt: f64) -> BeatSeries {
        BeatSeries {
            times: self.times.iter().map(|t| t + dt).collect(),
            amplitudes: self.amplitudes.clone(),
            kind: self.kind,
        }
    }

    pub fn with_kind(mut self, kind: BeatKind) -> BeatSeries {
        self.kind = kind;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> BeatSeries {
        self.amplitudes.iter_mut().for_each(|a| *a = amplitude);
        self
    }
}

/// Beat-to-beat intervals in milliseconds, each anchored at its terminating
/// beat.
pub fn beats_to_intervals(b: &BeatSeries) -> Result<IntervalSeries> {
    if b.len() < 2 {
        return Err(Error::InsufficientBeats {
            needed: 2,
            got: b.len(),
        });
    }
    let intervals = b.times.windows(2).map(|w| (w[1] - w[0]) * 1000.0).collect();
    IntervalSeries::new(intervals, b.times[1..].to_vec(), b.kind.interval_kind())
}

/// Heart rate in bpm from the mean interval.
pub fn mean_heart_rate(iv: &IntervalSeries) -> Result<f64> {
    if iv.is_empty() {
        return Err(Error::InsufficientBeats { needed: 2, got: 0 });
    }
    let mean = iv.intervals().iter().sum::<f64>() / iv.len() as f64;
    Ok(60_000.0 / mean)
}
