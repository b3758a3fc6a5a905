use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether intervals come from ECG R peaks or BCG J peaks. Labeling only;
/// every computation treats both identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntervalKind {
    #[serde(rename = "RR")]
    Rr,
    #[serde(rename = "JJ")]
    Jj,
}

/// Beat-to-beat intervals in ms, each anchored (in seconds) at the beat that
/// ends it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSeries {
    intervals: Vec<f64>,
    anchors: Vec<f64>,
    kind: IntervalKind,
}

impl IntervalSeries {
    pub fn new(intervals: Vec<f64>, anchors: Vec<f64>, kind: IntervalKind) -> Result<Self> {
        if intervals.len() != anchors.len() {
            return Err(Error::param(format!(
                "{} intervals but {} anchors",
                intervals.len(),
                anchors.len()
            )));
        }
        if let Some(i) = intervals.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param(format!(
                "interval {i} is not a positive finite value"
            )));
        }
        if anchors.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("interval anchors must be finite"));
        }
        if let Some(i) = anchors.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::param(format!(
                "anchors not strictly increasing at interval {}",
                i + 1
            )));
        }
        Ok(IntervalSeries {
            intervals,
            anchors,
            kind,
        })
    }

    /// Anchors built by accumulating the intervals from `start` seconds.
    pub fn from_intervals(intervals: Vec<f64>, start: f64, kind: IntervalKind) -> Result<Self> {
        let anchors = intervals
            .iter()
            .scan(start, |t, ms| {
                *t += ms / 1000.0;
                Some(*t)
            })
            .collect();
        Self::new(intervals, anchors, kind)
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn kind(&self) -> IntervalKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn with_kind(mut self, kind: IntervalKind) -> Self {
        self.kind = kind;
        self
    }

    /// All anchors moved by `dt` seconds; intervals untouched.
    pub fn shifted(&self, dt: f64) -> Self {
        IntervalSeries {
            intervals: self.intervals.clone(),
            anchors: self.anchors.iter().map(|a| a + dt).collect(),
            kind: self.kind,
        }
    }

    /// Time between the first and last anchor, in seconds.
    pub fn span_s(&self) -> f64 {
        match (self.anchors.first(), self.anchors.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Normal-to-normal screening rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnConfig {
    pub min_ms: f64,
    pub max_ms: f64,
    /// Largest accepted fractional deviation from the reference median.
    pub max_deviation: f64,
    /// How many previously accepted intervals form the reference median.
    pub window: usize,
}

impl Default for NnConfig {
    fn default() -> Self {
        NnConfig {
            min_ms: 300.0,
            max_ms: 2000.0,
            max_deviation: 0.2,
            window: 5,
        }
    }
}

impl NnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_ms > 0.0
            && self.min_ms < self.max_ms
            && self.max_deviation > 0.0
            && self.window >= 1
        {
            Ok(())
        } else {
            Err(Error::param(format!(
                "invalid NN screening configuration {self:?}"
            )))
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Drops intervals outside the physiological range or too far from the
/// median of the last few accepted intervals.
pub fn clean_nn(iv: &IntervalSeries, cfg: &NnConfig) -> Result<IntervalSeries> {
    cfg.validate()?;
    if iv.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut intervals = Vec::with_capacity(iv.len());
    let mut anchors = Vec::with_capacity(iv.len());
    let mut scratch = Vec::with_capacity(cfg.window);
    for (&ms, &at) in iv.intervals.iter().zip(&iv.anchors) {
        if ms < cfg.min_ms || ms > cfg.max_ms {
            continue;
        }
        let recent = &intervals[intervals.len().saturating_sub(cfg.window)..];
        if !recent.is_empty() {
            scratch.clear();
            scratch.extend_from_slice(recent);
            let reference = median(&mut scratch);
            if (ms - reference).abs() > cfg.max_deviation * reference {
                continue;
            }
        }
        intervals.push(ms);
        anchors.push(at);
    }
    if intervals.is_empty() {
        return Err(Error::EmptyAfterCleaning);
    }
    IntervalSeries::new(intervals, anchors, iv.kind)
}
