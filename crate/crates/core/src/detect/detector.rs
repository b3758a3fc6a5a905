//! Adaptive dual-threshold peak classification on the integrated envelope,
//! in the style of Pan and Tompkins, shared by the QRS and J-peak detectors.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{BeatKind, BeatSeries};
use crate::error::{Error, Result};
use crate::signal::{Modality, PreprocessedSignal};

/// Number of recent intervals averaged for the search-back trigger.
const RR_HISTORY: usize = 8;
/// Envelope peaks below this fraction of the input peak (in amplitude, so
/// squared here) are numerical residue, not signal.
const FLAT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Minimum spacing between accepted beats.
    pub refractory_s: f64,
    /// Search back once the gap since the last beat exceeds this multiple of
    /// the running mean interval.
    pub searchback_factor: f64,
    /// Position of the threshold between the noise and signal levels.
    pub threshold_fraction: f64,
    /// Beats earlier than this after the recording start are dropped.
    pub warmup_s: f64,
    /// Weight of a new peak in the running signal and noise levels.
    pub level_update: f64,
    /// Half-width of the window in which a beat is moved to the waveform
    /// maximum.
    pub refine_s: f64,
    /// Leading span used to seed the signal and noise levels.
    pub training_s: f64,
}

impl DetectorConfig {
    pub fn ecg() -> Self {
        DetectorConfig {
            refractory_s: 0.200,
            searchback_factor: 1.66,
            threshold_fraction: 0.25,
            warmup_s: 1.0,
            level_update: 0.125,
            refine_s: 0.075,
            training_s: 2.0,
        }
    }

    pub fn bcg() -> Self {
        DetectorConfig {
            refractory_s: 0.300,
            refine_s: 0.150,
            ..DetectorConfig::ecg()
        }
    }

    pub fn for_modality(m: Modality) -> Self {
        match m {
            Modality::Ecg => Self::ecg(),
            Modality::Bcg => Self::bcg(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.refractory_s > 0.0
            && self.searchback_factor > 1.0
            && self.threshold_fraction > 0.0
            && self.threshold_fraction < 1.0
            && self.warmup_s >= 0.0
            && self.level_update > 0.0
            && self.level_update < 1.0
            && self.refine_s >= 0.0
            && self.training_s > 0.0;
        let finite = [
            self.refractory_s,
            self.searchback_factor,
            self.threshold_fraction,
            self.warmup_s,
            self.level_update,
            self.refine_s,
            self.training_s,
        ]
        .iter()
        .all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::param(format!(
                "invalid detector configuration {self:?}"
            )))
        }
    }
}

/// R-peak detection on a preprocessed ECG.
pub fn detect_qrs(p: &PreprocessedSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    expect_modality(p, Modality::Ecg)?;
    detect(p, cfg)
}

/// J-peak detection on a preprocessed BCG.
pub fn detect_j_peaks(p: &PreprocessedSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    expect_modality(p, Modality::Bcg)?;
    detect(p, cfg)
}

/// Runs the detector matching `p`'s modality.
pub fn detect_beats(p: &PreprocessedSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    detect(p, cfg)
}

fn expect_modality(p: &PreprocessedSignal, m: Modality) -> Result<()> {
    if p.modality() == m {
        Ok(())
    } else {
        Err(Error::param(format!(
            "expected a preprocessed {m} signal, got {}",
            p.modality()
        )))
    }
}

fn samples_for(seconds: f64, fs: f64) -> usize {
    (seconds * fs).round() as usize
}

/// Local maxima of `y` above `floor`, thinned so that no two survivors are
/// closer than `distance`; taller peaks win. A final sample that is still
/// rising counts as a maximum.
fn candidate_peaks(y: &[f64], floor: f64, distance: usize) -> Vec<usize> {
    let n = y.len();
    let mut peaks: Vec<usize> = (1..n)
        .filter(|&i| y[i] > floor && y[i] > y[i - 1] && (i + 1 == n || y[i] >= y[i + 1]))
        .collect();
    if distance <= 1 || peaks.len() < 2 {
        return peaks;
    }
    let mut by_height = peaks.clone();
    by_height.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    let mut keep = vec![false; y.len()];
    let mut taken: Vec<usize> = Vec::new();
    for i in by_height {
        let lo = taken.partition_point(|&t| t + distance <= i);
        let clash = taken.get(lo).is_some_and(|&t| t < i + distance);
        if !clash {
            taken.insert(lo, i);
            keep[i] = true;
        }
    }
    peaks.retain(|&i| keep[i]);
    peaks
}

struct Levels {
    signal: f64,
    noise: f64,
    fraction: f64,
    update: f64,
}

impl Levels {
    fn threshold(&self) -> f64 {
        self.noise + self.fraction * (self.signal - self.noise)
    }

    fn signal_peak(&mut self, v: f64) {
        self.signal = self.update * v + (1.0 - self.update) * self.signal;
    }

    fn searchback_peak(&mut self, v: f64) {
        self.signal = 0.25 * v + 0.75 * self.signal;
    }

    fn noise_peak(&mut self, v: f64) {
        self.noise = self.update * v + (1.0 - self.update) * self.noise;
    }
}

/// Envelope peak indices classified as beats.
fn classify(
    y: &[f64],
    candidates: &[usize],
    cfg: &DetectorConfig,
    fs: f64,
    refractory: usize,
) -> Vec<usize> {
    let train = &y[..samples_for(cfg.training_s, fs).clamp(1, y.len())];
    let train_max = train.iter().copied().fold(0.0, f64::max);
    let train_mean = train.iter().sum::<f64>() / train.len() as f64;
    let mut levels = Levels {
        signal: train_max / 3.0,
        noise: train_mean / 2.0,
        fraction: cfg.threshold_fraction,
        update: cfg.level_update,
    };

    let mut beats: Vec<usize> = Vec::new();
    let mut rr: VecDeque<usize> = VecDeque::with_capacity(RR_HISTORY);
    let mut pending: Vec<usize> = Vec::new();

    let accept = |beats: &mut Vec<usize>, rr: &mut VecDeque<usize>, i: usize| {
        if let Some(&last) = beats.last() {
            if rr.len() == RR_HISTORY {
                rr.pop_front();
            }
            rr.push_back(i - last);
        }
        beats.push(i);
    };

    for &i in candidates {
        let v = y[i];

        if let (Some(&last), false) = (beats.last(), rr.is_empty()) {
            let mean_rr = rr.iter().sum::<usize>() as f64 / rr.len() as f64;
            if (i - last) as f64 > cfg.searchback_factor * mean_rr {
                let half = 0.5 * levels.threshold();
                let missed = pending
                    .iter()
                    .copied()
                    .filter(|&j| j - last >= refractory && i - j >= refractory && y[j] > half)
                    .max_by(|&a, &b| y[a].total_cmp(&y[b]).then(b.cmp(&a)));
                if let Some(j) = missed {
                    levels.searchback_peak(y[j]);
                    accept(&mut beats, &mut rr, j);
                    pending.retain(|&k| k > j);
                }
            }
        }

        let clear = beats.last().is_none_or(|&last| i - last >= refractory);
        if clear && v > levels.threshold() {
            levels.signal_peak(v);
            accept(&mut beats, &mut rr, i);
            pending.clear();
        } else {
            levels.noise_peak(v);
            pending.push(i);
        }
    }
    beats
}

const SUBSAMPLE_STEPS: f64 = 1024.0;

/// Sub-sample position of a local maximum from the parabola through it and
/// its neighbours, in samples, within ±0.5. Quantized to 1/1024 sample so
/// rescaling the input cannot perturb beat times in the last bits.
fn vertex_offset(x: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= x.len() {
        return 0.0;
    }
    let (a, b, c) = (x[k - 1], x[k], x[k + 1]);
    let curvature = a - 2.0 * b + c;
    if !(curvature < 0.0) {
        return 0.0;
    }
    let d = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
    (d * SUBSAMPLE_STEPS).round() / SUBSAMPLE_STEPS
}

fn detect(p: &PreprocessedSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    cfg.validate()?;
    let kind = BeatKind::from(p.modality());
    let y = p.integrated().samples();
    let filtered = p.filtered();
    let fs = p.source_fs();
    let refractory = samples_for(cfg.refractory_s, fs).max(1);
    let floor = (FLAT_FLOOR * p.input_peak()).powi(2);

    let candidates = candidate_peaks(y, floor, refractory);
    if candidates.is_empty() {
        return Ok(BeatSeries::empty(kind));
    }
    let events = classify(y, &candidates, cfg, fs, refractory);

    // Move each envelope event back by the chain delay, then onto the
    // waveform maximum nearby.
    let x = filtered.samples();
    let delay = p.envelope_delay();
    let half = samples_for(cfg.refine_s, fs);
    let mut refined: Vec<usize> = Vec::with_capacity(events.len());
    for e in events {
        let centre = e.saturating_sub(delay);
        let lo = centre.saturating_sub(half);
        let hi = (centre + half).min(x.len() - 1);
        let best = (lo..=hi).fold(lo, |b, k| if x[k] > x[b] { k } else { b });
        match refined.last_mut() {
            Some(prev) if best < *prev + refractory => {
                if x[best] > x[*prev] {
                    *prev = best;
                }
            }
            _ => refined.push(best),
        }
    }

    let warmup = (cfg.warmup_s * fs).ceil() as usize;
    refined.retain(|&k| k >= warmup);
    let times = refined
        .iter()
        .map(|&k| filtered.time_at(k) + vertex_offset(x, k) / fs)
        .collect();
    let amplitudes = refined.iter().map(|&k| x[k]).collect();
    BeatSeries::new(times, amplitudes, kind)
}
