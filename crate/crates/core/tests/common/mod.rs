#![allow(dead_code)]

use hrvpair::detect::{detect_beats, BeatSeries, DetectorConfig};
use hrvpair::signal::{preprocess, Modality, PreprocessConfig, Signal};
use hrvpair::synth::{synthesize_pair, BeatTrainProfile, PairProfile, SyntheticPair};

/// One-to-one greedy matching of detections to reference beats.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    pub true_pos: usize,
    pub reference: usize,
    pub detected: usize,
}

impl Score {
    pub fn sensitivity(&self) -> f64 {
        self.true_pos as f64 / self.reference as f64
    }

    pub fn ppv(&self) -> f64 {
        self.true_pos as f64 / self.detected as f64
    }
}

/// Scores reference beats inside `[lo, hi]` against detections inside the
/// span widened by the tolerance.
pub fn score(truth: &[f64], found: &[f64], tol_s: f64, lo: f64, hi: f64) -> Score {
    let truth: Vec<f64> = truth
        .iter()
        .copied()
        .filter(|t| (lo..=hi).contains(t))
        .collect();
    let found: Vec<f64> = found
        .iter()
        .copied()
        .filter(|t| (lo - tol_s..=hi + tol_s).contains(t))
        .collect();
    let mut used = vec![false; found.len()];
    let mut tp = 0;
    for &t in &truth {
        let best = found
            .iter()
            .enumerate()
            .filter(|(i, f)| !used[*i] && (*f - t).abs() <= tol_s)
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()));
        if let Some((i, _)) = best {
            used[i] = true;
            tp += 1;
        }
    }
    Score {
        true_pos: tp,
        reference: truth.len(),
        detected: found.len(),
    }
}

pub fn pair(duration_s: f64, mean_rr_ms: f64, snr_db: Option<f64>, seed: u64) -> SyntheticPair {
    let p = PairProfile {
        train: BeatTrainProfile {
            duration_s,
            mean_rr_ms,
            lf_amp_ms: 25.0,
            hf_amp_ms: 15.0,
            jitter_ms: 10.0,
            seed,
            ..BeatTrainProfile::default()
        },
        noise_snr_db: snr_db,
        ..PairProfile::default()
    };
    synthesize_pair(&p).unwrap()
}

pub fn detect(x: &Signal, m: Modality) -> BeatSeries {
    let p = preprocess(x, m, &PreprocessConfig::default()).unwrap();
    detect_beats(&p, &DetectorConfig::for_modality(m)).unwrap()
}

/// Interval series whose values follow `base + amp·sin(2π·f·t)` sampled at
/// each beat, anchored at the terminating beat.
pub fn sinusoidal_intervals(
    base_ms: f64,
    amp_ms: f64,
    freq_hz: f64,
    duration_s: f64,
) -> hrvpair::hrv::IntervalSeries {
    let (mut t, mut iv, mut anchors) = (0.0, Vec::new(), Vec::new());
    while t < duration_s {
        let ms = base_ms + amp_ms * (2.0 * std::f64::consts::PI * freq_hz * t).sin();
        t += ms / 1000.0;
        iv.push(ms);
        anchors.push(t);
    }
    hrvpair::hrv::IntervalSeries::new(iv, anchors, hrvpair::hrv::IntervalKind::Rr).unwrap()
}

/// Subject `i` of a synthetic cohort: each has its own rhythm, variability
/// and noise, with ECG and BCG rendered from one shared beat train.
pub fn cohort_profile(i: u64, duration_s: f64, snr_db: f64) -> PairProfile {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + i);
    PairProfile {
        train: BeatTrainProfile {
            duration_s,
            mean_rr_ms: rng.random_range(670.0..1000.0),
            lf_amp_ms: rng.random_range(10.0..60.0),
            lf_freq_hz: rng.random_range(0.06..0.13),
            hf_amp_ms: rng.random_range(5.0..40.0),
            hf_freq_hz: rng.random_range(0.18..0.35),
            jitter_ms: rng.random_range(3.0..15.0),
            seed: i,
        },
        noise_snr_db: Some(snr_db),
        ..PairProfile::default()
    }
}

pub fn cohort_results(
    n: u64,
    duration_s: f64,
    snr_db: f64,
) -> Vec<hrvpair::compare::SubjectResult> {
    use rayon::prelude::*;
    let cfg = hrvpair::io::Config::default();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = synthesize_pair(&cohort_profile(i, duration_s, snr_db)).unwrap();
            let run = hrvpair::io::run_pair(&format!("s{i:02}"), &p.ecg, &p.bcg, &cfg).unwrap();
            hrvpair::compare::SubjectResult {
                subject_id: run.subject_id.clone(),
                ecg: run.ecg.indices(),
                bcg: run.bcg.indices(),
            }
        })
        .collect()
}
