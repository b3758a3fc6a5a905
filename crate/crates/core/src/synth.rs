//! Paired ECG/BCG recordings with known beat times.
//!
//! Beat trains carry sinusoidal LF and HF interval modulation plus white
//! jitter. Waveforms are sums of Gaussian bumps, one set per beat, with
//! optional white Gaussian noise at a target SNR. All randomness comes from
//! ChaCha8 seeded with a `u64`, so output is identical across platforms.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::detect::{BeatKind, BeatSeries};
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Shortest interval the generator will emit.
pub const MIN_GAP_MS: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatTrainProfile {
    pub duration_s: f64,
    pub mean_rr_ms: f64,
    pub lf_amp_ms: f64,
    pub lf_freq_hz: f64,
    pub hf_amp_ms: f64,
    pub hf_freq_hz: f64,
    /// Standard deviation of white interval jitter.
    pub jitter_ms: f64,
    pub seed: u64,
}

impl Default for BeatTrainProfile {
    fn default() -> Self {
        BeatTrainProfile {
            duration_s: 300.0,
            mean_rr_ms: 800.0,
            lf_amp_ms: 0.0,
            lf_freq_hz: 0.1,
            hf_amp_ms: 0.0,
            hf_freq_hz: 0.25,
            jitter_ms: 0.0,
            seed: 0,
        }
    }
}

impl BeatTrainProfile {
    pub fn validate(&self) -> Result<()> {
        let freq_ok = |f: f64| f > 0.0 && f < 0.5;
        let ok = self.duration_s.is_finite()
            && self.duration_s > 0.0
            && (300.0..=2000.0).contains(&self.mean_rr_ms)
            && self.lf_amp_ms >= 0.0
            && self.hf_amp_ms >= 0.0
            && self.jitter_ms >= 0.0
            && self.jitter_ms.is_finite()
            && freq_ok(self.lf_freq_hz)
            && freq_ok(self.hf_freq_hz);
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid beat train profile {self:?}")))
        }
    }
}

/// Beat times starting at 0 s. Each gap is the mean interval plus both
/// modulations evaluated at the current beat, plus jitter, floored at
/// [`MIN_GAP_MS`]. Beats stop before `duration_s`.
pub fn generate_beat_times(p: &BeatTrainProfile) -> Result<BeatSeries> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let jitter = Normal::new(0.0, p.jitter_ms).map_err(|e| Error::param(e.to_string()))?;
    let mut times = vec![0.0];
    let mut t = 0.0;
    loop {
        let mut gap = p.mean_rr_ms
            + p.lf_amp_ms * (2.0 * PI * p.lf_freq_hz * t).sin()
            + p.hf_amp_ms * (2.0 * PI * p.hf_freq_hz * t).sin();
        if p.jitter_ms > 0.0 {
            gap += jitter.sample(&mut rng);
        }
        t += gap.max(MIN_GAP_MS) / 1000.0;
        if t >= p.duration_s {
            break;
        }
        times.push(t);
    }
    if times.len() < 2 {
        return Err(Error::param(format!(
            "profile yields {} beat(s) in {} s; need at least 2",
            times.len(),
            p.duration_s
        )));
    }
    let n = times.len();
    BeatSeries::new(times, vec![1.0; n], BeatKind::EcgR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderProfile {
    pub fs: f64,
    pub duration_s: f64,
    /// Template-to-noise power ratio; `None` renders a clean signal.
    pub noise_snr_db: Option<f64>,
    /// Delay from R apex to J apex.
    pub bcg_latency_ms: f64,
    /// Peak template amplitude.
    pub amplitude_mv: f64,
    /// Seed for the noise generator.
    pub seed: u64,
}

impl RenderProfile {
    pub fn ecg(duration_s: f64) -> Self {
        RenderProfile {
            fs: 250.0,
            duration_s,
            noise_snr_db: None,
            bcg_latency_ms: 150.0,
            amplitude_mv: 1.0,
            seed: 0,
        }
    }

    /// Mid-range of the 30-70 mV raw BCG amplitude.
    pub fn bcg(duration_s: f64) -> Self {
        RenderProfile {
            amplitude_mv: 50.0,
            ..Self::ecg(duration_s)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fs.is_finite()
            && self.fs >= 100.0
            && self.duration_s.is_finite()
            && self.duration_s > 0.0
            && (0.0..=400.0).contains(&self.bcg_latency_ms)
            && self.amplitude_mv.is_finite()
            && self.amplitude_mv > 0.0
            && self.noise_snr_db.is_none_or(f64::is_finite);
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid render profile {self:?}")))
        }
    }
}

/// One Gaussian wave of a beat template: offset from the fiducial (s),
/// relative amplitude, width (s).
#[derive(Debug, Clone, Copy)]
struct Wave {
    offset: f64,
    amp: f64,
    width: f64,
}

const fn wave(offset: f64, amp: f64, width: f64) -> Wave {
    Wave { offset, amp, width }
}

/// P, Q, R, S, T.
const ECG_TEMPLATE: [Wave; 5] = [
    wave(-0.200, 0.12, 0.025),
    wave(-0.035, -0.12, 0.010),
    wave(0.000, 1.00, 0.011),
    wave(0.035, -0.25, 0.010),
    wave(0.280, 0.30, 0.045),
];

/// H, I, J, K, L, M, N: alternating deflections around a dominant J.
const BCG_TEMPLATE: [Wave; 7] = [
    wave(-0.100, 0.25, 0.018),
    wave(-0.050, -0.45, 0.018),
    wave(0.000, 1.00, 0.020),
    wave(0.055, -0.60, 0.020),
    wave(0.110, 0.30, 0.022),
    wave(0.165, -0.15, 0.025),
    wave(0.220, 0.08, 0.028),
];

/// Bumps are cut off this many widths from their centre.
const SUPPORT: f64 = 6.0;

fn render(
    fiducials: &[f64],
    template: &[Wave],
    r: &RenderProfile,
    noise_seed: u64,
) -> Result<Signal> {
    r.validate()?;
    if fiducials.is_empty() {
        return Err(Error::param("cannot render a recording with no beats"));
    }
    let n = (r.duration_s * r.fs).round() as usize;
    let mut x = vec![0.0; n];
    for &t in fiducials {
        for w in template {
            let c = t + w.offset;
            let lo = (((c - SUPPORT * w.width) * r.fs).floor().max(0.0)) as usize;
            let hi = (((c + SUPPORT * w.width) * r.fs).ceil().max(0.0) as usize).min(n);
            for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
                let d = (i as f64 / r.fs - c) / w.width;
                *v += r.amplitude_mv * w.amp * (-0.5 * d * d).exp();
            }
        }
    }
    if let Some(snr) = r.noise_snr_db {
        let power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let sigma = (power / 10f64.powf(snr / 10.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        for v in &mut x {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * z;
        }
    }
    Signal::new(x, r.fs)
}

fn check_beats(b: &BeatSeries, r: &RenderProfile) -> Result<()> {
    if b.is_empty() {
        return Err(Error::param("cannot render a recording with no beats"));
    }
    if b.times().iter().any(|&t| t < 0.0 || t >= r.duration_s) {
        return Err(Error::param(
            "beat times must lie within the rendered duration",
        ));
    }
    Ok(())
}

/// ECG with the R apex at each beat time.
pub fn render_ecg(b: &BeatSeries, r: &RenderProfile) -> Result<Signal> {
    check_beats(b, r)?;
    render(b.times(), &ECG_TEMPLATE, r, r.seed)
}

/// BCG with the J apex `bcg_latency_ms` after each beat time.
pub fn render_bcg(b: &BeatSeries, r: &RenderProfile) -> Result<Signal> {
    check_beats(b, r)?;
    let lag = r.bcg_latency_ms / 1000.0;
    let j: Vec<f64> = b.times().iter().map(|t| t + lag).collect();
    render(&j, &BCG_TEMPLATE, r, r.seed)
}

/// One BCG beat template sampled at `fs` over ±0.5 s, unit amplitude.
pub fn bcg_template(fs: f64) -> Vec<f64> {
    let half = (0.5 * fs).round() as i64;
    (-half..=half)
        .map(|i| {
            let t = i as f64 / fs;
            BCG_TEMPLATE
                .iter()
                .map(|w| w.amp * (-0.5 * ((t - w.offset) / w.width).powi(2)).exp())
                .sum()
        })
        .collect()
}

/// Settings for a paired ECG/BCG recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairProfile {
    pub train: BeatTrainProfile,
    pub fs: f64,
    pub noise_snr_db: Option<f64>,
    pub bcg_latency_ms: f64,
    pub ecg_amplitude_mv: f64,
    pub bcg_amplitude_mv: f64,
}

impl Default for PairProfile {
    fn default() -> Self {
        PairProfile {
            train: BeatTrainProfile::default(),
            fs: 250.0,
            noise_snr_db: None,
            bcg_latency_ms: 150.0,
            ecg_amplitude_mv: 1.0,
            bcg_amplitude_mv: 50.0,
        }
    }
}

impl PairProfile {
    fn render_profile(&self, amplitude_mv: f64, seed: u64) -> RenderProfile {
        RenderProfile {
            fs: self.fs,
            duration_s: self.train.duration_s,
            noise_snr_db: self.noise_snr_db,
            bcg_latency_ms: self.bcg_latency_ms,
            amplitude_mv,
            seed,
        }
    }

    pub fn ecg_render(&self) -> RenderProfile {
        self.render_profile(
            self.ecg_amplitude_mv,
            self.train.seed.wrapping_mul(2).wrapping_add(1),
        )
    }

    pub fn bcg_render(&self) -> RenderProfile {
        self.render_profile(
            self.bcg_amplitude_mv,
            self.train.seed.wrapping_mul(2).wrapping_add(2),
        )
    }
}

/// A synthetic subject: shared beat train and both waveforms.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    /// R apex times.
    pub r_peaks: BeatSeries,
    /// J apex times (R plus latency).
    pub j_peaks: BeatSeries,
    pub ecg: Signal,
    pub bcg: Signal,
}

pub fn synthesize_pair(p: &PairProfile) -> Result<SyntheticPair> {
    let beats = generate_beat_times(&p.train)?;
    let ecg_r = p.ecg_render();
    let bcg_r = p.bcg_render();
    let ecg = render_ecg(&beats, &ecg_r)?;
    let bcg = render_bcg(&beats, &bcg_r)?;
    let r_peaks = beats.clone().with_amplitude(p.ecg_amplitude_mv);
    let j_peaks = beats
        .shifted(p.bcg_latency_ms / 1000.0)
        .with_kind(BeatKind::BcgJ)
        .with_amplitude(p.bcg_amplitude_mv);
    Ok(SyntheticPair {
        r_peaks,
        j_peaks,
        ecg,
        bcg,
    })
}
