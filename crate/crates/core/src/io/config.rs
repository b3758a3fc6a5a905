//! `key = value` configuration files.
//!
//! Every tunable default of the pipeline and the synthetic generator has a
//! key. Blank lines and `#` comments are ignored; unknown or repeated keys
//! are errors.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::detect::DetectorConfig;
use crate::error::{Error, Result};
use crate::hrv::{HrvConfig, NnConfig};
use crate::signal::{BandSpec, Modality, PreprocessConfig};
use crate::synth::{BeatTrainProfile, PairProfile};

/// Pipeline and synthesis settings. The synthetic beat train defaults to a
/// variable rhythm (30 ms LF, 20 ms HF, 10 ms jitter).
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub preprocess: PreprocessConfig,
    pub ecg_detector: DetectorConfig,
    pub bcg_detector: DetectorConfig,
    pub nn_enabled: bool,
    pub nn: NnConfig,
    /// Tachogram, Welch and band settings. Its `nn` field is ignored in favour
    /// of `nn_enabled`/`nn`.
    pub hrv: HrvConfig,
    pub synth: PairProfile,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            preprocess: PreprocessConfig::default(),
            ecg_detector: DetectorConfig::ecg(),
            bcg_detector: DetectorConfig::bcg(),
            nn_enabled: false,
            nn: NnConfig::default(),
            hrv: HrvConfig::default(),
            synth: PairProfile {
                train: BeatTrainProfile {
                    lf_amp_ms: 30.0,
                    hf_amp_ms: 20.0,
                    jitter_ms: 10.0,
                    ..BeatTrainProfile::default()
                },
                ..PairProfile::default()
            },
        }
    }
}

enum Slot<'a> {
    F64(&'a mut f64),
    Usize(&'a mut usize),
    U64(&'a mut u64),
    Bool(&'a mut bool),
    /// `inf` maps to `None`.
    Snr(&'a mut Option<f64>),
}

impl Slot<'_> {
    fn set(&mut self, raw: &str) -> std::result::Result<(), String> {
        let bad = |e: &dyn std::fmt::Display| format!("cannot parse `{raw}`: {e}");
        match self {
            Slot::F64(v) => **v = raw.parse::<f64>().map_err(|e| bad(&e))?,
            Slot::Usize(v) => **v = raw.parse().map_err(|e| bad(&e))?,
            Slot::U64(v) => **v = raw.parse().map_err(|e| bad(&e))?,
            Slot::Bool(v) => **v = raw.parse().map_err(|e| bad(&e))?,
            Slot::Snr(v) => {
                let x: f64 = raw.parse().map_err(|e| bad(&e))?;
                **v = if x == f64::INFINITY { None } else { Some(x) };
            }
        }
        Ok(())
    }

    fn show(&self) -> String {
        match self {
            Slot::F64(v) => v.to_string(),
            Slot::Usize(v) => v.to_string(),
            Slot::U64(v) => v.to_string(),
            Slot::Bool(v) => v.to_string(),
            Slot::Snr(v) => v.map_or("inf".into(), |x| x.to_string()),
        }
    }
}

fn band<'a>(out: &mut Vec<(String, Slot<'a>)>, prefix: &str, b: &'a mut BandSpec) {
    out.push((format!("{prefix}.lo"), Slot::F64(&mut b.lo)));
    out.push((format!("{prefix}.hi"), Slot::F64(&mut b.hi)));
    out.push((format!("{prefix}.order"), Slot::Usize(&mut b.order)));
}

fn detector<'a>(out: &mut Vec<(String, Slot<'a>)>, prefix: &str, d: &'a mut DetectorConfig) {
    out.push((
        format!("{prefix}.refractory_s"),
        Slot::F64(&mut d.refractory_s),
    ));
    out.push((
        format!("{prefix}.searchback_factor"),
        Slot::F64(&mut d.searchback_factor),
    ));
    out.push((
        format!("{prefix}.threshold_fraction"),
        Slot::F64(&mut d.threshold_fraction),
    ));
    out.push((format!("{prefix}.warmup_s"), Slot::F64(&mut d.warmup_s)));
    out.push((
        format!("{prefix}.level_update"),
        Slot::F64(&mut d.level_update),
    ));
    out.push((format!("{prefix}.refine_s"), Slot::F64(&mut d.refine_s)));
    out.push((format!("{prefix}.training_s"), Slot::F64(&mut d.training_s)));
}

impl Config {
    /// Every key in canonical order.
    fn slots(&mut self) -> Vec<(String, Slot<'_>)> {
        let mut s = Vec::new();
        let p = &mut self.preprocess;
        band(&mut s, "ecg.band", &mut p.ecg_band);
        s.push(("ecg.window_s".into(), Slot::F64(&mut p.ecg_window_s)));
        s.push(("bcg.gain".into(), Slot::F64(&mut p.bcg_gain)));
        band(&mut s, "bcg.band", &mut p.bcg_band);
        band(&mut s, "bcg.detect_band", &mut p.bcg_detect_band);
        s.push(("bcg.window_s".into(), Slot::F64(&mut p.bcg_window_s)));
        detector(&mut s, "ecg.detect", &mut self.ecg_detector);
        detector(&mut s, "bcg.detect", &mut self.bcg_detector);
        s.push(("nn.enabled".into(), Slot::Bool(&mut self.nn_enabled)));
        s.push(("nn.min_ms".into(), Slot::F64(&mut self.nn.min_ms)));
        s.push(("nn.max_ms".into(), Slot::F64(&mut self.nn.max_ms)));
        s.push((
            "nn.max_deviation".into(),
            Slot::F64(&mut self.nn.max_deviation),
        ));
        s.push(("nn.window".into(), Slot::Usize(&mut self.nn.window)));
        let h = &mut self.hrv;
        s.push(("hrv.resample_hz".into(), Slot::F64(&mut h.resample_hz)));
        s.push((
            "hrv.welch_segment_s".into(),
            Slot::F64(&mut h.welch_segment_s),
        ));
        s.push(("hrv.welch_overlap".into(), Slot::F64(&mut h.welch_overlap)));
        for (name, (lo, hi)) in [
            ("vlf", &mut h.bands.vlf),
            ("lf", &mut h.bands.lf),
            ("hf", &mut h.bands.hf),
        ] {
            s.push((format!("hrv.{name}.lo"), Slot::F64(lo)));
            s.push((format!("hrv.{name}.hi"), Slot::F64(hi)));
        }
        let y = &mut self.synth;
        s.push((
            "synth.duration_s".into(),
            Slot::F64(&mut y.train.duration_s),
        ));
        s.push((
            "synth.mean_rr_ms".into(),
            Slot::F64(&mut y.train.mean_rr_ms),
        ));
        s.push(("synth.lf_amp_ms".into(), Slot::F64(&mut y.train.lf_amp_ms)));
        s.push((
            "synth.lf_freq_hz".into(),
            Slot::F64(&mut y.train.lf_freq_hz),
        ));
        s.push(("synth.hf_amp_ms".into(), Slot::F64(&mut y.train.hf_amp_ms)));
        s.push((
            "synth.hf_freq_hz".into(),
            Slot::F64(&mut y.train.hf_freq_hz),
        ));
        s.push(("synth.jitter_ms".into(), Slot::F64(&mut y.train.jitter_ms)));
        s.push(("synth.seed".into(), Slot::U64(&mut y.train.seed)));
        s.push(("synth.fs".into(), Slot::F64(&mut y.fs)));
        s.push(("synth.snr_db".into(), Slot::Snr(&mut y.noise_snr_db)));
        s.push((
            "synth.bcg_latency_ms".into(),
            Slot::F64(&mut y.bcg_latency_ms),
        ));
        s.push((
            "synth.ecg_amplitude_mv".into(),
            Slot::F64(&mut y.ecg_amplitude_mv),
        ));
        s.push((
            "synth.bcg_amplitude_mv".into(),
            Slot::F64(&mut y.bcg_amplitude_mv),
        ));
        s
    }

    pub fn keys() -> Vec<String> {
        Config::default()
            .slots()
            .into_iter()
            .map(|(k, _)| k)
            .collect()
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut slots = self.slots();
        let (_, slot) = slots
            .iter_mut()
            .find(|(k, _)| k == key)
            .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        slot.set(value)
            .map_err(|m| Error::Config(format!("{key}: {m}")))
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_owned()) {
                return Err(Error::Config(format!("line {}: `{k}` set twice", i + 1)));
            }
            cfg.set(k, v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, e.root_message())))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    /// Checks everything that does not depend on a sampling rate.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.root_message());
        self.ecg_detector.validate().map_err(wrap)?;
        self.bcg_detector.validate().map_err(wrap)?;
        self.nn.validate().map_err(wrap)?;
        self.hrv_config().validate().map_err(wrap)?;
        self.synth.train.validate().map_err(wrap)?;
        self.synth.ecg_render().validate().map_err(wrap)?;
        self.synth.bcg_render().validate().map_err(wrap)?;
        Ok(())
    }

    /// Checks filter bands and windows against a recording's rate.
    pub fn validate_for(&self, modality: Modality, fs: f64) -> Result<()> {
        self.preprocess
            .validate(modality, fs)
            .map_err(|e| Error::Config(format!("{modality} at {fs} Hz: {}", e.root_message())))
    }

    pub fn detector(&self, m: Modality) -> &DetectorConfig {
        match m {
            Modality::Ecg => &self.ecg_detector,
            Modality::Bcg => &self.bcg_detector,
        }
    }

    pub fn hrv_config(&self) -> HrvConfig {
        HrvConfig {
            nn: self.nn_enabled.then_some(self.nn),
            ..self.hrv
        }
    }

    /// All keys with their current values.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.clone()
            .slots()
            .into_iter()
            .map(|(k, s)| (k, s.show()))
            .collect()
    }

    /// The effective configuration as a config file, in canonical key order.
    pub fn to_text(&self) -> String {
        self.clone()
            .slots()
            .into_iter()
            .map(|(k, s)| format!("{k} = {}\n", s.show()))
            .collect()
    }

    /// SHA-256 of [`Config::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c);
        assert_eq!(Config::parse("").unwrap().hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn every_documented_default_is_a_key() {
        let keys = Config::keys();
        for k in [
            "ecg.band.lo",
            "ecg.band.hi",
            "ecg.band.order",
            "ecg.window_s",
            "bcg.window_s",
            "bcg.gain",
            "bcg.detect_band.hi",
            "ecg.detect.refractory_s",
            "bcg.detect.refractory_s",
            "ecg.detect.searchback_factor",
            "ecg.detect.level_update",
            "bcg.detect.refine_s",
            "ecg.detect.warmup_s",
            "nn.min_ms",
            "nn.max_ms",
            "nn.max_deviation",
            "nn.window",
            "hrv.resample_hz",
            "hrv.welch_segment_s",
            "hrv.welch_overlap",
            "hrv.vlf.lo",
            "hrv.hf.hi",
            "synth.snr_db",
            "synth.bcg_latency_ms",
        ] {
            assert!(keys.iter().any(|x| x == k), "{k}");
        }
        let unique: HashSet<_> = keys.iter().collect();
        assert_eq!(unique.len(), keys.len());
    }

    #[test]
    fn overrides_apply_and_change_the_hash() {
        let c = Config::parse(
            "# tuned\necg.band.hi = 25\n nn.enabled=true \nsynth.snr_db = 12.5 # noisy\nhrv.lf.hi=0.14\n",
        )
        .unwrap();
        assert_eq!(c.preprocess.ecg_band.hi, 25.0);
        assert_eq!(c.hrv_config().nn, Some(NnConfig::default()));
        assert_eq!(c.synth.noise_snr_db, Some(12.5));
        assert_eq!(c.hrv.bands.lf.1, 0.14);
        assert_ne!(c.hash(), Config::default().hash());
        assert_eq!(c.effective()["synth.snr_db"], "12.5");
        assert_eq!(Config::default().effective()["synth.snr_db"], "inf");
        let back = Config::parse("synth.snr_db = inf").unwrap();
        assert_eq!(back.synth.noise_snr_db, None);
    }

    #[test]
    fn bad_files_are_config_errors() {
        for text in [
            "nonsense",
            "ecg.band.lo = fast",
            "no.such.key = 1",
            "ecg.window_s = 0.1\necg.window_s = 0.2",
            "nn.min_ms = 3000",
            "hrv.welch_overlap = 1.5",
            "ecg.detect.refractory_s = -1",
            "ecg.band.order = 2.5",
        ] {
            let e = Config::parse(text).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{text}: {e}");
            assert_eq!(e.exit_code(), 1);
        }
    }

    #[test]
    fn band_edges_are_checked_against_the_rate() {
        let c = Config::parse("ecg.band.hi = 130").unwrap();
        assert!(matches!(
            c.validate_for(Modality::Ecg, 250.0),
            Err(Error::Config(_))
        ));
        assert!(c.validate_for(Modality::Ecg, 500.0).is_ok());
        assert!(c.validate_for(Modality::Bcg, 250.0).is_ok());
    }
}
