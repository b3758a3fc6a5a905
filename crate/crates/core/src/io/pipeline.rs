use std::path::Path;

use super::recording::{read_signal, InputFormat};
use super::report::{ModalityReport, Provenance, ReportDocument, SCHEMA_VERSION};
use super::Config;
use crate::compare::{compare_indices, IndexDiffs, ModalityIndices};
use crate::detect::{beats_to_intervals, detect_beats, BeatSeries};
use crate::error::{Error, Result};
use crate::hrv::{analyze, HrvAnalysis, IntervalSeries};
use crate::signal::{preprocess, Modality, PreprocessedSignal, Signal};

/// Every stage output for one recording.
#[derive(Debug, Clone)]
pub struct ModalityRun {
    pub modality: Modality,
    pub input: Signal,
    pub preprocessed: PreprocessedSignal,
    pub beats: BeatSeries,
    /// Intervals before NN screening.
    pub raw_intervals: IntervalSeries,
    pub analysis: HrvAnalysis,
}

impl ModalityRun {
    pub fn indices(&self) -> ModalityIndices {
        ModalityIndices {
            time: self.analysis.time,
            freq: self.analysis.frequency.as_ref().map(|f| f.indices),
        }
    }

    pub fn report(&self) -> ModalityReport {
        ModalityReport::new(
            self.beats.len(),
            self.analysis.intervals.len(),
            &self.indices(),
            self.analysis.warnings.clone(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub subject_id: String,
    pub ecg: ModalityRun,
    pub bcg: ModalityRun,
    pub comparison: IndexDiffs,
}

/// Preprocess, detect and analyze one recording. Errors carry the stage
/// name and subject id.
pub fn analyze_recording(
    x: &Signal,
    m: Modality,
    cfg: &Config,
    subject: &str,
) -> Result<ModalityRun> {
    cfg.validate_for(m, x.fs())?;
    let stage = |name: &'static str| move |e: Error| e.in_stage(name, subject);
    let preprocessed = preprocess(x, m, &cfg.preprocess).map_err(stage("preprocess"))?;
    let beats = detect_beats(&preprocessed, cfg.detector(m)).map_err(stage("detect"))?;
    let raw_intervals = beats_to_intervals(&beats).map_err(stage("intervals"))?;
    let analysis = analyze(&raw_intervals, &cfg.hrv_config()).map_err(stage("hrv"))?;
    Ok(ModalityRun {
        modality: m,
        input: x.clone(),
        preprocessed,
        beats,
        raw_intervals,
        analysis,
    })
}

/// Both modalities of one subject plus their per-index differences.
pub fn run_pair(subject: &str, ecg: &Signal, bcg: &Signal, cfg: &Config) -> Result<PipelineRun> {
    cfg.validate_for(Modality::Ecg, ecg.fs())?;
    cfg.validate_for(Modality::Bcg, bcg.fs())?;
    let ecg = analyze_recording(ecg, Modality::Ecg, cfg, subject)?;
    let bcg = analyze_recording(bcg, Modality::Bcg, cfg, subject)?;
    let comparison = compare_indices(&ecg.indices().to_map(), &bcg.indices().to_map())
        .map_err(|e| e.in_stage("compare", subject))?;
    Ok(PipelineRun {
        subject_id: subject.to_owned(),
        ecg,
        bcg,
        comparison,
    })
}

impl PipelineRun {
    pub fn report(&self, inputs: Vec<String>, cfg: &Config) -> ReportDocument {
        ReportDocument {
            schema_version: SCHEMA_VERSION.to_owned(),
            subject_id: self.subject_id.clone(),
            ecg: Some(self.ecg.report()),
            bcg: Some(self.bcg.report()),
            comparison: Some((&self.comparison).into()),
            provenance: Provenance::new(inputs, cfg),
        }
    }
}

/// How a recording file is laid out.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    pub format: Option<InputFormat>,
    pub fs: Option<f64>,
}

/// Reads both recordings and runs the full pipeline.
pub fn run_pipeline(
    ecg_path: &Path,
    bcg_path: &Path,
    subject: &str,
    cfg: &Config,
    opts: ReadOptions,
) -> Result<(PipelineRun, ReportDocument)> {
    let read =
        |p: &Path| read_signal(p, opts.format, opts.fs).map_err(|e| e.in_stage("read", subject));
    let ecg = read(ecg_path)?;
    let bcg = read(bcg_path)?;
    let run = run_pair(subject, &ecg, &bcg, cfg)?;
    let doc = run.report(
        vec![
            ecg_path.display().to_string(),
            bcg_path.display().to_string(),
        ],
        cfg,
    );
    Ok((run, doc))
}
