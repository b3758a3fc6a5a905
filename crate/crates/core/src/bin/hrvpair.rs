//! Command-line front end: synthesize, detect, analyze and compare paired
//! ECG/BCG recordings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hrvpair::compare::ComparisonReport;
use hrvpair::detect::{beats_to_intervals, detect_beats, BeatKind};
use hrvpair::error::{Error, Result};
use hrvpair::hrv::analyze;
use hrvpair::io::{
    analyze_recording, emit_plot_data, read_beats, read_report, read_signal, run_pipeline,
    sniff_format, to_json, write_beats, write_beats_to, write_signal, ComparisonDocument, Config,
    InputFormat, ModalityReport, Provenance, ReadOptions, ReportDocument, SCHEMA_VERSION,
};
use hrvpair::signal::{preprocess, Modality};
use hrvpair::synth::synthesize_pair;

#[derive(Parser, Debug)]
#[command(
    name = "hrvpair",
    version,
    about = "ECG/BCG beat detection, HRV indices and agreement analysis"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Sampling rate in Hz (sampled CSV input, or synth output rate)
    #[arg(long, global = true)]
    fs: Option<f64>,
    /// Signal modality: ecg or bcg
    #[arg(long, global = true)]
    modality: Option<Modality>,
    /// Input/output CSV layout: timed, sampled or beats
    #[arg(long, global = true)]
    format: Option<InputFormat>,
    /// Output file, or directory for synth and pipeline
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file overriding defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic data
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a paired ECG/BCG recording with ground-truth beats
    Synth {
        /// Length in seconds
        #[arg(long)]
        duration: Option<f64>,
        /// Mean beat interval in ms
        #[arg(long = "mean-rr")]
        mean_rr: Option<f64>,
        /// Signal-to-noise ratio in dB (inf for clean)
        #[arg(long)]
        snr: Option<f64>,
    },
    /// Detect beats in a recording and write them as CSV
    Detect { input: PathBuf },
    /// HRV indices of a recording or a beats file
    Hrv { input: PathBuf },
    /// Compare an ECG report with a BCG report, or a directory of pipeline reports
    Compare {
        /// Report supplying the ECG indices, then the one supplying BCG
        #[arg(num_args = 0..=2)]
        reports: Vec<PathBuf>,
        /// Directory of pipeline reports, one per subject
        #[arg(long, conflicts_with = "reports")]
        cohort: Option<PathBuf>,
    },
    /// Full pipeline on an ECG/BCG pair: report JSON plus plot data
    Pipeline {
        ecg: PathBuf,
        bcg: PathBuf,
        /// Subject id (defaults to the ECG file stem)
        #[arg(long)]
        subject: Option<String>,
    },
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn load_config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = g.seed {
        cfg.synth.train.seed = s;
    }
    Ok(cfg)
}

fn read_opts(g: &Global) -> ReadOptions {
    ReadOptions {
        format: g.format,
        fs: g.fs,
    }
}

/// Writes `text` to `--out` or stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn synth(g: &Global, duration: Option<f64>, mean_rr: Option<f64>, snr: Option<f64>) -> Result<()> {
    let mut cfg = load_config(g)?;
    let p = &mut cfg.synth;
    if let Some(v) = duration {
        p.train.duration_s = v;
    }
    if let Some(v) = mean_rr {
        p.train.mean_rr_ms = v;
    }
    if let Some(v) = snr {
        p.noise_snr_db = v.is_finite().then_some(v);
    }
    if let Some(v) = g.fs {
        p.fs = v;
    }
    cfg.validate()?;
    let format = match g.format {
        None | Some(InputFormat::Timed) => InputFormat::Timed,
        Some(InputFormat::Sampled) => InputFormat::Sampled,
        Some(InputFormat::Beats) => {
            return Err(usage("synth writes recordings as timed or sampled CSV"))
        }
    };
    let pair = synthesize_pair(&cfg.synth)?;
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_signal(&dir.join("ecg.csv"), &pair.ecg, format)?;
    write_signal(&dir.join("bcg.csv"), &pair.bcg, format)?;
    write_beats(&dir.join("r_peaks.csv"), &pair.r_peaks)?;
    write_beats(&dir.join("j_peaks.csv"), &pair.j_peaks)?;
    fs::write(dir.join("synth.cfg"), cfg.to_text())
        .map_err(|e| Error::io(dir.join("synth.cfg"), e))?;
    Ok(())
}

fn detect(g: &Global, input: &Path) -> Result<()> {
    let cfg = load_config(g)?;
    let m = g
        .modality
        .ok_or_else(|| usage("detect needs --modality ecg|bcg"))?;
    let x = read_signal(input, g.format, g.fs)?;
    cfg.validate_for(m, x.fs())?;
    let p = preprocess(&x, m, &cfg.preprocess)?;
    let beats = detect_beats(&p, cfg.detector(m))?;
    let mut buf = Vec::new();
    write_beats_to(&mut buf, &beats).map_err(|e| Error::io("<buffer>", e))?;
    emit(g.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn hrv(g: &Global, input: &Path) -> Result<()> {
    let cfg = load_config(g)?;
    let m = g.modality.unwrap_or(Modality::Ecg);
    let format = match g.format {
        Some(f) => f,
        None => sniff_format(input)?,
    };
    let subject = input
        .file_stem()
        .map_or("subject".into(), |s| s.to_string_lossy().into_owned());
    let block = if format == InputFormat::Beats {
        let beats = read_beats(input, BeatKind::from(m))?;
        let iv = beats_to_intervals(&beats)?;
        let a = analyze(&iv, &cfg.hrv_config())?;
        let idx = hrvpair::compare::ModalityIndices {
            time: a.time,
            freq: a.frequency.as_ref().map(|f| f.indices),
        };
        ModalityReport::new(beats.len(), a.intervals.len(), &idx, a.warnings)
    } else {
        let x = read_signal(input, Some(format), g.fs)?;
        analyze_recording(&x, m, &cfg, &subject)?.report()
    };
    let (ecg, bcg) = match m {
        Modality::Ecg => (Some(block), None),
        Modality::Bcg => (None, Some(block)),
    };
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        subject_id: subject,
        ecg,
        bcg,
        comparison: None,
        provenance: Provenance::new(vec![input.display().to_string()], &cfg),
    };
    emit(g.out.as_deref(), &to_json(&doc)?)
}

fn compare(g: &Global, reports: &[PathBuf], cohort: Option<&Path>) -> Result<()> {
    let cfg = load_config(g)?;
    let (report, inputs) = match (cohort, reports) {
        (Some(dir), _) => {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let results = files
                .par_iter()
                .map(|p| {
                    read_report(p)
                        .and_then(|d| d.subject_result())
                        .map_err(|e| e.in_stage("compare", &p.display().to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            (ComparisonReport::cohort(&results)?, files)
        }
        (None, [a, b]) => {
            let (da, db) = (read_report(a)?, read_report(b)?);
            let side = |d: &ReportDocument, ecg: bool| {
                d.side(ecg)
                    .ok_or_else(|| {
                        Error::Schema(format!("report `{}` has no indices", d.subject_id))
                    })
                    .and_then(ModalityReport::indices)
            };
            let subject_id = if da.subject_id == db.subject_id {
                da.subject_id.clone()
            } else {
                format!("{}|{}", da.subject_id, db.subject_id)
            };
            let r = hrvpair::compare::SubjectResult {
                subject_id,
                ecg: side(&da, true)?,
                bcg: side(&db, false)?,
            };
            (ComparisonReport::single(&r)?, vec![a.clone(), b.clone()])
        }
        _ => return Err(usage("compare needs two report files or --cohort DIR")),
    };
    let inputs = inputs.iter().map(|p| p.display().to_string()).collect();
    let doc = ComparisonDocument::new(&report, Provenance::new(inputs, &cfg));
    emit(g.out.as_deref(), &to_json(&doc)?)
}

fn pipeline(g: &Global, ecg: &Path, bcg: &Path, subject: Option<&str>) -> Result<()> {
    let cfg = load_config(g)?;
    let stem = ecg
        .file_stem()
        .map_or("subject".into(), |s| s.to_string_lossy().into_owned());
    let subject = subject.unwrap_or(&stem);
    let (run, doc) = run_pipeline(ecg, bcg, subject, &cfg, read_opts(g))?;
    let json = to_json(&doc)?;
    match &g.out {
        Some(dir) => {
            emit_plot_data(&run, &dir.join("plots"))?;
            let p = dir.join("report.json");
            fs::write(&p, json).map_err(|e| Error::io(&p, e))
        }
        None => emit(None, &json),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth {
            duration,
            mean_rr,
            snr,
        } => synth(g, *duration, *mean_rr, *snr),
        Command::Detect { input } => detect(g, input),
        Command::Hrv { input } => hrv(g, input),
        Command::Compare { reports, cohort } => compare(g, reports, cohort.as_deref()),
        Command::Pipeline { ecg, bcg, subject } => pipeline(g, ecg, bcg, subject.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hrvpair: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
