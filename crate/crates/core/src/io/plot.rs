//! CSV series for plotting each pipeline stage.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::pipeline::{ModalityRun, PipelineRun};
use super::recording::write_beats_to;
use crate::error::{Error, Result};

pub const PLOT_FILES: [&str; 5] = ["preprocess", "beats", "heart_rate", "intervals", "psd"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_modality(run: &ModalityRun, dir: &Path) -> Result<Vec<PathBuf>> {
    let m = run.modality.as_str();
    let path = |name: &str| dir.join(format!("{m}_{name}.csv"));
    let mut written = Vec::new();

    let p = path("preprocess");
    let io = |e| Error::io(&p, e);
    let mut w = create(&p)?;
    let (raw, filt, env) = (
        run.input.samples(),
        run.preprocessed.filtered().samples(),
        run.preprocessed.integrated().samples(),
    );
    (|| {
        writeln!(w, "t_seconds,raw,filtered,integrated")?;
        for k in 0..raw.len() {
            writeln!(
                w,
                "{},{},{},{}",
                run.input.time_at(k),
                raw[k],
                filt[k],
                env[k]
            )?;
        }
        w.flush()
    })()
    .map_err(io)?;
    written.push(p.clone());

    let p = path("beats");
    write_beats_to(create(&p)?, &run.beats).map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let iv = &run.analysis.intervals;
    let p = path("heart_rate");
    let mut w = create(&p)?;
    (|| {
        writeln!(w, "t_seconds,heart_rate_bpm")?;
        for (t, ms) in iv.anchors().iter().zip(iv.intervals()) {
            writeln!(w, "{t},{}", 60_000.0 / ms)?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let p = path("intervals");
    let mut w = create(&p)?;
    (|| {
        writeln!(w, "t_seconds,interval_ms")?;
        for (t, ms) in iv.anchors().iter().zip(iv.intervals()) {
            writeln!(w, "{t},{ms}")?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let p = path("psd");
    let mut w = create(&p)?;
    (|| {
        writeln!(w, "frequency_hz,psd_ms2_per_hz")?;
        if let Some(f) = &run.analysis.frequency {
            for (hz, v) in f.spectrum.freqs.iter().zip(&f.spectrum.psd) {
                writeln!(w, "{hz},{v}")?;
            }
        }
        w.flush()
    })()
    .map_err(|e| Error::io(&p, e))?;
    written.push(p);
    Ok(written)
}

/// Writes five CSV files per modality into `dir` (created if missing) and
/// returns their paths.
pub fn emit_plot_data(run: &PipelineRun, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = write_modality(&run.ecg, dir)?;
    out.extend(write_modality(&run.bcg, dir)?);
    Ok(out)
}
