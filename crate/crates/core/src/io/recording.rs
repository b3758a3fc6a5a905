use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::detect::{BeatKind, BeatSeries};
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Relative tolerance on timestamp spacing in timed recordings.
pub const SPACING_TOLERANCE: f64 = 1e-6;

pub const BEATS_HEADER: &str = "t_seconds,amplitude";

/// On-disk layout of a CSV input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `t,value` rows with uniform spacing.
    Timed,
    /// One `value` column; rate given separately.
    Sampled,
    /// `t_seconds,amplitude` beat list.
    Beats,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::Timed => "timed",
            InputFormat::Sampled => "sampled",
            InputFormat::Beats => "beats",
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "timed" | "csv_timed" => Ok(InputFormat::Timed),
            "sampled" | "csv_sampled" => Ok(InputFormat::Sampled),
            "beats" => Ok(InputFormat::Beats),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (timed, sampled, beats)"
            ))),
        }
    }
}

/// A numeric table read from CSV: rows with their 1-based line numbers.
struct Table {
    header: Option<Vec<String>>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn format_err(row: usize, message: impl Into<String>) -> Error {
    Error::Format {
        row,
        message: message.into(),
    }
}

fn read_table<R: Read>(r: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut header = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            format_err(row, e.to_string())
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(rec.iter().map(str::to_owned).collect());
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(format_err(
                line,
                format!("expected {w} columns, found {}", rec.len()),
            ));
        }
        let vals = rec
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(format_err(line, format!("non-finite value `{f}`"))),
                Err(_) if f.is_empty() => Err(format_err(line, "missing value")),
                Err(_) => Err(format_err(line, format!("not a number: `{f}`"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    Ok(Table { header, rows })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Guesses the layout from the header line, falling back to the column
/// count. Headerless two-column files are taken as timed recordings.
pub fn sniff_format(path: &Path) -> Result<InputFormat> {
    let mut line = String::new();
    let mut r = open(path)?;
    loop {
        line.clear();
        if r.read_line(&mut line).map_err(|e| Error::io(path, e))? == 0 {
            return Err(Error::EmptyInput);
        }
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            break;
        }
    }
    let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.eq_ignore_ascii_case(BEATS_HEADER) {
        return Ok(InputFormat::Beats);
    }
    Ok(match compact.split(',').count() {
        1 => InputFormat::Sampled,
        _ => InputFormat::Timed,
    })
}

/// Parses a recording. `fs` is required for sampled input and ignored for
/// timed input, whose rate is inferred from the timestamps.
pub fn parse_signal<R: Read>(r: R, format: Option<InputFormat>, fs: Option<f64>) -> Result<Signal> {
    let table = read_table(r)?;
    let Some((_, first)) = table.rows.first() else {
        return Err(Error::EmptyInput);
    };
    let format = format.unwrap_or(if first.len() == 1 {
        InputFormat::Sampled
    } else {
        InputFormat::Timed
    });
    let want = match format {
        InputFormat::Timed => 2,
        InputFormat::Sampled => 1,
        InputFormat::Beats => return Err(Error::Config("a beats file is not a recording".into())),
    };
    if first.len() != want {
        return Err(format_err(
            table.rows[0].0,
            format!(
                "{format} recordings have {want} column(s), found {}",
                first.len()
            ),
        ));
    }
    match format {
        InputFormat::Sampled => {
            let fs = fs.ok_or_else(|| {
                Error::Config("sampled recordings need a sampling rate (--fs)".into())
            })?;
            if !(fs.is_finite() && fs > 0.0) {
                return Err(Error::Config(format!(
                    "sampling rate must be positive, got {fs}"
                )));
            }
            Signal::new(table.rows.into_iter().map(|(_, v)| v[0]).collect(), fs)
        }
        _ => timed_signal(table.rows),
    }
}

fn timed_signal(rows: Vec<(usize, Vec<f64>)>) -> Result<Signal> {
    if rows.len() < 2 {
        return Err(format_err(
            rows[0].0,
            "a timed recording needs at least two rows to fix its rate",
        ));
    }
    let t: Vec<f64> = rows.iter().map(|(_, v)| v[0]).collect();
    let dt0 = t[1] - t[0];
    for k in 1..t.len() {
        let dt = t[k] - t[k - 1];
        if !(dt > 0.0) {
            return Err(format_err(
                rows[k].0,
                "timestamps must be strictly increasing",
            ));
        }
        if (dt - dt0).abs() > SPACING_TOLERANCE * dt0 {
            return Err(format_err(
                rows[k].0,
                format!("non-uniform spacing: {dt} s after {dt0} s"),
            ));
        }
    }
    let fs = (t.len() - 1) as f64 / (t[t.len() - 1] - t[0]);
    // Timestamps are only uniform to SPACING_TOLERANCE; drop the noise digits.
    let fs: f64 = format!("{fs:.8e}").parse().unwrap_or(fs);
    Signal::with_start(rows.into_iter().map(|(_, v)| v[1]).collect(), fs, t[0])
}

pub fn read_signal(path: &Path, format: Option<InputFormat>, fs: Option<f64>) -> Result<Signal> {
    parse_signal(open(path)?, format, fs)
}

/// Writes `t,value` (timed) or `value` (sampled) rows. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_signal_to<W: Write>(mut w: W, x: &Signal, format: InputFormat) -> std::io::Result<()> {
    match format {
        InputFormat::Sampled => {
            writeln!(w, "value")?;
            for v in x.samples() {
                writeln!(w, "{v}")?;
            }
        }
        _ => {
            writeln!(w, "t,value")?;
            for (k, v) in x.samples().iter().enumerate() {
                writeln!(w, "{},{v}", x.time_at(k))?;
            }
        }
    }
    w.flush()
}

pub fn write_signal(path: &Path, x: &Signal, format: InputFormat) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_signal_to(std::io::BufWriter::new(f), x, format).map_err(|e| Error::io(path, e))
}

pub fn parse_beats<R: Read>(r: R, kind: BeatKind) -> Result<BeatSeries> {
    let table = read_table(r)?;
    let mut times = Vec::with_capacity(table.rows.len());
    let mut amplitudes = Vec::with_capacity(table.rows.len());
    for (line, v) in &table.rows {
        if v.len() != 2 {
            return Err(format_err(
                *line,
                format!("beat rows have 2 columns, found {}", v.len()),
            ));
        }
        if times.last().is_some_and(|&t| v[0] <= t) {
            return Err(format_err(*line, "beat times must be strictly increasing"));
        }
        times.push(v[0]);
        amplitudes.push(v[1]);
    }
    if let Some(h) = &table.header {
        if h.len() != 2 {
            return Err(format_err(1, format!("expected header `{BEATS_HEADER}`")));
        }
    }
    BeatSeries::new(times, amplitudes, kind)
}

pub fn read_beats(path: &Path, kind: BeatKind) -> Result<BeatSeries> {
    parse_beats(open(path)?, kind)
}

pub fn write_beats_to<W: Write>(mut w: W, b: &BeatSeries) -> std::io::Result<()> {
    writeln!(w, "{BEATS_HEADER}")?;
    for (t, a) in b.times().iter().zip(b.amplitudes()) {
        writeln!(w, "{t},{a}")?;
    }
    w.flush()
}

pub fn write_beats(path: &Path, b: &BeatSeries) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_beats_to(std::io::BufWriter::new(f), b).map_err(|e| Error::io(path, e))
}
