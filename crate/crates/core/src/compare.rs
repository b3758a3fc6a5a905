//! ECG-vs-BCG agreement: per-subject index differences and cohort statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrv::{FreqDomainIndices, TimeDomainIndices};

/// Index name to value.
pub type IndexMap = BTreeMap<String, f64>;

pub const TIME_INDICES: [&str; 4] = ["mean_hr", "sdnn", "rmssd", "pnn50"];
pub const FREQ_INDICES: [&str; 5] = [
    "vlf_power",
    "lf_power",
    "hf_power",
    "total_power",
    "lf_hf_ratio",
];

/// Unit of an index value, `None` for unknown names.
pub fn unit_of(index: &str) -> Option<&'static str> {
    Some(match index {
        "mean_hr" => "bpm",
        "sdnn" | "rmssd" => "ms",
        "pnn50" => "percent",
        "vlf_power" | "lf_power" | "hf_power" | "total_power" => "ms^2",
        "lf_hf_ratio" => "ratio",
        _ => return None,
    })
}

/// Indices of one modality. The spectral block is absent for recordings too
/// short to resample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalityIndices {
    pub time: TimeDomainIndices,
    pub freq: Option<FreqDomainIndices>,
}

impl ModalityIndices {
    pub fn to_map(&self) -> IndexMap {
        let t = &self.time;
        let mut m: IndexMap = [
            ("mean_hr", t.mean_hr),
            ("sdnn", t.sdnn),
            ("rmssd", t.rmssd),
            ("pnn50", t.pnn50),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        if let Some(f) = &self.freq {
            m.insert("vlf_power".into(), f.vlf_power);
            m.insert("lf_power".into(), f.lf_power);
            m.insert("hf_power".into(), f.hf_power);
            m.insert("total_power".into(), f.total_power);
            if let Some(r) = f.lf_hf_ratio {
                m.insert("lf_hf_ratio".into(), r);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectResult {
    pub subject_id: String,
    pub ecg: ModalityIndices,
    pub bcg: ModalityIndices,
}

/// Per-index differences for one subject, ECG as reference.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IndexDiffs {
    /// ecg − bcg
    pub signed_diff: IndexMap,
    pub abs_diff: IndexMap,
    /// |ecg − bcg| / |ecg|; absent where the ECG value is 0.
    pub rel_diff: IndexMap,
}

fn check_same_keys(a: &IndexMap, b: &IndexMap, what: &str) -> Result<()> {
    if a.keys().ne(b.keys()) {
        let ka: BTreeSet<_> = a.keys().collect();
        let kb: BTreeSet<_> = b.keys().collect();
        let only: Vec<_> = ka.symmetric_difference(&kb).map(|s| s.as_str()).collect();
        return Err(Error::Schema(format!(
            "{what}: index sets differ in {}",
            only.join(", ")
        )));
    }
    Ok(())
}

pub fn compare_indices(ecg: &IndexMap, bcg: &IndexMap) -> Result<IndexDiffs> {
    check_same_keys(ecg, bcg, "ECG vs BCG")?;
    let mut d = IndexDiffs::default();
    for (k, &e) in ecg {
        let s = e - bcg[k];
        d.signed_diff.insert(k.clone(), s);
        d.abs_diff.insert(k.clone(), s.abs());
        if e != 0.0 {
            d.rel_diff.insert(k.clone(), s.abs() / e.abs());
        }
    }
    Ok(d)
}

/// Index maps of every subject, checked for a common key set.
fn cohort_maps(results: &[SubjectResult]) -> Result<Vec<(IndexMap, IndexMap)>> {
    let maps: Vec<_> = results
        .iter()
        .map(|r| (r.ecg.to_map(), r.bcg.to_map()))
        .collect();
    for (r, (e, b)) in results.iter().zip(&maps) {
        check_same_keys(e, b, &r.subject_id)?;
        check_same_keys(
            &maps[0].0,
            e,
            &format!("{} vs {}", results[0].subject_id, r.subject_id),
        )?;
    }
    Ok(maps)
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let flat = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if flat(x) || flat(y) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let r = sxy / (sxx * syy).sqrt();
    r.is_finite().then(|| r.clamp(-1.0, 1.0))
}

/// Pearson r between the ECG and BCG values of each index across subjects.
/// Indices with zero variance on either side are left out.
pub fn correlate_cohort(results: &[SubjectResult]) -> Result<BTreeMap<String, f64>> {
    if results.len() < 3 {
        return Err(Error::InsufficientCohort {
            needed: 3,
            got: results.len(),
        });
    }
    let maps = cohort_maps(results)?;
    let mut out = BTreeMap::new();
    for k in maps[0].0.keys() {
        let x: Vec<f64> = maps.iter().map(|(e, _)| e[k]).collect();
        let y: Vec<f64> = maps.iter().map(|(_, b)| b[k]).collect();
        if let Some(r) = pearson(&x, &y) {
            out.insert(k.clone(), r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Mean of ecg − bcg.
    pub bias: f64,
    pub lower: f64,
    pub upper: f64,
}

pub const LOA_Z: f64 = 1.96;

/// Bland-Altman bias and 95% limits of agreement per index.
pub fn bland_altman(results: &[SubjectResult]) -> Result<BTreeMap<String, Agreement>> {
    if results.len() < 2 {
        return Err(Error::InsufficientCohort {
            needed: 2,
            got: results.len(),
        });
    }
    let maps = cohort_maps(results)?;
    let n = maps.len() as f64;
    let mut out = BTreeMap::new();
    for k in maps[0].0.keys() {
        let d: Vec<f64> = maps.iter().map(|(e, b)| e[k] - b[k]).collect();
        let bias = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|v| (v - bias).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        out.insert(
            k.clone(),
            Agreement {
                bias,
                lower: bias - LOA_Z * sd,
                upper: bias + LOA_Z * sd,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectComparison {
    pub subject_id: String,
    pub diffs: IndexDiffs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Sorted by subject id.
    pub subjects: Vec<SubjectComparison>,
    pub cohort_pearson_r: Option<BTreeMap<String, f64>>,
    pub bland_altman: Option<BTreeMap<String, Agreement>>,
}

impl ComparisonReport {
    /// Differences for one subject, no cohort statistics.
    pub fn single(r: &SubjectResult) -> Result<Self> {
        Ok(ComparisonReport {
            subjects: vec![SubjectComparison {
                subject_id: r.subject_id.clone(),
                diffs: compare_indices(&r.ecg.to_map(), &r.bcg.to_map())?,
            }],
            cohort_pearson_r: None,
            bland_altman: None,
        })
    }

    /// Per-subject differences plus correlation and agreement across the
    /// cohort.
    pub fn cohort(results: &[SubjectResult]) -> Result<Self> {
        let mut sorted: Vec<&SubjectResult> = results.iter().collect();
        sorted.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        if let Some(w) = sorted
            .windows(2)
            .find(|w| w[0].subject_id == w[1].subject_id)
        {
            return Err(Error::Schema(format!(
                "duplicate subject id {}",
                w[0].subject_id
            )));
        }
        let subjects = sorted
            .iter()
            .map(|r| {
                Ok(SubjectComparison {
                    subject_id: r.subject_id.clone(),
                    diffs: compare_indices(&r.ecg.to_map(), &r.bcg.to_map())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let owned: Vec<SubjectResult> = sorted.into_iter().cloned().collect();
        Ok(ComparisonReport {
            subjects,
            cohort_pearson_r: Some(correlate_cohort(&owned)?),
            bland_altman: Some(bland_altman(&owned)?),
        })
    }
}
