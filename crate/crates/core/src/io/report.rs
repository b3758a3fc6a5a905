//! JSON report documents. Every number carries its unit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compare::{
    unit_of, Agreement, ComparisonReport, IndexDiffs, IndexMap, ModalityIndices, SubjectResult,
};
use crate::error::{Error, Result};
use crate::hrv::{FreqDomainIndices, TimeDomainIndices};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Quantity {
            value,
            unit: unit.to_owned(),
        }
    }
}

pub type QuantityMap = BTreeMap<String, Quantity>;

fn with_units(m: &IndexMap) -> QuantityMap {
    m.iter()
        .map(|(k, &v)| (k.clone(), Quantity::new(v, unit_of(k).unwrap_or("1"))))
        .collect()
}

fn with_unit(m: &IndexMap, unit: &str) -> QuantityMap {
    m.iter()
        .map(|(k, &v)| (k.clone(), Quantity::new(v, unit)))
        .collect()
}

/// Values of `m`, checking each unit against the index table.
fn strip_units(m: &QuantityMap) -> Result<IndexMap> {
    m.iter()
        .map(|(k, q)| match unit_of(k) {
            Some(u) if u == q.unit => Ok((k.clone(), q.value)),
            Some(u) => Err(Error::Schema(format!(
                "`{k}` in {} but expected {u}",
                q.unit
            ))),
            None => Err(Error::Schema(format!("unknown index `{k}`"))),
        })
        .collect()
}

/// Indices and diagnostics for one modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityReport {
    pub beat_count: usize,
    pub interval_count: usize,
    pub time_domain: QuantityMap,
    pub frequency_domain: Option<QuantityMap>,
    pub warnings: Vec<String>,
}

impl ModalityReport {
    pub fn new(
        beat_count: usize,
        interval_count: usize,
        idx: &ModalityIndices,
        warnings: Vec<String>,
    ) -> Self {
        let all = idx.to_map();
        let (time, freq): (IndexMap, IndexMap) = all
            .into_iter()
            .partition(|(k, _)| crate::compare::TIME_INDICES.contains(&k.as_str()));
        ModalityReport {
            beat_count,
            interval_count,
            time_domain: with_units(&time),
            frequency_domain: idx.freq.map(|_| with_units(&freq)),
            warnings,
        }
    }

    pub fn indices(&self) -> Result<ModalityIndices> {
        let t = strip_units(&self.time_domain)?;
        let get = |m: &IndexMap, k: &str| {
            m.get(k)
                .copied()
                .ok_or_else(|| Error::Schema(format!("missing index `{k}`")))
        };
        let time = TimeDomainIndices {
            mean_hr: get(&t, "mean_hr")?,
            sdnn: get(&t, "sdnn")?,
            rmssd: get(&t, "rmssd")?,
            pnn50: get(&t, "pnn50")?,
        };
        let freq = match &self.frequency_domain {
            None => None,
            Some(q) => {
                let f = strip_units(q)?;
                Some(FreqDomainIndices {
                    vlf_power: get(&f, "vlf_power")?,
                    lf_power: get(&f, "lf_power")?,
                    hf_power: get(&f, "hf_power")?,
                    total_power: get(&f, "total_power")?,
                    lf_hf_ratio: f.get("lf_hf_ratio").copied(),
                })
            }
        };
        Ok(ModalityIndices { time, freq })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffBlock {
    /// ecg − bcg
    pub signed_diff: QuantityMap,
    pub abs_diff: QuantityMap,
    /// Fraction of the ECG value; absent where that value is 0.
    pub rel_diff: QuantityMap,
}

impl From<&IndexDiffs> for DiffBlock {
    fn from(d: &IndexDiffs) -> Self {
        DiffBlock {
            signed_diff: with_units(&d.signed_diff),
            abs_diff: with_units(&d.abs_diff),
            rel_diff: with_unit(&d.rel_diff, "ratio"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<String>,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub tool_version: String,
    /// RFC 3339 UTC. The only field allowed to differ between identical runs.
    pub generated_at: String,
}

impl Provenance {
    pub fn new(inputs: Vec<String>, cfg: &super::Config) -> Self {
        Provenance {
            inputs,
            config_hash: cfg.hash(),
            config: cfg.effective(),
            tool_version: TOOL_VERSION.to_owned(),
            generated_at: timestamp(),
        }
    }
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    use time::format_description::well_known::Rfc3339;
    use time::OffsetDateTime;
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| OffsetDateTime::from_unix_timestamp(s).ok())
        .unwrap_or_else(OffsetDateTime::now_utc);
    now.format(&Rfc3339).unwrap_or_default()
}

/// Output of `hrv` (one modality) and `pipeline` (both plus comparison).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub subject_id: String,
    pub ecg: Option<ModalityReport>,
    pub bcg: Option<ModalityReport>,
    pub comparison: Option<DiffBlock>,
    pub provenance: Provenance,
}

impl ReportDocument {
    /// The single modality block of a one-sided report, or the named side.
    pub fn side(&self, prefer_ecg: bool) -> Option<&ModalityReport> {
        match (&self.ecg, &self.bcg) {
            (Some(e), None) => Some(e),
            (None, Some(b)) => Some(b),
            (e, b) => {
                if prefer_ecg {
                    e.as_ref()
                } else {
                    b.as_ref()
                }
            }
        }
    }

    pub fn subject_result(&self) -> Result<SubjectResult> {
        let (Some(e), Some(b)) = (&self.ecg, &self.bcg) else {
            return Err(Error::Schema(format!(
                "report for `{}` lacks an ECG or BCG block",
                self.subject_id
            )));
        };
        Ok(SubjectResult {
            subject_id: self.subject_id.clone(),
            ecg: e.indices()?,
            bcg: b.indices()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectDiffs {
    pub subject_id: String,
    pub diffs: DiffBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementBlock {
    pub bias: Quantity,
    pub lower: Quantity,
    pub upper: Quantity,
}

/// Output of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDocument {
    pub schema_version: String,
    pub subjects: Vec<SubjectDiffs>,
    pub cohort_pearson_r: Option<QuantityMap>,
    pub bland_altman: Option<BTreeMap<String, AgreementBlock>>,
    pub provenance: Provenance,
}

impl ComparisonDocument {
    pub fn new(rep: &ComparisonReport, provenance: Provenance) -> Self {
        let agreement = |k: &str, a: &Agreement| {
            let u = unit_of(k).unwrap_or("1");
            AgreementBlock {
                bias: Quantity::new(a.bias, u),
                lower: Quantity::new(a.lower, u),
                upper: Quantity::new(a.upper, u),
            }
        };
        ComparisonDocument {
            schema_version: SCHEMA_VERSION.to_owned(),
            subjects: rep
                .subjects
                .iter()
                .map(|s| SubjectDiffs {
                    subject_id: s.subject_id.clone(),
                    diffs: (&s.diffs).into(),
                })
                .collect(),
            cohort_pearson_r: rep.cohort_pearson_r.as_ref().map(|m| with_unit(m, "r")),
            bland_altman: rep.bland_altman.as_ref().map(|m| {
                m.iter()
                    .map(|(k, a)| (k.clone(), agreement(k, a)))
                    .collect()
            }),
            provenance,
        }
    }
}

/// Rejects NaN and infinities anywhere in a serialized document.
fn check_finite(v: &serde_json::Value, at: &str) -> Result<()> {
    match v {
        serde_json::Value::Null => Err(Error::Schema(format!(
            "non-finite or missing number at {at}"
        ))),
        serde_json::Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| check_finite(x, &format!("{at}[{i}]"))),
        serde_json::Value::Object(o) => o.iter().try_for_each(|(k, x)| match (k.as_str(), x) {
            // Optional blocks.
            (
                "ecg" | "bcg" | "comparison" | "frequency_domain" | "cohort_pearson_r"
                | "bland_altman",
                serde_json::Value::Null,
            ) => Ok(()),
            _ => check_finite(x, &format!("{at}.{k}")),
        }),
        _ => Ok(()),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let v = serde_json::to_value(doc)?;
    check_finite(&v, "$")?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let s = to_json(doc)?;
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<ReportDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ReportDocument = serde_json::from_str(&text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "{}: schema version {} (expected {SCHEMA_VERSION})",
            path.display(),
            doc.schema_version
        )));
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Config;

    fn indices(scale: f64) -> ModalityIndices {
        ModalityIndices {
            time: TimeDomainIndices {
                mean_hr: 74.924 * scale,
                sdnn: 133.851 * scale,
                rmssd: 39.197 * scale,
                pnn50: 9.737 * scale,
            },
            freq: Some(FreqDomainIndices {
                vlf_power: 0.1 + scale,
                lf_power: 1234.5678901234567 * scale,
                hf_power: 1.0 / 3.0,
                total_power: 2000.0,
                lf_hf_ratio: Some(1234.5678901234567 * scale * 3.0),
            }),
        }
    }

    fn doc() -> ReportDocument {
        let e = indices(1.0);
        let b = indices(0.99);
        let diffs = crate::compare::compare_indices(&e.to_map(), &b.to_map()).unwrap();
        ReportDocument {
            schema_version: SCHEMA_VERSION.into(),
            subject_id: "s01".into(),
            ecg: Some(ModalityReport::new(300, 299, &e, vec![])),
            bcg: Some(ModalityReport::new(300, 299, &b, vec!["note".into()])),
            comparison: Some((&diffs).into()),
            provenance: Provenance::new(
                vec!["ecg.csv".into(), "bcg.csv".into()],
                &Config::default(),
            ),
        }
    }

    #[test]
    fn units_are_embedded() {
        let d = doc();
        let e = d.ecg.as_ref().unwrap();
        assert_eq!(e.time_domain["sdnn"].unit, "ms");
        assert_eq!(e.time_domain["mean_hr"].unit, "bpm");
        assert_eq!(e.time_domain["pnn50"].unit, "percent");
        assert_eq!(
            e.frequency_domain.as_ref().unwrap()["lf_power"].unit,
            "ms^2"
        );
        assert_eq!(
            d.comparison.as_ref().unwrap().rel_diff["sdnn"].unit,
            "ratio"
        );
        assert_eq!(e.time_domain.len(), 4);
        assert_eq!(e.frequency_domain.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn json_round_trip_is_value_exact() {
        let d = doc();
        let text = to_json(&d).unwrap();
        assert!(text.contains("\"schema_version\": \"1\""));
        let back: ReportDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.subject_result().unwrap().ecg, indices(1.0));
    }

    #[test]
    fn non_finite_numbers_are_refused() {
        let mut d = doc();
        d.ecg
            .as_mut()
            .unwrap()
            .time_domain
            .get_mut("sdnn")
            .unwrap()
            .value = f64::NAN;
        assert!(matches!(to_json(&d), Err(Error::Schema(_))));
    }

    #[test]
    fn wrong_units_are_schema_errors() {
        let mut d = doc();
        d.bcg
            .as_mut()
            .unwrap()
            .time_domain
            .get_mut("sdnn")
            .unwrap()
            .unit = "s".into();
        assert!(matches!(d.subject_result(), Err(Error::Schema(_))));
        let mut d = doc();
        d.bcg = None;
        assert!(matches!(d.subject_result(), Err(Error::Schema(_))));
        assert!(d.side(false).is_some());
    }

    #[test]
    fn provenance_records_effective_config() {
        let p = doc().provenance;
        assert_eq!(p.config_hash, Config::default().hash());
        assert_eq!(p.config["ecg.window_s"], "0.15");
        assert_eq!(p.tool_version, TOOL_VERSION);
        assert!(!p.generated_at.is_empty());
    }
}
