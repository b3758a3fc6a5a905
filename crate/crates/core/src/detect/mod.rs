//! Beat detection on preprocessed ECG and BCG, and conversion of beat times
//! into interval series.

mod beats;
mod detector;

pub use beats::{beats_to_intervals, mean_heart_rate, BeatKind, BeatSeries};
pub use detector::{detect_beats, detect_j_peaks, detect_qrs, DetectorConfig};
