//! C ABI over the hrvpair library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `hp_*_free`. Every fallible call returns an [`HpStatus`];
//! on failure [`hp_last_error`] describes what went wrong on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hrvpair::detect::{beats_to_intervals, detect_beats, BeatKind, BeatSeries};
use hrvpair::hrv::analyze;
use hrvpair::io::{run_pair, to_json, Config};
use hrvpair::signal::{preprocess, Modality, PreprocessedSignal, Signal};
use hrvpair::Error;

pub const HP_MODALITY_ECG: u32 = 0;
pub const HP_MODALITY_BCG: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullPointer = 1,
    /// Out-of-range parameter, bad modality or invalid configuration.
    InvalidArgument = 2,
    /// Too few samples, beats, intervals or subjects.
    InsufficientData = 3,
    /// Malformed text input.
    Format = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// Uniformly sampled recording.
pub struct HpSignal(Signal);

/// Band-passed signal and integrated envelope.
pub struct HpPreprocessed(PreprocessedSignal);

/// Detected or supplied beat times.
pub struct HpBeats(BeatSeries);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HpTimeDomain {
    /// bpm
    pub mean_hr: f64,
    /// ms
    pub sdnn: f64,
    /// ms
    pub rmssd: f64,
    /// percent
    pub pnn50: f64,
}

/// Band powers in ms^2. `lf_hf_ratio` is NaN when HF power is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HpFreqDomain {
    pub vlf_power: f64,
    pub lf_power: f64,
    pub hf_power: f64,
    pub total_power: f64,
    pub lf_hf_ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(HpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::Parameter(_) | Error::Config(_) => HpStatus::InvalidArgument,
            Error::InputTooShort { .. }
            | Error::InsufficientBeats { .. }
            | Error::InsufficientData { .. }
            | Error::EmptyAfterCleaning
            | Error::InsufficientCohort { .. } => HpStatus::InsufficientData,
            _ => HpStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HpStatus::NullPointer, format!("`{what}` is null"))
}

fn set_last_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("interior nul removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HpStatus {
    set_last_error(None);
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(HpStatus::Panic, format!("internal panic: {msg}")))
    });
    match outcome {
        Ok(()) => HpStatus::Ok,
        Err(Failure(status, msg)) => {
            set_last_error(Some(msg));
            status
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(null(what)),
        (false, n) => Ok(std::slice::from_raw_parts(p, n)),
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(HpStatus::Format, format!("`{what}` is not UTF-8: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn modality(code: u32) -> Result<Modality, Failure> {
    match code {
        HP_MODALITY_ECG => Ok(Modality::Ecg),
        HP_MODALITY_BCG => Ok(Modality::Bcg),
        other => Err(Failure(
            HpStatus::InvalidArgument,
            format!("unknown modality code {other}"),
        )),
    }
}

fn exported(v: &[f64], len: *mut usize) -> *const f64 {
    if !len.is_null() {
        unsafe { *len = v.len() };
    }
    v.as_ptr()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL if the last
/// call succeeded. Valid until the next `hp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` samples taken at `fs` Hz, the first at `t0` seconds.
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_signal_new(
    samples: *const f64,
    len: usize,
    fs: f64,
    t0: f64,
    out: *mut *mut HpSignal,
) -> HpStatus {
    guard(|| {
        let x = slice(samples, len, "samples")?;
        put(out, HpSignal(Signal::with_start(x.to_vec(), fs, t0)?))
    })
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `signal` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_signal_len(signal: *const HpSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `signal` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hp_signal_free(signal: *mut HpSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Band-pass, derivative, squaring and integration with default settings
/// for `modality` (`HP_MODALITY_ECG` or `HP_MODALITY_BCG`).
///
/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_preprocess(
    signal: *const HpSignal,
    modality_code: u32,
    out: *mut *mut HpPreprocessed,
) -> HpStatus {
    guard(|| {
        let s = handle(signal, "signal")?;
        let m = modality(modality_code)?;
        let cfg = Config::default();
        cfg.validate_for(m, s.0.fs())?;
        put(out, HpPreprocessed(preprocess(&s.0, m, &cfg.preprocess)?))
    })
}

/// Band-passed samples. The pointer is owned by the handle; `len` receives
/// the count. NULL for a NULL handle.
///
/// # Safety
/// `p` must be NULL or a live handle; `len` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hp_preprocessed_filtered(
    p: *const HpPreprocessed,
    len: *mut usize,
) -> *const f64 {
    match p.as_ref() {
        Some(p) => exported(p.0.filtered().samples(), len),
        None => ptr::null(),
    }
}

/// Integrated envelope, borrowed as for [`hp_preprocessed_filtered`].
///
/// # Safety
/// `p` must be NULL or a live handle; `len` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hp_preprocessed_envelope(
    p: *const HpPreprocessed,
    len: *mut usize,
) -> *const f64 {
    match p.as_ref() {
        Some(p) => exported(p.0.integrated().samples(), len),
        None => ptr::null(),
    }
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hp_preprocessed_free(p: *mut HpPreprocessed) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// R peaks (ECG) or J peaks (BCG) with the default detector settings.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_detect_beats(
    p: *const HpPreprocessed,
    out: *mut *mut HpBeats,
) -> HpStatus {
    guard(|| {
        let p = handle(p, "preprocessed")?;
        let cfg = Config::default();
        put(
            out,
            HpBeats(detect_beats(&p.0, cfg.detector(p.0.modality()))?),
        )
    })
}

/// Beat series from strictly increasing times in seconds.
///
/// # Safety
/// `times` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_new(
    times: *const f64,
    len: usize,
    modality_code: u32,
    out: *mut *mut HpBeats,
) -> HpStatus {
    guard(|| {
        let t = slice(times, len, "times")?;
        let kind = BeatKind::from(modality(modality_code)?);
        put(
            out,
            HpBeats(BeatSeries::new(t.to_vec(), vec![0.0; t.len()], kind)?),
        )
    })
}

/// Number of beats, or 0 for NULL.
///
/// # Safety
/// `beats` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_len(beats: *const HpBeats) -> usize {
    beats.as_ref().map_or(0, |b| b.0.len())
}

/// Beat times in seconds, borrowed from the handle.
///
/// # Safety
/// `beats` must be NULL or a live handle; `len` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_times(beats: *const HpBeats, len: *mut usize) -> *const f64 {
    match beats.as_ref() {
        Some(b) => exported(b.0.times(), len),
        None => ptr::null(),
    }
}

/// Filtered-signal amplitude at each beat, borrowed from the handle.
///
/// # Safety
/// `beats` must be NULL or a live handle; `len` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_amplitudes(beats: *const HpBeats, len: *mut usize) -> *const f64 {
    match beats.as_ref() {
        Some(b) => exported(b.0.amplitudes(), len),
        None => ptr::null(),
    }
}

/// # Safety
/// `beats` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_free(beats: *mut HpBeats) {
    if !beats.is_null() {
        drop(Box::from_raw(beats));
    }
}

/// HRV indices of the beat series under the default configuration.
/// `freq` and `has_freq` may be NULL. When the series is too short for
/// spectral analysis `*has_freq` is false and `*freq` is left untouched.
///
/// # Safety
/// `beats` must be a live handle; `time` must be writable; `freq` and
/// `has_freq` must each be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hp_beats_hrv(
    beats: *const HpBeats,
    time: *mut HpTimeDomain,
    freq: *mut HpFreqDomain,
    has_freq: *mut bool,
) -> HpStatus {
    guard(|| {
        let b = handle(beats, "beats")?;
        if time.is_null() {
            return Err(null("time"));
        }
        let a = analyze(&beats_to_intervals(&b.0)?, &Config::default().hrv_config())?;
        *time = HpTimeDomain {
            mean_hr: a.time.mean_hr,
            sdnn: a.time.sdnn,
            rmssd: a.time.rmssd,
            pnn50: a.time.pnn50,
        };
        let f = a.frequency.map(|f| f.indices);
        if let (Some(f), false) = (f, freq.is_null()) {
            *freq = HpFreqDomain {
                vlf_power: f.vlf_power,
                lf_power: f.lf_power,
                hf_power: f.hf_power,
                total_power: f.total_power,
                lf_hf_ratio: f.lf_hf_ratio.unwrap_or(f64::NAN),
            };
        }
        if !has_freq.is_null() {
            *has_freq = f.is_some();
        }
        Ok(())
    })
}

/// Runs the full ECG/BCG pipeline and writes the report as a JSON string
/// to `*out_json`, to be released with [`hp_string_free`]. Both recordings
/// start at t = 0. `config` is key=value text overriding defaults, or NULL.
///
/// # Safety
/// `ecg` and `bcg` must point to `ecg_len` and `bcg_len` readable doubles;
/// `subject_id` must be a NUL-terminated string; `config` must be NULL or
/// NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_json(
    ecg: *const f64,
    ecg_len: usize,
    bcg: *const f64,
    bcg_len: usize,
    fs: f64,
    subject_id: *const c_char,
    config: *const c_char,
    out_json: *mut *mut c_char,
) -> HpStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let ecg = Signal::new(slice(ecg, ecg_len, "ecg")?.to_vec(), fs)?;
        let bcg = Signal::new(slice(bcg, bcg_len, "bcg")?.to_vec(), fs)?;
        let subject = text(subject_id, "subject_id")?;
        let cfg = match config.is_null() {
            true => Config::default(),
            false => Config::parse(text(config, "config")?)?,
        };
        let run = run_pair(subject, &ecg, &bcg, &cfg)?;
        let json = to_json(&run.report(Vec::new(), &cfg))?;
        let c = CString::new(json).map_err(|e| Failure(HpStatus::Format, e.to_string()))?;
        *out_json = c.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from [`hp_pipeline_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        unsafe { CStr::from_ptr(hp_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn guard_turns_panics_into_status() {
        assert_eq!(guard(|| panic!("boom")), HpStatus::Panic);
        assert!(message().contains("boom"));
        assert_eq!(guard(|| Ok(())), HpStatus::Ok);
        assert!(hp_last_error().is_null());
    }

    #[test]
    fn error_families_map_to_status() {
        let cases = [
            (Error::Config("x".into()), HpStatus::InvalidArgument),
            (Error::EmptyAfterCleaning, HpStatus::InsufficientData),
            (
                Error::InsufficientBeats { needed: 2, got: 1 }.in_stage("detect", "s"),
                HpStatus::InsufficientData,
            ),
            (Error::EmptyInput, HpStatus::Format),
            (Error::Schema("y".into()), HpStatus::Format),
        ];
        for (e, want) in cases {
            assert_eq!(Failure::from(e).0, want);
        }
    }

    #[test]
    fn messages_with_nul_survive() {
        assert_eq!(
            guard(|| Err(Failure(HpStatus::Format, "a\0b".into()))),
            HpStatus::Format
        );
        assert_eq!(message(), "a b");
    }

    #[test]
    fn modality_codes() {
        assert_eq!(modality(HP_MODALITY_ECG).ok(), Some(Modality::Ecg));
        assert_eq!(modality(HP_MODALITY_BCG).ok(), Some(Modality::Bcg));
        assert!(modality(2).is_err());
    }
}
