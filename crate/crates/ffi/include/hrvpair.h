/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef HRVPAIR_H
#define HRVPAIR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HP_MODALITY_ECG 0

#define HP_MODALITY_BCG 1

typedef enum {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_POINTER = 1,
  /**
   * Out-of-range parameter, bad modality or invalid configuration.
   */
  HP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Too few samples, beats, intervals or subjects.
   */
  HP_STATUS_INSUFFICIENT_DATA = 3,
  /**
   * Malformed text input.
   */
  HP_STATUS_FORMAT = 4,
  /**
   * Internal panic caught at the boundary.
   */
  HP_STATUS_PANIC = 5,
} HpStatus;

/**
 * Detected or supplied beat times.
 */
typedef struct HpBeats HpBeats;

/**
 * Band-passed signal and integrated envelope.
 */
typedef struct HpPreprocessed HpPreprocessed;

/**
 * Uniformly sampled recording.
 */
typedef struct HpSignal HpSignal;

typedef struct {
  /**
   * bpm
   */
  double mean_hr;
  /**
   * ms
   */
  double sdnn;
  /**
   * ms
   */
  double rmssd;
  /**
   * percent
   */
  double pnn50;
} HpTimeDomain;

/**
 * Band powers in ms^2. `lf_hf_ratio` is NaN when HF power is zero.
 */
typedef struct {
  double vlf_power;
  double lf_power;
  double hf_power;
  double total_power;
  double lf_hf_ratio;
} HpFreqDomain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hp_version(void);

/**
 * Message for the last failed call on this thread, or NULL if the last
 * call succeeded. Valid until the next `hp_*` call on the same thread.
 */
const char *hp_last_error(void);

/**
 * Copies `len` samples taken at `fs` Hz, the first at `t0` seconds.
 *
 * # Safety
 * `samples` must point to `len` readable doubles; `out` must be writable.
 */
HpStatus hp_signal_new(const double *samples, size_t len, double fs, double t0, HpSignal **out);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `signal` must be NULL or a live handle.
 */
size_t hp_signal_len(const HpSignal *signal);

/**
 * # Safety
 * `signal` must be NULL or a handle not yet freed.
 */
void hp_signal_free(HpSignal *signal);

/**
 * Band-pass, derivative, squaring and integration with default settings
 * for `modality` (`HP_MODALITY_ECG` or `HP_MODALITY_BCG`).
 *
 * # Safety
 * `signal` must be a live handle; `out` must be writable.
 */
HpStatus hp_preprocess(const HpSignal *signal, uint32_t modality_code, HpPreprocessed **out);

/**
 * Band-passed samples. The pointer is owned by the handle; `len` receives
 * the count. NULL for a NULL handle.
 *
 * # Safety
 * `p` must be NULL or a live handle; `len` must be NULL or writable.
 */
const double *hp_preprocessed_filtered(const HpPreprocessed *p, size_t *len);

/**
 * Integrated envelope, borrowed as for [`hp_preprocessed_filtered`].
 *
 * # Safety
 * `p` must be NULL or a live handle; `len` must be NULL or writable.
 */
const double *hp_preprocessed_envelope(const HpPreprocessed *p, size_t *len);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void hp_preprocessed_free(HpPreprocessed *p);

/**
 * R peaks (ECG) or J peaks (BCG) with the default detector settings.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
HpStatus hp_detect_beats(const HpPreprocessed *p, HpBeats **out);

/**
 * Beat series from strictly increasing times in seconds.
 *
 * # Safety
 * `times` must point to `len` readable doubles; `out` must be writable.
 */
HpStatus hp_beats_new(const double *times, size_t len, uint32_t modality_code, HpBeats **out);

/**
 * Number of beats, or 0 for NULL.
 *
 * # Safety
 * `beats` must be NULL or a live handle.
 */
size_t hp_beats_len(const HpBeats *beats);

/**
 * Beat times in seconds, borrowed from the handle.
 *
 * # Safety
 * `beats` must be NULL or a live handle; `len` must be NULL or writable.
 */
const double *hp_beats_times(const HpBeats *beats, size_t *len);

/**
 * Filtered-signal amplitude at each beat, borrowed from the handle.
 *
 * # Safety
 * `beats` must be NULL or a live handle; `len` must be NULL or writable.
 */
const double *hp_beats_amplitudes(const HpBeats *beats, size_t *len);

/**
 * # Safety
 * `beats` must be NULL or a handle not yet freed.
 */
void hp_beats_free(HpBeats *beats);

/**
 * HRV indices of the beat series under the default configuration.
 * `freq` and `has_freq` may be NULL. When the series is too short for
 * spectral analysis `*has_freq` is false and `*freq` is left untouched.
 *
 * # Safety
 * `beats` must be a live handle; `time` must be writable; `freq` and
 * `has_freq` must each be NULL or writable.
 */
HpStatus hp_beats_hrv(const HpBeats *beats, HpTimeDomain *time, HpFreqDomain *freq, bool *has_freq);

/**
 * Runs the full ECG/BCG pipeline and writes the report as a JSON string
 * to `*out_json`, to be released with [`hp_string_free`]. Both recordings
 * start at t = 0. `config` is key=value text overriding defaults, or NULL.
 *
 * # Safety
 * `ecg` and `bcg` must point to `ecg_len` and `bcg_len` readable doubles;
 * `subject_id` must be a NUL-terminated string; `config` must be NULL or
 * NUL-terminated; `out_json` must be writable.
 */
HpStatus hp_pipeline_json(const double *ecg,
                          size_t ecg_len,
                          const double *bcg,
                          size_t bcg_len,
                          double fs,
                          const char *subject_id,
                          const char *config,
                          char **out_json);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string from [`hp_pipeline_json`] not yet freed.
 */
void hp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HRVPAIR_H */
