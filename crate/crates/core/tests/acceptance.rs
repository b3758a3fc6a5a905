//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{cohort_results, detect, pair, score, sinusoidal_intervals};
use hrvpair::compare::{correlate_cohort, TIME_INDICES};
use hrvpair::detect::{detect_j_peaks, DetectorConfig};
use hrvpair::hrv::{frequency_domain, time_domain, HrvConfig, IntervalKind, IntervalSeries};
use hrvpair::io::{run_pair, to_json, Config};
use hrvpair::signal::{bandpass_filter, preprocess_bcg, BandSpec, Modality, Signal};
use rand::{RngExt, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// 1. Time-domain indices against a single-pass formula on random series.
fn time_domain_oracle() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let series: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            let n = rng.random_range(2..=500);
            (0..n).map(|_| rng.random_range(300.0..1200.0)).collect()
        })
        .collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for v in &series {
        let got =
            time_domain(&IntervalSeries::from_intervals(v.clone(), 0.0, IntervalKind::Rr).unwrap())
                .unwrap();
        let n = v.len() as f64;
        let (mut s, mut s2, mut d2, mut over) = (0.0, 0.0, 0.0, 0usize);
        for (k, &x) in v.iter().enumerate() {
            s += x;
            s2 += x * x;
            if k > 0 {
                let d = x - v[k - 1];
                d2 += d * d;
                over += (d.abs() > 50.0) as usize;
            }
        }
        let want = [
            60_000.0 * n / s,
            ((s2 - s * s / n) / (n - 1.0)).sqrt(),
            (d2 / (n - 1.0)).sqrt(),
            100.0 * over as f64 / (n - 1.0),
        ];
        for (g, w) in [got.mean_hr, got.sdnn, got.rmssd, got.pnn50]
            .into_iter()
            .zip(want)
        {
            worst = worst.max(rel(g, w));
        }
    }
    let took = start.elapsed();
    ensure(worst <= 1e-9, || format!("max relative error {worst:.3e}"))?;
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("1000 series, max rel err {worst:.1e}, {took:.2?}"))
}

// 2. Detection accuracy on synthetic recordings.
fn detection_accuracy() -> Outcome {
    let warmup = DetectorConfig::ecg().warmup_s;
    let mut notes = Vec::new();
    for (snr, need) in [(None, 1.0), (Some(10.0), 0.95)] {
        let mut worst: f64 = 1.0;
        let mut slowest = Duration::ZERO;
        for (i, rr) in [1000.0, 857.0, 750.0, 667.0].into_iter().enumerate() {
            let x = pair(300.0, rr, snr, 70 + i as u64);
            for (sig, m, truth, tol) in [
                (&x.ecg, Modality::Ecg, &x.r_peaks, 0.010),
                (&x.bcg, Modality::Bcg, &x.j_peaks, 0.015),
            ] {
                let t = Instant::now();
                let found = detect(sig, m);
                slowest = slowest.max(t.elapsed());
                let s = score(truth.times(), found.times(), tol, warmup, 300.0);
                worst = worst.min(s.sensitivity()).min(s.ppv());
                ensure(s.sensitivity() >= need && s.ppv() >= need, || {
                    format!(
                        "{m} {rr} ms SNR {snr:?}: Se {:.4} PPV {:.4}",
                        s.sensitivity(),
                        s.ppv()
                    )
                })?;
            }
        }
        ensure(slowest < Duration::from_secs(5), || {
            format!("slowest recording {slowest:?}")
        })?;
        let label = snr.map_or("clean".to_string(), |s| format!("{s} dB"));
        notes.push(format!(
            "{label}: min Se/PPV {worst:.4}, slowest {slowest:.2?}"
        ));
    }
    Ok(notes.join("; "))
}

// 3. ECG-vs-BCG agreement on paired recordings at 20 dB.
fn paired_agreement() -> Outcome {
    let (mut sd, mut rm, mut pn, mut hr): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..5 {
        let p = pair(300.0, 800.0, Some(20.0), 300 + seed);
        let d = run_pair("s", &p.ecg, &p.bcg, &Config::default())
            .map_err(|e| e.to_string())?
            .comparison;
        sd = sd.max(d.rel_diff["sdnn"]);
        rm = rm.max(d.rel_diff["rmssd"]);
        pn = pn.max(d.abs_diff["pnn50"]);
        hr = hr.max(d.abs_diff["mean_hr"]);
    }
    let summary = format!(
        "worst of 5: SDNN {:.2}%, RMSSD {:.2}%, pNN50 {pn:.3} pp, HR {hr:.3} bpm",
        sd * 100.0,
        rm * 100.0
    );
    ensure(sd <= 0.03 && rm <= 0.03 && pn <= 1.0 && hr <= 0.5, || {
        summary.clone()
    })?;
    Ok(summary)
}

// 4. Correlation across a 20-subject cohort.
fn cohort_correlation() -> Outcome {
    let results = cohort_results(20, 300.0, 20.0);
    let r = correlate_cohort(&results).map_err(|e| e.to_string())?;
    let get = |k: &str| r.get(k).copied().unwrap_or(f64::NAN);
    let time_min = TIME_INDICES
        .iter()
        .map(|k| get(k))
        .fold(f64::INFINITY, f64::min);
    let (lf, hf) = (get("lf_power"), get("hf_power"));
    let summary = format!("min time-domain r {time_min:.5}, LF r {lf:.4}, HF r {hf:.4}");
    ensure(time_min > 0.99 && lf > 0.95 && hf > 0.95, || {
        summary.clone()
    })?;
    Ok(summary)
}

// 5. Sinusoidal tachogram band power and the Parseval check.
fn spectral_correctness() -> Outcome {
    let iv = sinusoidal_intervals(800.0, 50.0, 0.1, 300.0);
    let fa = frequency_domain(&iv, &HrvConfig::default()).map_err(|e| e.to_string())?;
    let f = fa.indices;
    let frac = f.lf_power / (f.vlf_power + f.lf_power + f.hf_power);
    let d = fa.tachogram.detrended.samples();
    let var = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
    let parseval = (f.total_power - var).abs() / var;
    let summary = format!(
        "LF {:.1} ms^2 (target 1250), LF fraction {frac:.3}, total vs variance {:.2}%",
        f.lf_power,
        parseval * 100.0
    );
    ensure(
        (f.lf_power - 1250.0).abs() <= 125.0 && frac > 0.9 && parseval <= 0.10,
        || summary.clone(),
    )?;
    Ok(summary)
}

// 6. Scale, shift, linearity and determinism invariants.
fn invariance_suite() -> Outcome {
    let x = pair(120.0, 780.0, Some(15.0), 606);
    for (sig, m) in [(&x.ecg, Modality::Ecg), (&x.bcg, Modality::Bcg)] {
        let (a, b) = (detect(sig, m), detect(&sig.scaled(10.0), m));
        ensure(a.times() == b.times(), || {
            format!("{m} beat times change under x10 input")
        })?;
    }
    let g = |gain| {
        detect_j_peaks(
            &preprocess_bcg(&x.bcg, gain).unwrap(),
            &DetectorConfig::bcg(),
        )
        .unwrap()
    };
    ensure(g(1.0).times() == g(10.0).times(), || {
        "BCG beat times change with gain".into()
    })?;

    let iv = sinusoidal_intervals(810.0, 35.0, 0.11, 300.0);
    let moved = iv.shifted(1234.5);
    ensure(
        time_domain(&iv).unwrap() == time_domain(&moved).unwrap(),
        || "time-domain indices move with anchors".into(),
    )?;
    let cfg = HrvConfig::default();
    let (fa, fb) = (
        frequency_domain(&iv, &cfg).unwrap().indices,
        frequency_domain(&moved, &cfg).unwrap().indices,
    );
    let shift_err = [
        rel(fa.vlf_power, fb.vlf_power),
        rel(fa.lf_power, fb.lf_power),
        rel(fa.hf_power, fb.hf_power),
        rel(fa.total_power, fb.total_power),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure(shift_err <= 1e-12, || {
        format!("band powers move with anchors: {shift_err:.2e}")
    })?;

    let band = BandSpec::new(5.0, 20.0, 4);
    let (u, v) = (&x.ecg, &x.bcg);
    let (a, b) = (0.7, -2.3);
    let mix: Vec<f64> = u
        .samples()
        .iter()
        .zip(v.samples())
        .map(|(p, q)| a * p + b * q)
        .collect();
    let lhs = bandpass_filter(&Signal::new(mix, u.fs()).unwrap(), band).unwrap();
    let (fu, fv) = (
        bandpass_filter(u, band).unwrap(),
        bandpass_filter(v, band).unwrap(),
    );
    let rhs: Vec<f64> = fu
        .samples()
        .iter()
        .zip(fv.samples())
        .map(|(p, q)| a * p + b * q)
        .collect();
    let scale = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let lin_err = lhs
        .samples()
        .iter()
        .zip(&rhs)
        .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()))
        / scale;
    ensure(lin_err <= 1e-9, || {
        format!("filter linearity error {lin_err:.2e}")
    })?;

    let render = || {
        let run = run_pair("s", &x.ecg, &x.bcg, &Config::default()).unwrap();
        let mut doc = run.report(vec!["ecg.csv".into(), "bcg.csv".into()], &Config::default());
        doc.provenance.generated_at.clear();
        to_json(&doc).unwrap()
    };
    ensure(render() == render(), || {
        "reports differ between identical runs".into()
    })?;
    Ok(format!("x10 and gain exact, anchor shift {shift_err:.1e}, linearity {lin_err:.1e}, reports identical"))
}

// 7. Wall-clock of the `pipeline` command on a 5-minute 250 Hz pair.
fn pipeline_wall_clock() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_hrvpair");
    let run = |args: &[&str]| {
        let o = Command::new(exe)
            .args(args)
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || {
            String::from_utf8_lossy(&o.stderr).into_owned()
        })
    };
    run(&[
        "synth",
        "--duration",
        "300",
        "--fs",
        "250",
        "--snr",
        "20",
        "--seed",
        "7",
        "--out",
        "rec",
    ])?;
    let t = Instant::now();
    run(&["pipeline", "rec/ecg.csv", "rec/bcg.csv", "--out", "out"])?;
    let took = t.elapsed();
    ensure(dir.path().join("out/report.json").exists(), || {
        "no report written".into()
    })?;
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("time-domain oracle equivalence", time_domain_oracle),
        ("detection accuracy", detection_accuracy),
        ("ECG-vs-BCG agreement", paired_agreement),
        ("cohort correlation", cohort_correlation),
        ("spectral correctness", spectral_correctness),
        ("invariance suite", invariance_suite),
        ("pipeline wall-clock", pipeline_wall_clock),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
