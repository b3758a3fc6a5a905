use serde::{Deserialize, Serialize};

use super::IntervalSeries;
use crate::detect::mean_heart_rate;
use crate::error::{Error, Result};

/// Successive differences larger than this count towards pNN50.
pub const NN50_MS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainIndices {
    /// bpm
    pub mean_hr: f64,
    /// ms, sample standard deviation
    pub sdnn: f64,
    /// ms
    pub rmssd: f64,
    /// percent of successive differences strictly above 50 ms
    pub pnn50: f64,
}

pub fn time_domain(iv: &IntervalSeries) -> Result<TimeDomainIndices> {
    let x = iv.intervals();
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let ss = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let sdnn = (ss / (n - 1) as f64).sqrt();

    let pairs = (n - 1) as f64;
    let (sq, over) = x.windows(2).fold((0.0, 0usize), |(sq, over), w| {
        let d = w[1] - w[0];
        (sq + d * d, over + usize::from(d.abs() > NN50_MS))
    });
    Ok(TimeDomainIndices {
        mean_hr: mean_heart_rate(iv)?,
        sdnn,
        rmssd: (sq / pairs).sqrt(),
        pnn50: 100.0 * over as f64 / pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrv::IntervalKind;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> IntervalSeries {
        IntervalSeries::from_intervals(v.to_vec(), 0.0, IntervalKind::Rr).unwrap()
    }

    #[test]
    fn zero_variability() {
        let t = time_domain(&series(&[800.0; 100])).unwrap();
        assert_eq!(t.mean_hr, 75.0);
        assert_eq!(t.sdnn, 0.0);
        assert_eq!(t.rmssd, 0.0);
        assert_eq!(t.pnn50, 0.0);
    }

    #[test]
    fn four_interval_example() {
        // mean 801.25; deviations -1.25, 8.75, -11.25, 3.75 -> SS 218.75
        // successive diffs 10, -20, 15 -> squares 725
        let t = time_domain(&series(&[800.0, 810.0, 790.0, 805.0])).unwrap();
        assert!((t.sdnn - (218.75_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((t.sdnn - 8.539).abs() < 5e-4);
        assert!((t.rmssd - (725.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((t.rmssd - 15.546).abs() < 5e-4);
        assert_eq!(t.pnn50, 0.0);
        assert!((t.mean_hr - 60_000.0 / 801.25).abs() < 1e-12);
        assert!((t.mean_hr - 74.883).abs() < 5e-4);
    }

    #[test]
    fn pnn50_uses_strict_inequality() {
        let t = time_domain(&series(&[800.0, 850.0, 800.0])).unwrap();
        assert_eq!(t.pnn50, 0.0);
        let t = time_domain(&series(&[800.0, 850.5, 800.0])).unwrap();
        assert_eq!(t.pnn50, 100.0);
        let t = time_domain(&series(&[800.0, 900.0, 910.0])).unwrap();
        assert_eq!(t.pnn50, 50.0);
    }

    #[test]
    fn needs_two_intervals() {
        assert!(matches!(
            time_domain(&series(&[800.0])),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    proptest! {
        #[test]
        fn pnn50_bounds(v in prop::collection::vec(300.0..1200.0_f64, 2..200)) {
            let t = time_domain(&series(&v)).unwrap();
            prop_assert!((0.0..=100.0).contains(&t.pnn50));
            prop_assert!(t.sdnn >= 0.0 && t.rmssd >= 0.0 && t.mean_hr > 0.0);
        }

        #[test]
        fn small_steps_give_zero_pnn50(start in 6000.0..9000.0_f64, steps in prop::collection::vec(-49.99..=49.99_f64, 1..100)) {
            let v: Vec<f64> = steps.iter().scan(start, |x, d| { *x += d; Some(*x) }).collect();
            let mut all = vec![start];
            all.extend(v);
            prop_assert_eq!(time_domain(&series(&all)).unwrap().pnn50, 0.0);
        }

        #[test]
        fn alternating_large_steps_give_full_pnn50(base in 600.0..900.0_f64, jump in 50.001..200.0_f64, n in 2usize..100) {
            let v: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { base } else { base + jump }).collect();
            prop_assert_eq!(time_domain(&series(&v)).unwrap().pnn50, 100.0);
        }

        #[test]
        fn labels_do_not_change_indices(v in prop::collection::vec(300.0..1200.0_f64, 2..100)) {
            let rr = series(&v);
            let jj = rr.clone().with_kind(IntervalKind::Jj);
            prop_assert_eq!(time_domain(&rr).unwrap(), time_domain(&jj).unwrap());
        }
    }
}
