//! Small summary statistics for Monte Carlo replicates.

use serde::{Deserialize, Serialize};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean and its standard error `s / √R`.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    Estimate {
        value: mean(xs),
        stderr: (sample_variance(xs) / xs.len() as f64).sqrt(),
    }
}

/// Delete-one jackknife: the full-sample statistic and
/// `sqrt((R-1)/R Σ (θ₋ᵢ - θ̄)²)`.
pub fn jackknife<F: Fn(&[f64]) -> f64>(xs: &[f64], statistic: F) -> Estimate {
    let full = statistic(xs);
    let r = xs.len();
    if r < 2 {
        return Estimate {
            value: full,
            stderr: 0.0,
        };
    }
    let mut buf = Vec::with_capacity(r - 1);
    let leave_out: Vec<f64> = (0..r)
        .map(|i| {
            buf.clear();
            buf.extend(
                xs.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &x)| x),
            );
            statistic(&buf)
        })
        .collect();
    let center = mean(&leave_out);
    let ss: f64 = leave_out.iter().map(|t| (t - center) * (t - center)).sum();
    Estimate {
        value: full,
        stderr: ((r - 1) as f64 / r as f64 * ss).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_of_mean_matches_classic_stderr() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        let jk = jackknife(&xs, mean);
        let classic = mean_estimate(&xs);
        assert!((jk.value - classic.value).abs() < 1e-15);
        assert!((jk.stderr - classic.stderr).abs() < 1e-12);
    }

    #[test]
    fn constant_samples_have_zero_spread() {
        let xs = [3.0; 10];
        assert_eq!(sample_variance(&xs), 0.0);
        assert_eq!(jackknife(&xs, sample_variance).stderr, 0.0);
    }
}
