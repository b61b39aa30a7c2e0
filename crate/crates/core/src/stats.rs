//! Replicate summaries, bootstrap intervals and Kolmogorov–Smirnov distances.

use rand::Rng;
use serde::Serialize;

use crate::numerics::pairwise_sum;
use crate::rng::{Seed, BOOTSTRAP_TAG};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// A Monte Carlo point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = mean(xs);
        let se = if n > 1 {
            (sample_variance(xs) / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate { mean, se, n }
    }

    /// Estimate of a Bernoulli frequency.
    pub fn proportion(hits: usize, n: usize) -> Estimate {
        let p = hits as f64 / n as f64;
        Estimate {
            mean: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&dev) / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let cov: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let vx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let vy: Vec<f64> = ys.iter().map(|y| (y - my) * (y - my)).collect();
    pairwise_sum(&cov) / (pairwise_sum(&vx) * pairwise_sum(&vy)).sqrt()
}

/// Percentile interval from bootstrap replicates.
fn percentile_ci(mut reps: Vec<f64>) -> (f64, f64) {
    reps.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let idx = ((reps.len() - 1) as f64 * p).round() as usize;
        reps[idx]
    };
    (q(0.025), q(0.975))
}

/// Summary of a replicated cover-time (or cover-count) sample.
#[derive(Clone, Debug, Serialize)]
pub struct CoverStats {
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// `var(C / E C)` estimated as sample variance over squared mean.
    pub normalized_var: f64,
    /// Bootstrap standard error of `normalized_var`.
    pub normalized_var_se: f64,
    pub mean_ci: (f64, f64),
    pub normalized_var_ci: (f64, f64),
    pub bootstrap_resamples: usize,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl CoverStats {
    /// Summarise `samples`; bootstrap resampling draws from a stream derived
    /// from `seed`, so the summary is deterministic.
    pub fn from_samples(samples: Vec<f64>, seed: Seed) -> CoverStats {
        assert!(samples.len() >= 2, "need at least two replicates");
        let n = samples.len();
        let mean = mean(&samples);
        let variance = sample_variance(&samples);
        let normalized_var = variance / (mean * mean);

        let mut rng = seed.child(BOOTSTRAP_TAG).stream();
        let mut boot_mean = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut boot_nv = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut buf = vec![0.0; n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for b in buf.iter_mut() {
                *b = samples[rng.random_range(0..n)];
            }
            let m = self::mean(&buf);
            boot_mean.push(m);
            boot_nv.push(if m != 0.0 { sample_variance(&buf) / (m * m) } else { 0.0 });
        }
        let normalized_var_se = sample_variance(&boot_nv).sqrt();
        CoverStats {
            reps: n,
            mean,
            variance,
            se_mean: (variance / n as f64).sqrt(),
            normalized_var,
            normalized_var_se,
            mean_ci: percentile_ci(boot_mean),
            normalized_var_ci: percentile_ci(boot_nv),
            bootstrap_resamples: BOOTSTRAP_RESAMPLES,
            samples,
        }
    }

    /// Empirical survival `Pr(C >= t)` with its binomial standard error.
    pub fn survival(&self, t: f64) -> Estimate {
        let hits = self.samples.iter().filter(|&&c| c >= t).count();
        Estimate::proportion(hits, self.reps)
    }
}

/// Sort a copy of `xs` ascending.
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Kolmogorov–Smirnov distance `sup |F_emp - F|` between the sample and
/// `cdf`, where the supremum only ranges over sample points accepted by
/// `keep`. The empirical CDF itself always uses the full sample.
pub fn ks_distance_where<F, K>(sample: &[f64], cdf: F, keep: K) -> f64
where
    F: Fn(f64) -> f64,
    K: Fn(f64) -> bool,
{
    let xs = sorted(sample);
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        // ties: the empirical CDF jumps once over the whole run
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let x = xs[i];
        if keep(x) {
            let f = cdf(x);
            let below = i as f64 / n;
            let at = (j + 1) as f64 / n;
            sup = sup.max((at - f).abs()).max((below - f).abs());
        }
        i = j + 1;
    }
    sup
}

pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    ks_distance_where(sample, cdf, |_| true)
}

/// Fraction of `sorted_xs` that is `<= x`.
pub fn empirical_cdf(sorted_xs: &[f64], x: f64) -> f64 {
    sorted_xs.partition_point(|&v| v <= x) as f64 / sorted_xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_sample_has_zero_variance() {
        let s = CoverStats::from_samples(vec![1.0; 50], Seed(1));
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.normalized_var, 0.0);
        assert_eq!(s.normalized_var_se, 0.0);
    }

    #[test]
    fn stats_are_deterministic() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let a = CoverStats::from_samples(xs.clone(), Seed(3));
        let b = CoverStats::from_samples(xs, Seed(3));
        assert_eq!(a.normalized_var_ci, b.normalized_var_ci);
        assert!(a.mean_ci.0 <= a.mean && a.mean <= a.mean_ci.1);
    }

    #[test]
    fn ks_against_uniform_grid() {
        // points i/n for i=1..n against U(0,1): distance exactly 1/n
        let xs: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ks_handles_ties() {
        let xs = [0.5, 0.5, 0.5, 0.5];
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert_eq!(d, 0.5);
        let d = ks_distance_where(&xs, |x| x.clamp(0.0, 1.0), |x| x > 0.6);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn correlation_of_linear_data() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((correlation(&xs, &ys) + 1.0).abs() < 1e-12);
    }
}
