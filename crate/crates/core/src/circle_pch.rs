//! Cover time of the standardized growth model on a circle of length `L`
//! with uniform seeds: the Poisson clumping prediction
//! `Pr(C <= t) ~ exp(-t e^{-t^2/L})`, its Gumbel form, and the uncovered
//! point, arc and gap laws at a fixed time.

use std::io::Write;

use serde::Serialize;

use crate::error::{CoverError, Result};
use crate::growth::{cover_time_exact, simulate_realization, simulate_until, Arrival, GrowthParams};
use crate::numerics::newton_bisect;
use crate::rng::{replicate, try_replicate, Seed};
use crate::spaces::{SeedDistribution, Space};
use crate::stats::{self, CoverStats, Estimate};

/// Conditioned gap samples required before gap statistics are reported.
pub const MIN_GAP_SAMPLES: usize = 100;

/// Lower and upper predicted-CDF levels of the band used for KS distances.
pub const PCH_BAND: (f64, f64) = (0.01, 0.99);

/// Maximum of `x e^{-x^2}`, attained at `x = 1/sqrt 2`.
pub fn g_max() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (-0.5f64).exp()
}

/// Inverse of `y = x e^{-x^2}` on its decreasing branch `x > 1/sqrt 2`.
pub fn g_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < g_max()) {
        return Err(CoverError::Domain {
            func: "g_inverse",
            value: y,
            reason: "needs 0 < y < max of x exp(-x^2)",
        });
    }
    let ln_y = y.ln();
    // ln x - x^2 - ln y is decreasing for x > 1/sqrt 2
    let f = |x: f64| x.ln() - x * x - ln_y;
    let df = |x: f64| 1.0 / x - 2.0 * x;
    let lo = std::f64::consts::FRAC_1_SQRT_2;
    let hi = (-ln_y).sqrt() + 1.0;
    Ok(newton_bisect(f, df, lo, hi, (-ln_y).sqrt().max(lo), 1e-16))
}

fn g_of_l(l: f64) -> Result<f64> {
    g_inverse(l.powf(-0.5))
}

/// `t0(L) = sqrt(L) G(L^{-1/2})`, where the predicted CDF equals `e^{-1}`.
pub fn t0_of_l(l: f64) -> Result<f64> {
    Ok(l.sqrt() * g_of_l(l)?)
}

/// `sigma(L) = sqrt(L) / (2 G(L^{-1/2}))`, the Gumbel scale.
pub fn sigma_of_l(l: f64) -> Result<f64> {
    Ok(l.sqrt() / (2.0 * g_of_l(l)?))
}

/// `exp(-t e^{-t^2/L})`. Only meaningful away from the lower tail; it is
/// not monotone below `sqrt(L/2)`.
pub fn pch_cdf(l: f64, t: f64) -> f64 {
    (-t * (-t * t / l).exp()).exp()
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// `c* = sqrt(pi L) / 2` for the standardized uniform circle.
pub fn c_star_circle(l: f64) -> f64 {
    0.5 * (std::f64::consts::PI * l).sqrt()
}

/// Prediction parameters for one `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PchPrediction {
    pub l: f64,
    pub t0: f64,
    pub sigma: f64,
}

impl PchPrediction {
    pub fn new(l: f64) -> Result<Self> {
        Ok(PchPrediction {
            l,
            t0: t0_of_l(l)?,
            sigma: sigma_of_l(l)?,
        })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        pch_cdf(self.l, t)
    }

    /// Gumbel approximation `exp(-e^{-(t - t0)/sigma})`.
    pub fn gumbel(&self, t: f64) -> f64 {
        gumbel_cdf((t - self.t0) / self.sigma)
    }

    /// Inside the KS band and on the monotone side of the formula.
    pub fn in_band(&self, t: f64) -> bool {
        let f = self.cdf(t);
        t >= (0.5 * self.l).sqrt() && f >= PCH_BAND.0 && f <= PCH_BAND.1
    }
}

/// `sup_x |pch_cdf(t0 + x sigma) - exp(-e^{-x})|` over a grid of `x`.
pub fn gumbel_sup_distance(l: f64, x_grid: &[f64]) -> Result<f64> {
    let p = PchPrediction::new(l)?;
    Ok(x_grid
        .iter()
        .map(|&x| (p.cdf(p.t0 + x * p.sigma) - gumbel_cdf(x)).abs())
        .fold(0.0, f64::max))
}

fn circle_params(l: f64) -> Result<GrowthParams> {
    GrowthParams::standardized(Space::circle(l)?, SeedDistribution::Uniform)
}

#[derive(Clone, Debug, Serialize)]
pub struct PchComparison {
    pub prediction: PchPrediction,
    pub ks_pch: f64,
    pub ks_gumbel: f64,
    pub median: f64,
    pub stats: CoverStats,
}

/// Simulated cover times against the prediction: KS restricted to the band
/// for the raw formula, and unrestricted for `(C - t0)/sigma` against the
/// Gumbel law.
pub fn empirical_vs_pch(l: f64, reps: usize, seed: Seed) -> Result<PchComparison> {
    if reps < 100 {
        return Err(CoverError::InvalidParameter(format!(
            "need at least 100 replicates, got {reps}"
        )));
    }
    let p = PchPrediction::new(l)?;
    let params = circle_params(l)?;
    let cs = try_replicate(seed, reps, |_, rng| {
        cover_time_exact(&simulate_realization(&params, rng), &params.space, 1.0).map(|c| c.time)
    })?;
    let ks_pch = stats::ks_distance_where(&cs, |t| p.cdf(t), |t| p.in_band(t));
    let z: Vec<f64> = cs.iter().map(|c| (c - p.t0) / p.sigma).collect();
    let ks_gumbel = stats::ks_distance(&z, gumbel_cdf);
    let sorted = stats::sorted(&cs);
    let median = sorted[sorted.len() / 2];
    Ok(PchComparison {
        prediction: p,
        ks_pch,
        ks_gumbel,
        median,
        stats: CoverStats::from_samples(cs, seed),
    })
}

/// `var(C/EC) G^4` and `(c*/EC) G`, both of constant order in `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceOrders {
    pub l: f64,
    pub scaled_normalized_var: f64,
    pub scaled_cstar_ratio: f64,
}

pub fn variance_orders(l: f64, stats: &CoverStats) -> Result<VarianceOrders> {
    let g = g_of_l(l)?;
    Ok(VarianceOrders {
        l,
        scaled_normalized_var: stats.normalized_var * g.powi(4),
        scaled_cstar_ratio: c_star_circle(l) / stats.mean * g,
    })
}

/// `Pr(a fixed point is uncovered at t) = exp(-t^2/L)` for `t <= L/2`.
pub fn predicted_uncovered_point(l: f64, t: f64) -> f64 {
    (-t * t / l).exp()
}

/// `Pr(a fixed arc of length a is entirely uncovered at t)`, ignoring
/// wrap-around: `exp(-(a t + t^2)/L)`.
pub fn predicted_uncovered_arc(l: f64, a: f64, t: f64) -> f64 {
    (-(a * t + t * t) / l).exp()
}

/// Empirical probability that the arc `[0, a]` (a point when `a = 0`) is
/// entirely uncovered at time `t`.
pub fn uncovered_arc_prob(l: f64, a: f64, t: f64, reps: usize, seed: Seed) -> Result<Estimate> {
    if !(a >= 0.0 && a < l) {
        return Err(CoverError::InvalidParameter(format!(
            "arc length must lie in [0, L), got {a}"
        )));
    }
    let params = circle_params(l)?;
    let hits = replicate(seed, reps, |_, rng| {
        let real = simulate_until(&params, t, rng);
        real.arrivals.iter().all(|s| {
            let x = s.sigma.pos().expect("circle point");
            let reach = t - s.tau;
            // distance from x to the arc [0, a]
            let d = if x <= a { 0.0 } else { (x - a).min(l - x) };
            d > reach
        })
    });
    Ok(Estimate::proportion(hits.iter().filter(|&&h| h).count(), reps))
}

pub fn uncovered_point_prob(l: f64, t: f64, reps: usize, seed: Seed) -> Result<Estimate> {
    uncovered_arc_prob(l, 0.0, t, reps, seed)
}

/// Extents of the uncovered interval around the point 0 at time `t`: `a1`
/// in the increasing direction, `a2` in the decreasing one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapSample {
    pub t: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapStats {
    pub l: f64,
    pub t: f64,
    pub reps: usize,
    pub conditioned: usize,
    pub predicted_mean: f64,
    pub mean_a1: Estimate,
    pub mean_a2: Estimate,
    /// Mean over standard deviation, 1 for an exponential law.
    pub mean_sd_ratio_a1: f64,
    pub correlation: f64,
    pub ks_exp_a1: f64,
    pub ks_exp_a2: f64,
    #[serde(skip)]
    pub samples: Vec<GapSample>,
}

/// Uncovered extents on one path, or `None` when 0 is covered at `t`.
/// Each seed covers the arc of radius `t - tau` about its center; with the
/// center at offset `x` from 0 (measured in the increasing direction) and 0
/// outside the arc, the arc occupies `[x - rho, x + rho]` within `(0, L)`.
pub fn gap_at(l: f64, t: f64, arrivals: &[Arrival]) -> Option<GapSample> {
    let mut a1 = l;
    let mut a2 = l;
    for s in arrivals.iter().filter(|s| s.tau <= t) {
        let x = s.sigma.pos().expect("circle point");
        let rho = t - s.tau;
        if x.min(l - x) <= rho {
            return None;
        }
        a1 = a1.min(x - rho);
        a2 = a2.min(l - x - rho);
    }
    Some(GapSample { t, a1, a2 })
}

/// Gap statistics conditional on the point 0 being uncovered at `t`.
pub fn uncovered_gap_stats(l: f64, t: f64, reps: usize, seed: Seed) -> Result<GapStats> {
    let params = circle_params(l)?;
    let rows = replicate(seed, reps, |_, rng| {
        let real = simulate_until(&params, t, rng);
        gap_at(l, t, &real.arrivals)
    });
    let samples: Vec<GapSample> = rows.into_iter().flatten().collect();
    if samples.len() < MIN_GAP_SAMPLES {
        return Err(CoverError::InsufficientSamples {
            got: samples.len(),
            needed: MIN_GAP_SAMPLES,
        });
    }
    let a1: Vec<f64> = samples.iter().map(|g| g.a1).collect();
    let a2: Vec<f64> = samples.iter().map(|g| g.a2).collect();
    let mean = l / t;
    let exp_cdf = |x: f64| 1.0 - (-x / mean).exp();
    Ok(GapStats {
        l,
        t,
        reps,
        conditioned: samples.len(),
        predicted_mean: mean,
        mean_a1: Estimate::from_samples(&a1),
        mean_a2: Estimate::from_samples(&a2),
        mean_sd_ratio_a1: stats::mean(&a1) / stats::sample_variance(&a1).sqrt(),
        correlation: stats::correlation(&a1, &a2),
        ks_exp_a1: stats::ks_distance(&a1, exp_cdf),
        ks_exp_a2: stats::ks_distance(&a2, exp_cdf),
        samples,
    })
}

/// Plot data with columns `L,t,empirical_cdf,pch_cdf,gumbel_cdf`, one row
/// per sorted sample.
pub fn write_plot_csv<W: Write>(out: W, cmp: &PchComparison) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["L", "t", "empirical_cdf", "pch_cdf", "gumbel_cdf"])?;
    let xs = stats::sorted(&cmp.stats.samples);
    let n = xs.len() as f64;
    let p = &cmp.prediction;
    for (i, &t) in xs.iter().enumerate() {
        w.write_record([
            format!("{:.16e}", p.l),
            format!("{t:.16e}"),
            format!("{:.16e}", (i + 1) as f64 / n),
            format!("{:.16e}", p.cdf(t)),
            format!("{:.16e}", p.gumbel(t)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gap_csv<W: Write>(out: W, gaps: &GapStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["L", "t", "a1", "a2"])?;
    for g in &gaps.samples {
        w.write_record([
            format!("{:.16e}", gaps.l),
            format!("{:.16e}", g.t),
            format!("{:.16e}", g.a1),
            format!("{:.16e}", g.a2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
