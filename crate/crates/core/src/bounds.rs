//! Bound formulas and checkers that compare simulated quantities with them.
//!
//! A check `lhs <= rhs` holds when the estimate satisfies it outright, holds
//! with slack when it does so after subtracting three standard errors, and
//! is violated otherwise.

use std::collections::BTreeMap;
use std::f64::consts::E;

use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{invalid, CoverError, Result};
use crate::growth::{simulate_realization, CoverEvaluator, CoverMethod, GrowthParams};
use crate::numerics::harmonic;
use crate::rng::{try_replicate, Seed};
use crate::spaces::{Point, SeedDistribution, Space};
use crate::stats::{CoverStats, Estimate};

/// Multiplier on the standard error allowed before a check is violated.
pub const SLACK_SE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsWithSlack,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub lhs_empirical: f64,
    /// Standard error of `lhs - rhs`.
    pub lhs_se: f64,
    pub rhs_formula: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub parameters: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn compare(name: &str, lhs: f64, se: f64, rhs: f64, parameters: &[(&str, f64)]) -> BoundReport {
        let slack = SLACK_SE * se;
        let verdict = if lhs <= rhs {
            Verdict::Holds
        } else if lhs - slack <= rhs {
            Verdict::HoldsWithSlack
        } else {
            Verdict::Violated
        };
        BoundReport {
            bound_name: name.to_string(),
            lhs_empirical: lhs,
            lhs_se: se,
            rhs_formula: rhs,
            slack,
            verdict,
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// `d(r0) / (eta(r0/2) E C)`, the fixed-radius variance bound without its
/// unknown constant.
pub fn prop_fixed_rhs(d_r0: usize, eta_half: f64, ec: f64) -> Result<f64> {
    if !(eta_half > 0.0) {
        return Err(CoverError::Domain {
            func: "prop_fixed_rhs",
            value: eta_half,
            reason: "eta(r0/2) must be positive",
        });
    }
    if !(ec > 0.0) {
        return Err(invalid(format!("mean cover count must be positive, got {ec}")));
    }
    Ok(d_r0 as f64 / (eta_half * ec))
}

/// One member of a fixed-radius family: `var(C / E C)` divided by the
/// constant-free bound.
#[derive(Clone, Debug, Serialize)]
pub struct FixedRatio {
    pub r0: f64,
    pub d_r0: usize,
    pub eta_half: f64,
    pub normalized_var: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

pub fn fixed_ratio(r0: f64, stats: &CoverStats, d_r0: usize, eta_half: f64) -> Result<FixedRatio> {
    let rhs = prop_fixed_rhs(d_r0, eta_half, stats.mean)?;
    Ok(FixedRatio {
        r0,
        d_r0,
        eta_half,
        normalized_var: stats.normalized_var,
        rhs,
        ratio: stats.normalized_var / rhs,
        ratio_se: stats.normalized_var_se / rhs,
    })
}

/// The largest ratio along a family must stay below `guard`.
pub fn fixed_family_check(family: &[FixedRatio], guard: f64) -> Result<BoundReport> {
    let worst = family
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .ok_or_else(|| invalid("empty family"))?;
    Ok(BoundReport::compare(
        "fixed-radius variance ratio",
        worst.ratio,
        worst.ratio_se,
        guard,
        &[("r0", worst.r0), ("members", family.len() as f64)],
    ))
}

/// `var(C / E C) <= c* / E C`. The standard error combines the bootstrap
/// error of the left side with the error of `E C` on the right.
pub fn growth_var_check(stats: &CoverStats, c_star: f64) -> BoundReport {
    let rhs = c_star / stats.mean;
    let rhs_se = c_star * stats.se_mean / (stats.mean * stats.mean);
    let se = stats.normalized_var_se.hypot(rhs_se);
    BoundReport::compare(
        "growth variance",
        stats.normalized_var,
        se,
        rhs,
        &[("c_star", c_star), ("mean", stats.mean), ("reps", stats.reps as f64)],
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct DiameterCheck {
    pub lower: BoundReport,
    pub upper: BoundReport,
    /// `Delta / (E C)^2`, tracked along families.
    pub delta_over_ec_sq: f64,
}

/// `1/lambda <= E C <= 1/lambda + Delta/v`.
pub fn ec_diameter_check(stats: &CoverStats, delta: f64, lambda: f64, v: f64) -> DiameterCheck {
    let params = [("delta", delta), ("lambda", lambda), ("v", v)];
    DiameterCheck {
        lower: BoundReport::compare(
            "mean cover time lower",
            1.0 / lambda,
            stats.se_mean,
            stats.mean,
            &params,
        ),
        upper: BoundReport::compare(
            "mean cover time upper",
            stats.mean,
            stats.se_mean,
            1.0 / lambda + delta / v,
            &params,
        ),
        delta_over_ec_sq: delta / (stats.mean * stats.mean),
    }
}

/// `exp(1 - t / (e E C))` clamped to `[0, 1]`.
pub fn tail_envelope(ec: f64, t: f64) -> f64 {
    (1.0 - t / (E * ec)).exp().clamp(0.0, 1.0)
}

/// Empirical survival against the envelope on a grid; reports the grid
/// point where the survival most exceeds it.
pub fn tail_envelope_check(stats: &CoverStats, grid: &[f64]) -> Result<BoundReport> {
    let worst = grid
        .iter()
        .map(|&t| (t, stats.survival(t), tail_envelope(stats.mean, t)))
        .max_by(|a, b| (a.1.mean - a.2 - SLACK_SE * a.1.se).total_cmp(&(b.1.mean - b.2 - SLACK_SE * b.1.se)))
        .ok_or_else(|| invalid("empty grid"))?;
    let (t, surv, env) = worst;
    Ok(BoundReport::compare(
        "submultiplicative tail",
        surv.mean,
        surv.se,
        env,
        &[("t", t), ("mean", stats.mean)],
    ))
}

/// A grid minimum and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridMin {
    pub argmin: f64,
    pub value: f64,
    /// Covering number at the minimizer.
    pub cov: usize,
}

fn grid_min<F>(grid: &[f64], cov_fn: F, objective: impl Fn(f64, usize) -> f64) -> Result<GridMin>
where
    F: Fn(f64) -> Result<usize>,
{
    let mut best: Option<GridMin> = None;
    for &x in grid {
        if !(x > 0.0) {
            return Err(invalid(format!("grid values must be positive, got {x}")));
        }
        let cov = cov_fn(x)?;
        let value = objective(x, cov);
        if best.is_none_or(|b| value < b.value) {
            best = Some(GridMin { argmin: x, value, cov });
        }
    }
    best.ok_or_else(|| invalid("empty grid"))
}

/// `min_a [a + e (e + log cov(a c*))]` over the grid, an upper bound on
/// `E C / c*`.
pub fn ec_over_cstar_upper<F>(c_star: f64, cov_fn: F, a_grid: &[f64]) -> Result<GridMin>
where
    F: Fn(f64) -> Result<usize>,
{
    grid_min(a_grid, |a| cov_fn(a * c_star), |a, cov| a + E * (E + (cov as f64).ln()))
}

/// `min_r [r + cov(r) (1 + log cov(r))]` over the grid, an upper bound on
/// the smallest mean cover time over all seed laws.
pub fn min_mu_upper(space: &Space, r_grid: &[f64]) -> Result<GridMin> {
    grid_min(
        r_grid,
        |r| Ok(space.covering_number(r)?.count),
        |r, cov| r + cov as f64 * (1.0 + (cov as f64).ln()),
    )
}

/// Radii `Delta / (2k)` and `Delta / k` for `k = 1..=k_max`, where the
/// covering number of a circle or segment changes.
pub fn default_r_grid(space: &Space, k_max: usize) -> Vec<f64> {
    let delta = space.diameter();
    let mut g: Vec<f64> = (1..=k_max)
        .flat_map(|k| [delta / k as f64, 0.5 * delta / k as f64])
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// `min {r : cov(3r) <= 9r}` by bisection to `1e-6 Delta`, a lower bound
/// on the smallest mean cover time over all seed laws (standardized).
pub fn min_mu_lower(space: &Space) -> Result<f64> {
    let delta = space.diameter();
    let ok = |r: f64| -> Result<bool> { Ok(space.covering_number(3.0 * r)?.count as f64 <= 9.0 * r) };
    // one ball of radius Delta covers, so the condition holds here
    let mut hi = (delta / 3.0).max(1.0 / 9.0);
    let mut lo = 0.0;
    let tol = 1e-6 * delta.max(f64::MIN_POSITIVE);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `n H_n`, the mean coupon collector time.
pub fn coupon_mean(n: u64) -> f64 {
    n as f64 * harmonic(n)
}

/// Simulated atoms-at-centers construction for `min_mu_upper`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionCheck {
    pub r: f64,
    pub centers: usize,
    pub stats: CoverStats,
    /// Time until every center has received a seed.
    pub coupon_time: Estimate,
    /// Realizations with `C > r + coupon time`.
    pub pathwise_violations: usize,
    /// `E C <= r + n H_n`.
    pub coupon_report: BoundReport,
    /// `E C <= r + n (1 + log n)`.
    pub bound_report: BoundReport,
}

/// Uniform atoms at the centers of a radius-`r` covering, simulated in the
/// standardized growth model. Once every center has a seed, each ball of
/// radius `r` around a center is covered `r` later, so `C <= r + T` holds on
/// every path, with `T` the coupon collector time over the centers.
pub fn min_mu_construction_check(space: &Space, r: f64, reps: usize, seed: Seed) -> Result<ConstructionCheck> {
    let centers = space.covering(r)?.centers;
    let n = centers.len();
    let mu = SeedDistribution::uniform_atoms(centers.clone())?;
    let params = GrowthParams::standardized(space.clone(), mu)?;
    let eval = CoverEvaluator::new(&params.space, CoverMethod::default_for(&params.space))?;
    let rows = try_replicate(seed, reps, |_, rng| -> Result<(f64, f64)> {
        let real = simulate_realization(&params, rng);
        let c = eval.cover_time(&real, &params.space, 1.0)?.time;
        let mut seen = vec![false; n];
        let mut left = n;
        let mut hit = |p: &Point| {
            let i = centers.iter().position(|q| q == p).expect("atom is a center");
            if !seen[i] {
                seen[i] = true;
                left -= 1;
            }
            left == 0
        };
        if let Some(a) = real.arrivals.iter().find(|a| hit(&a.sigma)) {
            return Ok((c, a.tau));
        }
        // arrivals past the horizon continue as a fresh rate-1 process
        let exp = Exp::new(1.0).expect("unit rate");
        let mut t = real.horizon;
        loop {
            t += exp.sample(rng);
            if hit(&params.space.sample(&params.mu, rng)) {
                return Ok((c, t));
            }
        }
    })?;
    let violations = rows.iter().filter(|(c, t)| *c > r + t + 1e-9).count();
    let stats = CoverStats::from_samples(rows.iter().map(|r| r.0).collect(), seed);
    let coupon_time = Estimate::from_samples(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let nf = n as f64;
    let params_echo = [("r", r), ("centers", nf)];
    Ok(ConstructionCheck {
        r,
        centers: n,
        coupon_report: BoundReport::compare(
            "min-mu construction vs coupon mean",
            stats.mean,
            stats.se_mean,
            r + coupon_mean(n as u64),
            &params_echo,
        ),
        bound_report: BoundReport::compare(
            "min-mu construction vs upper bound",
            stats.mean,
            stats.se_mean,
            r + nf * (1.0 + nf.ln()),
            &params_echo,
        ),
        stats,
        coupon_time,
        pathwise_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::FiniteMetric;
    use proptest::prelude::*;

    fn stats_of(xs: Vec<f64>) -> CoverStats {
        CoverStats::from_samples(xs, Seed(0))
    }

    #[test]
    fn verdict_logic() {
        assert_eq!(BoundReport::compare("x", 1.0, 0.1, 2.0, &[]).verdict, Verdict::Holds);
        assert_eq!(
            BoundReport::compare("x", 2.2, 0.1, 2.0, &[]).verdict,
            Verdict::HoldsWithSlack
        );
        assert_eq!(
            BoundReport::compare("x", 2.31, 0.1, 2.0, &[]).verdict,
            Verdict::Violated
        );
    }

    #[test]
    fn prop_fixed_rhs_examples() {
        assert!((prop_fixed_rhs(2, 0.2, 10.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(prop_fixed_rhs(2, 0.0, 10.0), Err(CoverError::Domain { .. })));
    }

    #[test]
    fn growth_var_check_examples() {
        let flat = stats_of(vec![3.0; 50]);
        let r = growth_var_check(&flat, 1.0);
        assert_eq!((r.lhs_empirical, r.verdict), (0.0, Verdict::Holds));
        // normalized variance near 1 against a bound of 0.1
        let wild = stats_of((0..2000).map(|i| if i % 2 == 0 { 0.1 } else { 10.0 }).collect());
        let r = growth_var_check(&wild, 0.1 * wild.mean * 0.1);
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn diameter_check_on_circle() {
        let s = stats_of((0..100).map(|i| 20.0 + (i % 7) as f64).collect());
        let d = ec_diameter_check(&s, 50.0, 1.0, 1.0);
        assert_eq!(d.lower.verdict, Verdict::Holds);
        assert_eq!(d.upper.verdict, Verdict::Holds);
        assert!((d.delta_over_ec_sq - 50.0 / (s.mean * s.mean)).abs() < 1e-15);
    }

    #[test]
    fn tail_envelope_examples() {
        assert_eq!(tail_envelope(2.0, 0.0), 1.0);
        assert_eq!(tail_envelope(2.0, E * 2.0), 1.0);
        assert!((tail_envelope(1.0, 2.0 * E) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ec_over_cstar_with_unit_cover() {
        let grid = [1.0, 0.1, 0.01];
        let g = ec_over_cstar_upper(5.0, |_| Ok(1), &grid).unwrap();
        assert!((g.value - (0.01 + E * E)).abs() < 1e-12);
        assert_eq!(g.argmin, 0.01);
        let one = ec_over_cstar_upper(5.0, |_| Ok(3), &[1.0]).unwrap();
        assert!((one.value - (1.0 + E * (E + 3f64.ln()))).abs() < 1e-12);
        assert!(ec_over_cstar_upper(5.0, |_| Ok(1), &[]).is_err());
    }

    #[test]
    fn min_mu_upper_on_circle() {
        let space = Space::circle(100.0).unwrap();
        let g = min_mu_upper(&space, &default_r_grid(&space, 60)).unwrap();
        // brute force over k balls of radius L / (2k)
        let (k, v) = (1..=60)
            .map(|k| (k, 50.0 / k as f64 + k as f64 * (1.0 + (k as f64).ln())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(g.cov, k);
        assert!((g.value - v).abs() < 1e-9);
        // r >= Delta gives r + 1
        let big = min_mu_upper(&space, &[60.0]).unwrap();
        assert!((big.value - 61.0).abs() < 1e-12);
    }

    #[test]
    fn min_mu_lower_examples() {
        let circle = Space::circle(100.0).unwrap();
        let r = min_mu_lower(&circle).unwrap();
        // scan oracle: ceil(100 / 6r) <= 9r
        let scan = (1..2_000_000)
            .map(|i| i as f64 * 1e-6)
            .find(|&r| (100.0 / (6.0 * r)).ceil() <= 9.0 * r)
            .unwrap();
        assert!((r - scan).abs() < 2e-6 * 50.0, "{r} vs {scan}");
        let eq = Space::FiniteMetric(FiniteMetric::equilateral(4, 1.0).unwrap());
        assert!((min_mu_lower(&eq).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn coupon_means() {
        assert_eq!(coupon_mean(1), 1.0);
        assert_eq!(coupon_mean(2), 3.0);
        let direct: f64 = (1..=100).map(|k| 100.0 / k as f64).sum();
        assert!((coupon_mean(100) - direct).abs() < 1e-12);
        assert!((coupon_mean(100) - 518.7377517639621).abs() < 1e-9);
    }

    #[test]
    fn construction_is_pathwise_bounded() {
        let space = Space::circle(30.0).unwrap();
        let c = min_mu_construction_check(&space, 5.0, 2000, Seed(7)).unwrap();
        assert_eq!(c.centers, 3);
        assert_eq!(c.pathwise_violations, 0);
        assert!(!c.coupon_report.violated() && !c.bound_report.violated());
        assert!((c.coupon_time.mean - coupon_mean(3)).abs() < 3.0 * c.coupon_time.se);
    }

    #[test]
    fn fixed_family_guard() {
        let s = stats_of((0..200).map(|i| 10.0 + (i % 5) as f64).collect());
        let fam = vec![
            fixed_ratio(1.0, &s, 2, 0.01).unwrap(),
            fixed_ratio(0.5, &s, 2, 0.005).unwrap(),
        ];
        let r = fixed_family_check(&fam, 10.0).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.parameters["r0"], 1.0);
    }

    proptest! {
        #[test]
        fn envelope_is_monotone_and_bounded(ec in 0.01..100.0f64, t1 in 0.0..1e3f64, dt in 0.0..1e3f64) {
            let a = tail_envelope(ec, t1);
            let b = tail_envelope(ec, t1 + dt);
            prop_assert!(a <= 1.0 && b <= a && b >= 0.0);
        }
    }
}
