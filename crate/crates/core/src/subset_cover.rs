//! Covering a finite ground set by i.i.d. random subsets, and hitting times
//! of monotone continuous-time Markov chains.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::{invalid, Result};
use crate::rng::{replicate, Seed, BOOTSTRAP_TAG};
use crate::spaces::{FiniteMetric, Point, SeedDistribution, Space};
use crate::stats::{self, CoverStats, Estimate, BOOTSTRAP_RESAMPLES};

const INNER_TAG: u64 = 0x1a7e_c0de;

/// A law of random subsets of `{0, .., m-1}` giving every point positive
/// probability.
#[derive(Clone, Debug)]
pub enum SubsetSampler {
    UniformSingleton {
        m: usize,
    },
    RandomKSubset {
        m: usize,
        k: usize,
    },
    /// `k` consecutive points of the `m`-cycle with uniform start.
    CyclicArc {
        m: usize,
        k: usize,
    },
    /// The closed ball of radius `r0` about a `mu`-random point.
    MetricBall {
        space: Space,
        r0: f64,
        mu: SeedDistribution,
    },
}

impl SubsetSampler {
    pub fn uniform_singleton(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("ground set must be nonempty"));
        }
        Ok(SubsetSampler::UniformSingleton { m })
    }

    pub fn random_k_subset(m: usize, k: usize) -> Result<Self> {
        if k == 0 || k > m {
            return Err(invalid(format!("need 1 <= k <= m, got k={k}, m={m}")));
        }
        Ok(SubsetSampler::RandomKSubset { m, k })
    }

    pub fn cyclic_arc(m: usize, k: usize) -> Result<Self> {
        if k == 0 || k > m {
            return Err(invalid(format!("need 1 <= k <= m, got k={k}, m={m}")));
        }
        Ok(SubsetSampler::CyclicArc { m, k })
    }

    /// Checks every ground point against every atom, so positivity is
    /// verified exactly.
    pub fn metric_ball(metric: FiniteMetric, r0: f64, mu: SeedDistribution) -> Result<Self> {
        if !(r0 >= 0.0) {
            return Err(invalid(format!("r0 must be nonnegative, got {r0}")));
        }
        let space = Space::FiniteMetric(metric);
        mu.validate(&space)?;
        let m = ground_size_of(&space);
        for s in 0..m {
            if space.ball_measure(&mu, &Point::Index(s), r0)? <= 0.0 {
                return Err(invalid(format!("point {s} is never sampled")));
            }
        }
        Ok(SubsetSampler::MetricBall { space, r0, mu })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            SubsetSampler::UniformSingleton { m }
            | SubsetSampler::RandomKSubset { m, .. }
            | SubsetSampler::CyclicArc { m, .. } => *m,
            SubsetSampler::MetricBall { space, .. } => ground_size_of(space),
        }
    }

    /// Replace `out` with one random subset.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        match self {
            SubsetSampler::UniformSingleton { m } => out.push(rng.random_range(0..*m)),
            SubsetSampler::RandomKSubset { m, k } => out.extend(index::sample(rng, *m, *k).iter()),
            SubsetSampler::CyclicArc { m, k } => {
                let start = rng.random_range(0..*m);
                out.extend((0..*k).map(|i| (start + i) % m));
            }
            SubsetSampler::MetricBall { space, r0, mu } => {
                let Point::Index(c) = space.sample(mu, rng) else {
                    unreachable!()
                };
                let Space::FiniteMetric(fm) = space else { unreachable!() };
                out.extend(fm.ball(c, *r0));
            }
        }
    }
}

fn ground_size_of(space: &Space) -> usize {
    match space {
        Space::FiniteMetric(fm) => fm.len(),
        _ => unreachable!("metric-ball samplers live on finite metrics"),
    }
}

/// Cover count and the points first covered by the final draw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalRecord {
    pub cover_count: u64,
    pub terminal: Vec<usize>,
}

/// Draw subsets until their union is the ground set.
pub fn simulate_cover<R: Rng + ?Sized>(sampler: &SubsetSampler, rng: &mut R) -> TerminalRecord {
    let m = sampler.ground_size();
    let mut covered = vec![false; m];
    let mut left = m;
    let mut buf = Vec::new();
    let mut n = 0;
    loop {
        n += 1;
        sampler.draw_into(rng, &mut buf);
        let mut fresh = Vec::new();
        for &s in &buf {
            if !covered[s] {
                covered[s] = true;
                left -= 1;
                fresh.push(s);
            }
        }
        if left == 0 {
            fresh.sort_unstable();
            return TerminalRecord {
                cover_count: n,
                terminal: fresh,
            };
        }
    }
}

/// `min {n : R_n contains B}` for one stream.
pub fn cover_count_of<R: Rng + ?Sized>(sampler: &SubsetSampler, b: &[usize], rng: &mut R) -> u64 {
    let m = sampler.ground_size();
    let mut wanted = vec![false; m];
    let mut left = 0;
    for &s in b {
        if !wanted[s] {
            wanted[s] = true;
            left += 1;
        }
    }
    let mut buf = Vec::new();
    let mut n = 0;
    while left > 0 {
        n += 1;
        sampler.draw_into(rng, &mut buf);
        for &s in &buf {
            if wanted[s] {
                wanted[s] = false;
                left -= 1;
            }
        }
    }
    n
}

/// Monte Carlo estimate of `c(B)`, the mean number of draws covering `B`.
pub fn estimate_c_of_b(sampler: &SubsetSampler, b: &[usize], reps: usize, seed: Seed) -> Result<Estimate> {
    if b.is_empty() {
        return Err(invalid("B must be nonempty"));
    }
    let m = sampler.ground_size();
    if let Some(&s) = b.iter().find(|&&s| s >= m) {
        return Err(invalid(format!("point {s} outside ground set of size {m}")));
    }
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let xs = replicate(seed, reps, |_, rng| cover_count_of(sampler, b, rng) as f64);
    Ok(Estimate::from_samples(&xs))
}

/// Empirical `var(C/EC) EC / E c(T)` with its bootstrap interval.
#[derive(Clone, Debug, Serialize)]
pub struct KappaRatio {
    pub ratio: f64,
    pub ratio_se: f64,
    pub ratio_ci: (f64, f64),
    pub mean_cover: f64,
    pub normalized_var: f64,
    pub mean_terminal_cost: f64,
    pub outer_reps: usize,
    pub inner_reps: usize,
    #[serde(skip)]
    pub records: Vec<(u64, usize)>,
}

fn ratio_of(c: &[f64], ct: &[f64]) -> f64 {
    let mean = stats::mean(c);
    let var = stats::sample_variance(c);
    let denom = stats::mean(ct);
    if mean == 0.0 || denom == 0.0 {
        return 0.0;
    }
    var / mean / denom
}

/// Nested Monte Carlo: each outer replicate records `(C, T)` and estimates
/// `c(T)` from `inner_reps` fresh runs on the stream `(seed, INNER, i)`.
pub fn kappa_ratio(sampler: &SubsetSampler, outer_reps: usize, inner_reps: usize, seed: Seed) -> Result<KappaRatio> {
    if outer_reps < 2 || inner_reps < 2 {
        return Err(invalid("need at least two outer and two inner replicates"));
    }
    let rows = replicate(seed, outer_reps, |i, rng| {
        let rec = simulate_cover(sampler, rng);
        let inner = seed.path(&[INNER_TAG, i as u64]);
        let xs: Vec<f64> = (0..inner_reps)
            .map(|j| cover_count_of(sampler, &rec.terminal, &mut inner.replicate(j as u64)) as f64)
            .collect();
        (rec.cover_count as f64, stats::mean(&xs), rec.terminal.len())
    });
    let c: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ct: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ratio = ratio_of(&c, &ct);

    let mut rng = seed.child(BOOTSTRAP_TAG).stream();
    let n = rows.len();
    let (mut bc, mut bt) = (vec![0.0; n], vec![0.0; n]);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for k in 0..n {
                let j = rng.random_range(0..n);
                bc[k] = c[j];
                bt[k] = ct[j];
            }
            ratio_of(&bc, &bt)
        })
        .collect();
    let ratio_se = stats::sample_variance(&boot).sqrt();
    boot.sort_by(f64::total_cmp);
    let q = |p: f64| boot[((boot.len() - 1) as f64 * p).round() as usize];
    let mean_cover = stats::mean(&c);
    Ok(KappaRatio {
        ratio,
        ratio_se,
        ratio_ci: (q(0.025), q(0.975)),
        mean_cover,
        normalized_var: stats::sample_variance(&c) / (mean_cover * mean_cover),
        mean_terminal_cost: stats::mean(&ct),
        outer_reps,
        inner_reps,
        records: rows.iter().map(|r| (r.0 as u64, r.2)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainKind {
    /// State = number of missing coupons out of `n`; draws at total rate 1.
    Coupon { n: usize },
    /// Class-1 draws with probability `p` (uniform over `n1`), class-2
    /// otherwise (uniform over `n2`); state = missing counts per class.
    TwoRateCoupon { n1: usize, n2: usize, p: f64 },
}

/// A continuous-time chain on a finite state space with an absorbing
/// target, together with exact hitting-time moments.
#[derive(Clone, Debug)]
pub struct MonotoneChain {
    pub kind: ChainKind,
    /// Outgoing `(state, rate)` pairs; empty on the target.
    transitions: Vec<Vec<(usize, f64)>>,
    pub start: usize,
    /// `h(x) = E_x T`.
    pub h: Vec<f64>,
    /// `E_x T^2`.
    pub second_moment: Vec<f64>,
}

impl MonotoneChain {
    pub fn coupon(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("coupon chain needs n >= 1"));
        }
        let transitions = (0..=n)
            .map(|j| {
                if j == 0 {
                    vec![]
                } else {
                    vec![(j - 1, j as f64 / n as f64)]
                }
            })
            .collect();
        Self::build(ChainKind::Coupon { n }, transitions, n)
    }

    pub fn two_rate(n1: usize, n2: usize, p: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 || !(p > 0.0 && p < 1.0) {
            return Err(invalid("two-rate chain needs n1, n2 >= 1 and 0 < p < 1"));
        }
        let idx = |a: usize, b: usize| a * (n2 + 1) + b;
        let mut transitions = vec![vec![]; (n1 + 1) * (n2 + 1)];
        for a in 0..=n1 {
            for b in 0..=n2 {
                let t = &mut transitions[idx(a, b)];
                if a > 0 {
                    t.push((idx(a - 1, b), p * a as f64 / n1 as f64));
                }
                if b > 0 {
                    t.push((idx(a, b - 1), (1.0 - p) * b as f64 / n2 as f64));
                }
            }
        }
        Self::build(ChainKind::TwoRateCoupon { n1, n2, p }, transitions, idx(n1, n2))
    }

    /// States are numbered so every transition decreases the index, which
    /// lets the moments be filled in one pass.
    fn build(kind: ChainKind, transitions: Vec<Vec<(usize, f64)>>, start: usize) -> Result<Self> {
        let k = transitions.len();
        let mut h = vec![0.0; k];
        let mut m2 = vec![0.0; k];
        for x in 0..k {
            let out = &transitions[x];
            if out.is_empty() {
                continue;
            }
            let q: f64 = out.iter().map(|t| t.1).sum();
            let eh: f64 = out.iter().map(|&(y, r)| r / q * h[y]).sum();
            let em2: f64 = out.iter().map(|&(y, r)| r / q * m2[y]).sum();
            h[x] = 1.0 / q + eh;
            m2[x] = 2.0 / (q * q) + 2.0 / q * eh + em2;
        }
        let chain = MonotoneChain {
            kind,
            transitions,
            start,
            h,
            second_moment: m2,
        };
        chain.validate()?;
        Ok(chain)
    }

    /// `h` is zero exactly on the target and nonincreasing along every
    /// possible transition.
    pub fn validate(&self) -> Result<()> {
        for (x, out) in self.transitions.iter().enumerate() {
            if out.is_empty() != (self.h[x] == 0.0) {
                return Err(invalid(format!("h vanishes off the target at state {x}")));
            }
            if let Some(&(y, _)) = out.iter().find(|&&(y, _)| self.h[y] > self.h[x]) {
                return Err(invalid(format!("h increases along transition {x} -> {y}")));
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.h[self.start]
    }

    pub fn variance(&self) -> f64 {
        self.second_moment[self.start] - self.mean().powi(2)
    }

    /// Largest `h(x) - h(y)` over possible transitions `x -> y`.
    pub fn max_drop(&self) -> f64 {
        self.transitions
            .iter()
            .enumerate()
            .flat_map(|(x, out)| out.iter().map(move |&(y, _)| self.h[x] - self.h[y]))
            .fold(0.0, f64::max)
    }

    /// One hitting time from the start state.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut x = self.start;
        let mut t = 0.0;
        loop {
            let out = &self.transitions[x];
            if out.is_empty() {
                return t;
            }
            let q: f64 = out.iter().map(|o| o.1).sum();
            t += Exp::new(q).expect("positive rate").sample(rng);
            let mut u = rng.random::<f64>() * q;
            x = out[out.len() - 1].0;
            for &(y, r) in out {
                if u < r {
                    x = y;
                    break;
                }
                u -= r;
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    pub kind: ChainKind,
    pub exact_mean: f64,
    pub exact_var: f64,
    pub max_drop: f64,
    pub stats: CoverStats,
    /// `var T / E T <= max drop` using the simulated ratio.
    pub report: BoundReport,
}

pub fn monotone_chain_check(chain: &MonotoneChain, reps: usize, seed: Seed) -> Result<ChainCheck> {
    chain.validate()?;
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let ts = replicate(seed, reps, |_, rng| chain.simulate(rng));
    let stats = CoverStats::from_samples(ts, seed);
    let lhs = stats.variance / stats.mean;
    let se = stats.normalized_var_se * stats.mean;
    let report = BoundReport::compare(
        "monotone chain variance",
        lhs,
        se,
        chain.max_drop(),
        &[("exact_ratio", chain.variance() / chain.mean()), ("reps", reps as f64)],
    );
    Ok(ChainCheck {
        kind: chain.kind,
        exact_mean: chain.mean(),
        exact_var: chain.variance(),
        max_drop: chain.max_drop(),
        stats,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{coupon_mean, Verdict};
    use crate::numerics::harmonic;
    use proptest::prelude::*;

    #[test]
    fn trivial_samplers() {
        let one = SubsetSampler::uniform_singleton(1).unwrap();
        let rec = simulate_cover(&one, &mut Seed(0).stream());
        assert_eq!(
            rec,
            TerminalRecord {
                cover_count: 1,
                terminal: vec![0]
            }
        );
        let full = SubsetSampler::cyclic_arc(7, 7).unwrap();
        let mut rng = Seed(1).stream();
        for _ in 0..20 {
            let rec = simulate_cover(&full, &mut rng);
            assert_eq!(rec.cover_count, 1);
            assert_eq!(rec.terminal, (0..7).collect::<Vec<_>>());
        }
        assert!(SubsetSampler::random_k_subset(3, 4).is_err());
        assert!(SubsetSampler::cyclic_arc(3, 0).is_err());
    }

    #[test]
    fn uniform_singleton_coupon_mean() {
        let s = SubsetSampler::uniform_singleton(100).unwrap();
        let xs = replicate(Seed(5), 10_000, |_, rng| simulate_cover(&s, rng).cover_count as f64);
        let m = stats::mean(&xs);
        assert!((m - coupon_mean(100)).abs() / coupon_mean(100) < 0.02);
    }

    #[test]
    fn c_of_b_examples() {
        let s = SubsetSampler::uniform_singleton(10).unwrap();
        let e = estimate_c_of_b(&s, &[3], 20_000, Seed(1)).unwrap();
        assert!((e.mean - 10.0).abs() < 3.0 * e.se);
        let e = estimate_c_of_b(&s, &[2, 7], 20_000, Seed(2)).unwrap();
        assert!((e.mean - 15.0).abs() < 3.0 * e.se, "{e:?}");
        let e = estimate_c_of_b(&s, &(0..10).collect::<Vec<_>>(), 20_000, Seed(3)).unwrap();
        assert!((e.mean - 10.0 * harmonic(10)).abs() < 3.0 * e.se);
        assert!(estimate_c_of_b(&s, &[], 10, Seed(0)).is_err());
        assert!(estimate_c_of_b(&s, &[10], 10, Seed(0)).is_err());
    }

    #[test]
    fn c_of_b_is_monotone_under_inclusion() {
        let s = SubsetSampler::cyclic_arc(30, 3).unwrap();
        let small = estimate_c_of_b(&s, &[0, 10], 5000, Seed(9)).unwrap();
        let big = estimate_c_of_b(&s, &[0, 10, 20], 5000, Seed(9)).unwrap();
        assert!(big.mean >= small.mean);
    }

    #[test]
    fn terminal_set_is_last_first_coverage() {
        let s = SubsetSampler::random_k_subset(12, 3).unwrap();
        let mut rng = Seed(4).stream();
        for _ in 0..200 {
            let mut replay = rng.clone();
            let rec = simulate_cover(&s, &mut rng);
            // replay the draws and record the index at which each point is first hit
            let mut first = [0u64; 12];
            let mut buf = Vec::new();
            for n in 1..=rec.cover_count {
                s.draw_into(&mut replay, &mut buf);
                for &x in &buf {
                    if first[x] == 0 {
                        first[x] = n;
                    }
                }
            }
            let last: Vec<usize> = (0..12).filter(|&x| first[x] == rec.cover_count).collect();
            assert_eq!(rec.terminal, last);
            assert!(first.iter().all(|&f| f > 0));
        }
    }

    #[test]
    fn metric_ball_positivity() {
        let fm = FiniteMetric::equilateral(5, 1.0).unwrap();
        let mu = SeedDistribution::atoms(vec![(Point::Index(0), 1.0)]).unwrap();
        assert!(SubsetSampler::metric_ball(fm.clone(), 0.5, mu.clone()).is_err());
        let s = SubsetSampler::metric_ball(fm, 1.0, mu).unwrap();
        assert_eq!(simulate_cover(&s, &mut Seed(0).stream()).cover_count, 1);
    }

    #[test]
    fn kappa_ratio_examples() {
        let full = SubsetSampler::cyclic_arc(10, 10).unwrap();
        assert_eq!(kappa_ratio(&full, 50, 5, Seed(0)).unwrap().ratio, 0.0);
        let s = SubsetSampler::uniform_singleton(20).unwrap();
        let k = kappa_ratio(&s, 2000, 50, Seed(1)).unwrap();
        assert!(k.ratio.is_finite() && k.ratio > 0.0 && k.ratio < 10.0, "{k:?}");
        assert!(k.ratio_ci.0 <= k.ratio && k.ratio <= k.ratio_ci.1);
        // the terminal set of a singleton sampler is one point, costing m on average
        assert!((k.mean_terminal_cost - 20.0).abs() < 1.0);
    }

    #[test]
    fn coupon_chain_exact_moments() {
        let c = MonotoneChain::coupon(50).unwrap();
        let n = 50.0;
        let s2: f64 = (1..=50).map(|k| 1.0 / (k * k) as f64).sum();
        assert!((c.mean() - n * harmonic(50)).abs() < 1e-9);
        assert!((c.variance() - n * n * s2).abs() < 1e-6);
        assert!((c.max_drop() - n).abs() < 1e-12);
        assert!((c.variance() / c.mean() - 18.06).abs() < 0.01);
        let one = MonotoneChain::coupon(1).unwrap();
        assert!((one.variance() / one.mean() - 1.0).abs() < 1e-12);
        assert!((one.max_drop() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_rate_reduces_to_coupon_when_symmetric() {
        // classes of equal size with p = 1/2 are one class of size n1 + n2
        let two = MonotoneChain::two_rate(4, 4, 0.5).unwrap();
        let one = MonotoneChain::coupon(8).unwrap();
        assert!((two.mean() - one.mean()).abs() < 1e-12);
        assert!((two.variance() - one.variance()).abs() < 1e-9);
    }

    #[test]
    fn coupon_chain_simulation() {
        let c = MonotoneChain::coupon(20).unwrap();
        let check = monotone_chain_check(&c, 50_000, Seed(3)).unwrap();
        assert!((check.stats.variance - c.variance()).abs() / c.variance() < 0.05);
        assert_ne!(check.report.verdict, Verdict::Violated);
        let two = MonotoneChain::two_rate(5, 20, 0.3).unwrap();
        let check = monotone_chain_check(&two, 50_000, Seed(4)).unwrap();
        assert!((check.stats.mean - two.mean()).abs() < 3.0 * check.stats.se_mean);
        assert_ne!(check.report.verdict, Verdict::Violated);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn two_rate_tables_are_monotone(n1 in 1usize..8, n2 in 1usize..8, p in 0.01..0.99f64) {
            let c = MonotoneChain::two_rate(n1, n2, p).unwrap();
            prop_assert!(c.validate().is_ok());
            prop_assert!(c.variance() / c.mean() <= c.max_drop() + 1e-9);
        }

        #[test]
        fn union_only_grows(seed in any::<u64>(), k in 1usize..6) {
            let s = SubsetSampler::cyclic_arc(15, k).unwrap();
            let rec = simulate_cover(&s, &mut Seed(seed).stream());
            prop_assert!(!rec.terminal.is_empty());
            prop_assert!(rec.cover_count as usize >= 15usize.div_ceil(k));
        }
    }
}
