//! The fixed-radius model: i.i.d. centers drawn from `mu`, each contributing
//! the closed ball of radius `r0`; the cover count is the number of balls
//! needed before their union is the whole space.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, CoverError, Result};
use crate::rng::{try_replicate, Seed};
use crate::spaces::{Point, SeedDistribution, Space};
use crate::stats::CoverStats;

#[derive(Clone, Debug)]
pub struct FixedRadiusConfig {
    pub space: Space,
    pub mu: SeedDistribution,
    pub r0: f64,
}

impl FixedRadiusConfig {
    /// Rejects `r0 <= 0` and seed laws whose support cannot cover the
    /// space at radius `r0` (the cover count would be infinite).
    pub fn new(space: Space, mu: SeedDistribution, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid(format!("r0 must be positive, got {r0}")));
        }
        mu.validate(&space)?;
        if !mu.can_cover(&space, r0) {
            return Err(CoverError::NotCoverable(format!(
                "radius-{r0} balls around the support of mu miss part of the {}",
                space.kind()
            )));
        }
        Ok(FixedRadiusConfig { space, mu, r0 })
    }
}

/// Total order on floats for ordered sets.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Incremental coverage state for one realization.
///
/// On a circle the union of closed arcs of radius `r0` is the whole circle
/// iff every gap between cyclically adjacent centers is at most `2 r0`. The
/// tracker keeps the sorted centers and a count of oversized gaps, so each
/// insertion costs `O(log n)`. A segment is handled the same way with
/// virtual centers at `-r0` and `L + r0`. Finite metrics keep per-point
/// covered flags.
#[derive(Clone, Debug)]
pub struct CoverTracker(Tracker);

#[derive(Clone, Debug)]
enum Tracker {
    Gaps {
        circular: bool,
        length: f64,
        max_gap: f64,
        centers: BTreeSet<Key>,
        bad: usize,
    },
    Flags {
        covered: Vec<bool>,
        remaining: usize,
    },
}

impl CoverTracker {
    pub fn new(space: &Space, r0: f64) -> Result<Self> {
        Ok(CoverTracker(match space {
            Space::Circle { circumference } => Tracker::Gaps {
                circular: true,
                length: *circumference,
                max_gap: 2.0 * r0,
                centers: BTreeSet::new(),
                bad: 0,
            },
            Space::Segment { length } => Tracker::Gaps {
                circular: false,
                length: *length,
                max_gap: 2.0 * r0,
                centers: [Key(-r0), Key(length + r0)].into_iter().collect(),
                bad: 1,
            },
            Space::FiniteMetric(fm) => Tracker::Flags {
                covered: vec![false; fm.len()],
                remaining: fm.len(),
            },
            _ => {
                return Err(CoverError::Unsupported {
                    op: "exact cover count",
                    space: space.kind(),
                })
            }
        }))
    }

    pub fn is_covered(&self) -> bool {
        match &self.0 {
            Tracker::Gaps { centers, bad, .. } => *bad == 0 && !centers.is_empty(),
            Tracker::Flags { remaining, .. } => *remaining == 0,
        }
    }

    /// Add the ball around `p`; returns whether the space is now covered.
    pub fn insert(&mut self, space: &Space, r0: f64, p: &Point) -> bool {
        match &mut self.0 {
            Tracker::Gaps {
                circular,
                length,
                max_gap,
                centers,
                bad,
            } => {
                let x = p.pos().expect("1-D point");
                let key = Key(x);
                if centers.contains(&key) {
                    return *bad == 0;
                }
                let l = *length;
                if centers.is_empty() {
                    centers.insert(key);
                    *bad = usize::from(l > *max_gap);
                    return *bad == 0;
                }
                let pred = centers.range(..key).next_back().or_else(|| centers.iter().next_back());
                let succ = centers.range(key..).next().or_else(|| centers.iter().next());
                let (p0, q0) = (pred.unwrap().0, succ.unwrap().0);
                let span = |a: f64, b: f64| if *circular { (b - a).rem_euclid(l) } else { b - a };
                let old = if *circular && p0 == q0 { l } else { span(p0, q0) };
                let is_bad = |g: f64| usize::from(g > *max_gap);
                *bad = *bad - is_bad(old) + is_bad(span(p0, x)) + is_bad(span(x, q0));
                centers.insert(key);
                *bad == 0
            }
            Tracker::Flags { covered, remaining } => {
                for (j, c) in covered.iter_mut().enumerate() {
                    if !*c && space.dist(p, &Point::Index(j)) <= r0 {
                        *c = true;
                        *remaining -= 1;
                    }
                }
                *remaining == 0
            }
        }
    }
}

/// Exact cover count `C = min{n : ball(s_1, r0) u ... u ball(s_n, r0) = S}`
/// on circles, segments and finite metrics.
pub fn simulate_cover_count<R: Rng + ?Sized>(cfg: &FixedRadiusConfig, rng: &mut R) -> Result<u64> {
    let mut tracker = CoverTracker::new(&cfg.space, cfg.r0)?;
    let mut n = 0u64;
    loop {
        n += 1;
        let p = cfg.space.sample(&cfg.mu, rng);
        if tracker.insert(&cfg.space, cfg.r0, &p) {
            return Ok(n);
        }
    }
}

/// Cover counts of an eps-net at radius `r0` (lower) and `r0 - eps` (upper).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverCountBracket {
    pub lower: u64,
    pub upper: u64,
    pub eps: f64,
}

/// Bracket the cover count on any space from one stream of centers.
///
/// Covering the net at radius `r0` is necessary for covering the space;
/// covering it at `r0 - eps` is sufficient because every point lies within
/// `eps` of a net point. Both counts come from the same centers, so
/// `lower <= C <= upper` holds pathwise.
pub fn cover_count_bracket<R: Rng + ?Sized>(
    cfg: &FixedRadiusConfig,
    eps: f64,
    rng: &mut R,
) -> Result<CoverCountBracket> {
    if !(eps > 0.0 && eps < cfg.r0) {
        return Err(invalid(format!("bracket mesh must lie in (0, r0), got {eps}")));
    }
    let net = cfg.space.epsilon_net(eps)?;
    let inner = cfg.r0 - eps;
    if let Some(atoms) = cfg.mu.atom_list() {
        if matches!(cfg.mu, SeedDistribution::Atoms(_)) {
            let reachable = net
                .points
                .iter()
                .all(|q| atoms.iter().any(|(p, w)| w > 0.0 && cfg.space.dist(p, q) <= inner));
            if !reachable {
                return Err(CoverError::NotCoverable(format!(
                    "some net point is farther than r0 - eps = {inner} from every atom"
                )));
            }
        }
    }
    let k = net.points.len();
    let mut outer_left = vec![true; k];
    let mut inner_left = vec![true; k];
    let (mut n_outer, mut n_inner) = (k, k);
    let mut lower = None;
    let mut n = 0u64;
    loop {
        n += 1;
        let c = cfg.space.sample(&cfg.mu, rng);
        for (i, q) in net.points.iter().enumerate() {
            if !outer_left[i] && !inner_left[i] {
                continue;
            }
            let d = cfg.space.dist(&c, q);
            if outer_left[i] && d <= cfg.r0 {
                outer_left[i] = false;
                n_outer -= 1;
            }
            if inner_left[i] && d <= inner {
                inner_left[i] = false;
                n_inner -= 1;
            }
        }
        if lower.is_none() && n_outer == 0 {
            lower = Some(n);
        }
        if n_inner == 0 {
            return Ok(CoverCountBracket {
                lower: lower.unwrap_or(n),
                upper: n,
                eps,
            });
        }
    }
}

/// Cover counts for replicates `0..reps`, replicate `i` using the stream
/// derived from `(seed, i)`.
pub fn cover_counts(cfg: &FixedRadiusConfig, reps: usize, seed: Seed) -> Result<Vec<u64>> {
    try_replicate(seed, reps, |_, rng| simulate_cover_count(cfg, rng))
}

/// Replicated cover counts summarised with bootstrap intervals.
pub fn estimate_cover_stats(cfg: &FixedRadiusConfig, reps: usize, seed: Seed) -> Result<CoverStats> {
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let counts = cover_counts(cfg, reps, seed)?;
    Ok(CoverStats::from_samples(
        counts.into_iter().map(|c| c as f64).collect(),
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::harmonic;
    use crate::spaces::FiniteMetric;
    use proptest::prelude::*;

    fn circle_cfg(l: f64, r0: f64) -> FixedRadiusConfig {
        FixedRadiusConfig::new(Space::circle(l).unwrap(), SeedDistribution::Uniform, r0).unwrap()
    }

    fn coupon_cfg(m: usize) -> FixedRadiusConfig {
        let space = Space::FiniteMetric(FiniteMetric::equilateral(m, 1.0).unwrap());
        let mu = SeedDistribution::uniform_atoms((0..m).map(Point::Index).collect()).unwrap();
        FixedRadiusConfig::new(space, mu, 0.5).unwrap()
    }

    /// Post-hoc oracle: sort the first `n` centers and test every gap.
    fn covered_posthoc(circular: bool, l: f64, r0: f64, centers: &[f64]) -> bool {
        let mut xs = centers.to_vec();
        xs.sort_by(f64::total_cmp);
        if circular {
            let wrap = xs[0] + l - xs[xs.len() - 1];
            wrap <= 2.0 * r0 && xs.windows(2).all(|w| w[1] - w[0] <= 2.0 * r0)
        } else {
            xs[0] <= r0 && xs[xs.len() - 1] >= l - r0 && xs.windows(2).all(|w| w[1] - w[0] <= 2.0 * r0)
        }
    }

    #[test]
    fn one_ball_covers_small_circle() {
        let mu = SeedDistribution::atoms(vec![(Point::Pos(0.3), 1.0)]).unwrap();
        let cfg = FixedRadiusConfig::new(Space::circle(1.0).unwrap(), mu, 0.5).unwrap();
        let mut rng = Seed(1).stream();
        assert_eq!(simulate_cover_count(&cfg, &mut rng).unwrap(), 1);
        let cfg = circle_cfg(1.0, 0.7);
        assert_eq!(simulate_cover_count(&cfg, &mut rng).unwrap(), 1);
    }

    #[test]
    fn unsupported_and_uncoverable_configs() {
        let torus = Space::torus(2.0, 2.0).unwrap();
        let cfg = FixedRadiusConfig::new(torus, SeedDistribution::Uniform, 0.5).unwrap();
        assert!(matches!(
            simulate_cover_count(&cfg, &mut Seed(0).stream()),
            Err(CoverError::Unsupported { .. })
        ));
        let mu = SeedDistribution::atoms(vec![(Point::Pos(0.0), 0.5), (Point::Pos(10.0), 0.5)]).unwrap();
        assert!(matches!(
            FixedRadiusConfig::new(Space::segment(10.0).unwrap(), mu, 1.0),
            Err(CoverError::NotCoverable(_))
        ));
        assert!(FixedRadiusConfig::new(Space::circle(1.0).unwrap(), SeedDistribution::Uniform, 0.0).is_err());
    }

    #[test]
    fn incremental_matches_posthoc_scan() {
        for (space, circular) in [
            (Space::circle(10.0).unwrap(), true),
            (Space::segment(10.0).unwrap(), false),
        ] {
            let r0 = 0.8;
            let l = 10.0;
            let mut rng = Seed(5).stream();
            for _ in 0..300 {
                let mut tracker = CoverTracker::new(&space, r0).unwrap();
                let mut centers = Vec::new();
                loop {
                    let p = space.sample_uniform(&mut rng);
                    centers.push(p.pos().unwrap());
                    let inc = tracker.insert(&space, r0, &p);
                    assert_eq!(inc, covered_posthoc(circular, l, r0, &centers));
                    if inc {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn evenly_spaced_atoms_tile_exactly() {
        // closed arcs of length 1 at integer points tile a circle of length 20
        let space = Space::circle(20.0).unwrap();
        let mut t = CoverTracker::new(&space, 0.5).unwrap();
        for i in 0..19 {
            assert!(!t.insert(&space, 0.5, &Point::Pos(i as f64)));
        }
        assert!(t.insert(&space, 0.5, &Point::Pos(19.0)));
    }

    /// Exhaustive coupon-collector CDF `Pr(C <= n)` by inclusion–exclusion.
    fn coupon_cdf(m: usize, n: u64) -> f64 {
        let mut s = 0.0;
        let mut binom = 1.0;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * (1.0 - j as f64 / m as f64).powi(n as i32);
            binom *= (m - j) as f64 / (j + 1) as f64;
        }
        s
    }

    #[test]
    fn coupon_reduction_cdf_small_m() {
        for m in [3usize, 6] {
            let cfg = coupon_cfg(m);
            let counts = cover_counts(&cfg, 20_000, Seed(m as u64)).unwrap();
            let sorted = crate::stats::sorted(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
            let worst = (m as u64..(6 * m) as u64)
                .map(|n| (crate::stats::empirical_cdf(&sorted, n as f64) - coupon_cdf(m, n)).abs())
                .fold(0.0, f64::max);
            assert!(worst < 0.02, "m={m} worst CDF gap {worst}");
        }
    }

    #[test]
    fn coupon_mean_and_variance_m100() {
        let m = 100;
        let cfg = coupon_cfg(m);
        let stats = estimate_cover_stats(&cfg, 10_000, Seed(77)).unwrap();
        let mean = m as f64 * harmonic(m as u64);
        assert!((stats.mean - mean).abs() / mean < 0.02);
        // exact variance sum_k (1 - p_k) / p_k^2 with p_k = k / m
        let var: f64 = (1..=m)
            .map(|k| {
                let p = k as f64 / m as f64;
                (1.0 - p) / (p * p)
            })
            .sum();
        assert!((stats.variance - var).abs() / var < 0.05, "{} vs {var}", stats.variance);
    }

    #[test]
    fn degenerate_atom_with_large_radius() {
        let mu = SeedDistribution::atoms(vec![(Point::Pos(2.0), 1.0)]).unwrap();
        let cfg = FixedRadiusConfig::new(Space::segment(3.0).unwrap(), mu, 3.0).unwrap();
        let s = estimate_cover_stats(&cfg, 50, Seed(1)).unwrap();
        assert_eq!((s.mean, s.variance), (1.0, 0.0));
    }

    /// Dense-grid oracle: first ball index covering each grid point, maxed.
    fn grid_cover_count(l: f64, r0: f64, centers: &[f64], mesh: f64) -> Option<usize> {
        let n = (l / mesh).round() as usize;
        let mut first = vec![usize::MAX; n];
        let mut left = n;
        for (i, &c) in centers.iter().enumerate() {
            let lo = ((c - r0) / mesh).ceil() as i64;
            let hi = ((c + r0) / mesh).floor() as i64;
            for g in lo..=hi {
                let j = g.rem_euclid(n as i64) as usize;
                if first[j] == usize::MAX {
                    first[j] = i + 1;
                    left -= 1;
                }
            }
            if left == 0 {
                return Some(i + 1);
            }
        }
        None
    }

    #[test]
    fn circle_mean_matches_dense_grid_oracle() {
        let (l, r0) = (10.0, 1.0);
        let cfg = circle_cfg(l, r0);
        let space = cfg.space.clone();
        let reps = 1000;
        let mut exact_sum = 0.0;
        let mut grid_sum = 0.0;
        for i in 0..reps {
            let seed = Seed(2024).child(i);
            let c = simulate_cover_count(&cfg, &mut seed.stream()).unwrap();
            let mut rng = seed.stream();
            let centers: Vec<f64> = (0..c + 50)
                .map(|_| space.sample_uniform(&mut rng).pos().unwrap())
                .collect();
            let g = grid_cover_count(l, r0, &centers, 1e-4).unwrap();
            exact_sum += c as f64;
            grid_sum += g as f64;
        }
        let rel = (exact_sum - grid_sum).abs() / exact_sum;
        assert!(rel < 0.01, "exact {exact_sum} grid {grid_sum}");
    }

    #[test]
    fn bracket_contains_exact_count() {
        let cfg = circle_cfg(10.0, 0.6);
        for i in 0..1000 {
            let seed = Seed(99).child(i);
            let c = simulate_cover_count(&cfg, &mut seed.stream()).unwrap();
            let b = cover_count_bracket(&cfg, cfg.r0 / 10.0, &mut seed.stream()).unwrap();
            assert!(b.lower <= c && c <= b.upper, "{b:?} vs {c}");
        }
    }

    #[test]
    fn bracket_is_exact_on_finite_net() {
        let cfg = coupon_cfg(8);
        for i in 0..200 {
            let seed = Seed(3).child(i);
            let c = simulate_cover_count(&cfg, &mut seed.stream()).unwrap();
            let b = cover_count_bracket(&cfg, 1e-6, &mut seed.stream()).unwrap();
            assert_eq!((b.lower, b.upper), (c, c));
        }
    }

    #[test]
    fn bracket_on_torus_and_large_radius() {
        let torus = Space::torus(3.0, 2.0).unwrap();
        let delta = torus.diameter();
        let cfg = FixedRadiusConfig::new(torus, SeedDistribution::Uniform, delta + 0.1).unwrap();
        let b = cover_count_bracket(&cfg, 0.05, &mut Seed(1).stream()).unwrap();
        assert_eq!(b.upper, 1);
        assert!(cover_count_bracket(&cfg, cfg.r0, &mut Seed(1).stream()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn adding_balls_never_uncovers(seed in any::<u64>(), r0 in 0.3..3.0f64) {
            let space = Space::circle(10.0).unwrap();
            let mut t = CoverTracker::new(&space, r0).unwrap();
            let mut rng = Seed(seed).stream();
            let mut was = false;
            for _ in 0..200 {
                let now = t.insert(&space, r0, &space.sample_uniform(&mut rng));
                prop_assert!(!was || now);
                was = now;
            }
        }
    }
}
