//! The growth model: seeds arrive at the times of a Poisson process of rate
//! `lambda`, at i.i.d. positions drawn from `mu`, and each grows a ball at
//! speed `v`. The covered set at time `t` is the union of
//! `ball(sigma_i, v (t - tau_i))` over arrivals with `tau_i <= t`.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, CoverError, Result};
use crate::numerics::{adaptive_simpson_piecewise, QUAD_REL_TOL};
use crate::rng::{try_replicate, Seed};
use crate::spaces::{Net, Point, SeedDistribution, Space};
use crate::stats::{CoverStats, Estimate};

/// Tail values below this are treated as negligible when integrating.
pub const TAIL_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GrowthParams {
    pub space: Space,
    pub mu: SeedDistribution,
    pub lambda: f64,
    pub v: f64,
}

impl GrowthParams {
    pub fn new(space: Space, mu: SeedDistribution, lambda: f64, v: f64) -> Result<Self> {
        for (name, x) in [("lambda", lambda), ("v", v)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {x}")));
            }
        }
        mu.validate(&space)?;
        Ok(GrowthParams { space, mu, lambda, v })
    }

    /// `lambda = v = 1`.
    pub fn standardized(space: Space, mu: SeedDistribution) -> Result<Self> {
        Self::new(space, mu, 1.0, 1.0)
    }

    /// Time for one ball to reach every point, `Delta / v`.
    pub fn sweep_time(&self) -> f64 {
        self.space.diameter() / self.v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arrival {
    pub tau: f64,
    pub sigma: Point,
}

/// One sampled path: arrivals in increasing time order up to `horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRealization {
    pub arrivals: Vec<Arrival>,
    pub horizon: f64,
}

impl GrowthRealization {
    pub fn first_arrival(&self) -> Option<f64> {
        self.arrivals.first().map(|a| a.tau)
    }

    /// `N(t)`, the number of arrivals by time `t`.
    pub fn count_by(&self, t: f64) -> usize {
        self.arrivals.partition_point(|a| a.tau <= t)
    }

    /// The same path with arrival `i` deleted.
    pub fn without(&self, i: usize) -> GrowthRealization {
        let mut arrivals = self.arrivals.clone();
        arrivals.remove(i);
        GrowthRealization {
            arrivals,
            horizon: self.horizon,
        }
    }
}

fn arrivals_until<R: Rng + ?Sized>(params: &GrowthParams, first: f64, horizon: f64, rng: &mut R) -> Vec<Arrival> {
    let exp = Exp::new(params.lambda).expect("validated rate");
    let mut arrivals = Vec::new();
    let mut t = first;
    while t <= horizon {
        let sigma = params.space.sample(&params.mu, rng);
        arrivals.push(Arrival { tau: t, sigma });
        t += exp.sample(rng);
    }
    arrivals
}

/// Sample arrivals up to `tau_1 + Delta / v`. The first ball alone covers
/// the space by then, so the cover time depends only on these arrivals.
pub fn simulate_realization<R: Rng + ?Sized>(params: &GrowthParams, rng: &mut R) -> GrowthRealization {
    let exp = Exp::new(params.lambda).expect("validated rate");
    let first = exp.sample(rng);
    let horizon = first + params.sweep_time();
    GrowthRealization {
        arrivals: arrivals_until(params, first, horizon, rng),
        horizon,
    }
}

/// Sample all arrivals with `tau <= t_max`, for inspecting the covered set
/// at fixed times up to `t_max`.
pub fn simulate_until<R: Rng + ?Sized>(params: &GrowthParams, t_max: f64, rng: &mut R) -> GrowthRealization {
    let exp = Exp::new(params.lambda).expect("validated rate");
    let first = exp.sample(rng);
    GrowthRealization {
        arrivals: arrivals_until(params, first, t_max, rng),
        horizon: t_max,
    }
}

/// `C(s) = min_i (tau_i + d(s, sigma_i) / v)`; infinite with no arrivals.
pub fn point_cover_time(real: &GrowthRealization, space: &Space, s: &Point, v: f64) -> f64 {
    real.arrivals
        .iter()
        .map(|a| a.tau + space.dist(s, &a.sigma) / v)
        .fold(f64::INFINITY, f64::min)
}

/// The cover time and a last-covered point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverTime {
    pub time: f64,
    pub point: Point,
}

fn require_arrivals(real: &GrowthRealization) -> Result<()> {
    if real.arrivals.is_empty() {
        Err(invalid("realization has no arrivals"))
    } else {
        Ok(())
    }
}

/// `C = max_s min_i (tau_i + d(s, sigma_i) / v)` computed exactly.
///
/// On circles and segments the function `f(s) = C(s)` is the lower envelope
/// of tents with slopes `+-1/v`. Sorting the seed positions, its values at
/// the seeds follow from one forward and one backward relaxation pass (two
/// laps on a circle). Between adjacent seeds with gap `g` and seed values
/// `a`, `b` the envelope is `min(a + x/v, b + (g - x)/v)`, maximal at the
/// crossing with value `(a + b + g/v) / 2`. Segment endpoints are added as
/// candidates. On finite metrics the max-min is taken directly.
pub fn cover_time_exact(real: &GrowthRealization, space: &Space, v: f64) -> Result<CoverTime> {
    require_arrivals(real)?;
    match space {
        Space::Circle { circumference } => Ok(envelope_max_1d(real, *circumference, true, v)),
        Space::Segment { length } => Ok(envelope_max_1d(real, *length, false, v)),
        Space::FiniteMetric(fm) => Ok((0..fm.len())
            .map(|j| CoverTime {
                time: point_cover_time(real, space, &Point::Index(j), v),
                point: Point::Index(j),
            })
            .fold(None, |best: Option<CoverTime>, c| match best {
                Some(b) if b.time >= c.time => Some(b),
                _ => Some(c),
            })
            .expect("nonempty metric")),
        _ => Err(CoverError::Unsupported {
            op: "exact cover time",
            space: space.kind(),
        }),
    }
}

fn envelope_max_1d(real: &GrowthRealization, l: f64, circular: bool, v: f64) -> CoverTime {
    let mut seeds: Vec<(f64, f64)> = real
        .arrivals
        .iter()
        .map(|a| (a.sigma.pos().expect("1-D point"), a.tau))
        .collect();
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
    let m = seeds.len();
    let pos: Vec<f64> = seeds.iter().map(|s| s.0).collect();
    let tau: Vec<f64> = seeds.iter().map(|s| s.1).collect();
    let gap = |k: usize| {
        if k + 1 < m {
            pos[k + 1] - pos[k]
        } else {
            pos[0] + l - pos[m - 1]
        }
    };
    let laps = if circular { 2 * m } else { m };
    let mut f = tau.clone();
    let mut cur = f64::INFINITY;
    for step in 0..laps {
        let k = step % m;
        if step > 0 {
            cur += gap((k + m - 1) % m) / v;
        }
        cur = cur.min(tau[k]);
        f[k] = f[k].min(cur);
    }
    cur = f64::INFINITY;
    for step in 0..laps {
        let k = m - 1 - step % m;
        if step > 0 {
            cur += gap(k) / v;
        }
        cur = cur.min(tau[k]);
        f[k] = f[k].min(cur);
    }

    let mut best = if circular {
        CoverTime {
            time: f64::NEG_INFINITY,
            point: Point::Pos(pos[0]),
        }
    } else {
        let left = f[0] + pos[0] / v;
        let right = f[m - 1] + (l - pos[m - 1]) / v;
        if left >= right {
            CoverTime {
                time: left,
                point: Point::Pos(0.0),
            }
        } else {
            CoverTime {
                time: right,
                point: Point::Pos(l),
            }
        }
    };
    let arcs = if circular { m } else { m - 1 };
    for k in 0..arcs {
        let g = gap(k);
        let (a, b) = (f[k], f[(k + 1) % m]);
        let x = (0.5 * ((b - a) * v + g)).clamp(0.0, g);
        let value = (a + x / v).min(b + (g - x) / v);
        if value > best.time {
            let mut p = pos[k] + x;
            if circular && p >= l {
                p -= l;
            }
            best = CoverTime {
                time: value,
                point: Point::Pos(p),
            };
        }
    }
    best
}

/// Reference cover time by enumerating every pairwise tent crossing
/// (both arc sides on a circle) plus segment endpoints, evaluating the
/// envelope exactly at each candidate. Cubic in the number of arrivals.
pub fn cover_time_all_pairs(real: &GrowthRealization, space: &Space, v: f64) -> Result<f64> {
    require_arrivals(real)?;
    let (l, circular) = match space {
        Space::Circle { circumference } => (*circumference, true),
        Space::Segment { length } => (*length, false),
        _ => return cover_time_exact(real, space, v).map(|c| c.time),
    };
    let mut candidates = Vec::new();
    if !circular {
        candidates.extend([0.0, l]);
    }
    for aj in &real.arrivals {
        for ak in &real.arrivals {
            let (pj, pk) = (aj.sigma.pos().unwrap(), ak.sigma.pos().unwrap());
            // arc running in the positive direction from sigma_j to sigma_k
            let g = if circular {
                let g = (pk - pj).rem_euclid(l);
                if g == 0.0 {
                    l
                } else {
                    g
                }
            } else if pk >= pj {
                pk - pj
            } else {
                continue;
            };
            let x = 0.5 * ((ak.tau - aj.tau) * v + g);
            if (0.0..=g).contains(&x) {
                let p = pj + x;
                candidates.push(if circular { p.rem_euclid(l) } else { p });
            }
        }
    }
    Ok(candidates
        .into_iter()
        .map(|p| point_cover_time(real, space, &Point::Pos(p), v))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `max_q C(q)` over a net; `C_net <= C <= C_net + mesh / v` because
/// `s -> C(s)` is `1/v`-Lipschitz.
pub fn cover_time_net(real: &GrowthRealization, space: &Space, net: &Net, v: f64) -> Result<CoverTime> {
    if net.points.is_empty() {
        return Err(invalid("empty net"));
    }
    let mut best = CoverTime {
        time: f64::NEG_INFINITY,
        point: net.points[0],
    };
    for q in &net.points {
        let t = point_cover_time(real, space, q, v);
        if t > best.time {
            best = CoverTime { time: t, point: *q };
        }
    }
    Ok(best)
}

/// `Pr(C(s) > t) = exp(-lambda int_0^t mu(ball(s, v u)) du)`.
pub fn point_tail_analytic(params: &GrowthParams, s: &Point, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("time must be nonnegative, got {t}")));
    }
    params.space.check_point(s)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let m = params.space.integrated_ball_measure(&params.mu, s, params.v * t)?;
    Ok((-params.lambda / params.v * m).exp())
}

/// `E C(s)` with its numerical error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointMean {
    pub value: f64,
    /// Bound on the neglected tail mass beyond the truncation time.
    pub truncation_error: f64,
}

/// `E C(s) = int_0^inf Pr(C(s) > t) dt`. Past `T = Delta / v` the ball has
/// full mass, so the tail decays exactly as `tail(T) e^{-lambda (t - T)}`
/// and contributes `tail(T) / lambda`. The integral on `[0, T]` runs panel
/// by panel and stops once the tail drops below `TAIL_CUTOFF`.
pub fn expected_point_cover_time(params: &GrowthParams, s: &Point) -> Result<PointMean> {
    params.space.check_point(s)?;
    let big_t = params.sweep_time();
    let tail = |t: f64| point_tail_analytic(params, s, t).unwrap_or(f64::NAN);
    let mut breaks: Vec<f64> = params
        .space
        .ball_measure_kinks(&params.mu, s)
        .into_iter()
        .map(|r| r / params.v)
        .filter(|&t| t > 0.0 && t < big_t)
        .collect();
    const PANELS: usize = 64;
    breaks.extend((1..PANELS).map(|i| big_t * i as f64 / PANELS as f64));
    breaks.push(big_t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut total = 0.0;
    let mut lo = 0.0;
    for &hi in &breaks {
        total += adaptive_simpson_piecewise(tail, lo, hi, &[], QUAD_REL_TOL)?;
        lo = hi;
        let th = tail(hi);
        if th < TAIL_CUTOFF {
            // tail is nonincreasing, so the rest is at most th * (T - hi + 1/lambda)
            return Ok(PointMean {
                value: total,
                truncation_error: th * (big_t - hi + 1.0 / params.lambda),
            });
        }
    }
    Ok(PointMean {
        value: total + tail(big_t) / params.lambda,
        truncation_error: 0.0,
    })
}

/// `c* = max_s E C(s)` evaluated over a net.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CStar {
    pub value: f64,
    pub argmax: Point,
    /// The true supremum is at most `value + lipschitz_slack`.
    pub lipschitz_slack: f64,
    pub quad_rel_tol: f64,
    pub truncation_error: f64,
}

pub fn c_star(params: &GrowthParams, net: &Net) -> Result<CStar> {
    if net.points.is_empty() {
        return Err(invalid("empty net"));
    }
    let means: Vec<PointMean> = net
        .points
        .par_iter()
        .map(|q| expected_point_cover_time(params, q))
        .collect::<Result<_>>()?;
    let (i, best) = means.iter().enumerate().fold(
        (0, means[0]),
        |(bi, b), (i, m)| if m.value > b.value { (i, *m) } else { (bi, b) },
    );
    Ok(CStar {
        value: best.value,
        argmax: net.points[i],
        lipschitz_slack: net.mesh / params.v,
        quad_rel_tol: QUAD_REL_TOL,
        truncation_error: means.iter().map(|m| m.truncation_error).fold(0.0, f64::max),
    })
}

/// Monte Carlo estimates of `E C(q)` for each point, all points sharing
/// each realization.
pub fn point_cover_means(params: &GrowthParams, points: &[Point], reps: usize, seed: Seed) -> Result<Vec<Estimate>> {
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    for q in points {
        params.space.check_point(q)?;
    }
    let rows = try_replicate(seed, reps, |_, rng| -> Result<Vec<f64>> {
        let real = simulate_realization(params, rng);
        Ok(points
            .iter()
            .map(|q| point_cover_time(&real, &params.space, q, params.v))
            .collect())
    })?;
    Ok((0..points.len())
        .map(|j| Estimate::from_samples(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect())
}

/// How the cover time of each realization is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoverMethod {
    Exact,
    /// Max over an `eps`-net: a lower bound within `eps / v`.
    Net {
        eps: f64,
    },
}

impl CoverMethod {
    /// Exact where available, otherwise a net with mesh `Delta / 200`.
    pub fn default_for(space: &Space) -> CoverMethod {
        if space.is_exact_kind() {
            CoverMethod::Exact
        } else {
            CoverMethod::Net {
                eps: space.diameter() / 200.0,
            }
        }
    }
}

/// A [`CoverMethod`] with its net built once.
#[derive(Clone, Debug)]
pub struct CoverEvaluator {
    net: Option<Net>,
}

impl CoverEvaluator {
    pub fn new(space: &Space, method: CoverMethod) -> Result<Self> {
        match method {
            CoverMethod::Exact if !space.is_exact_kind() => Err(CoverError::Unsupported {
                op: "exact cover time",
                space: space.kind(),
            }),
            CoverMethod::Exact => Ok(CoverEvaluator { net: None }),
            CoverMethod::Net { eps } => Ok(CoverEvaluator {
                net: Some(space.epsilon_net(eps)?),
            }),
        }
    }

    pub fn cover_time(&self, real: &GrowthRealization, space: &Space, v: f64) -> Result<CoverTime> {
        match &self.net {
            None => cover_time_exact(real, space, v),
            Some(net) => cover_time_net(real, space, net, v),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCoverStats {
    pub stats: CoverStats,
    pub method: CoverMethod,
    #[serde(skip)]
    pub first_arrivals: Vec<f64>,
    /// Per replicate `tau_1 + Delta / v`.
    #[serde(skip)]
    pub diameter_bounds: Vec<f64>,
}

impl GrowthCoverStats {
    /// Replicates violating `tau_1 <= C <= tau_1 + Delta / v`.
    pub fn pathwise_violations(&self) -> usize {
        self.stats
            .samples
            .iter()
            .zip(&self.first_arrivals)
            .zip(&self.diameter_bounds)
            .filter(|((c, t1), ub)| !(*c >= *t1 && *c <= *ub))
            .count()
    }
}

pub fn estimate_cover_stats(params: &GrowthParams, reps: usize, seed: Seed) -> Result<GrowthCoverStats> {
    estimate_cover_stats_with(params, CoverMethod::default_for(&params.space), reps, seed)
}

pub fn estimate_cover_stats_with(
    params: &GrowthParams,
    method: CoverMethod,
    reps: usize,
    seed: Seed,
) -> Result<GrowthCoverStats> {
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let eval = CoverEvaluator::new(&params.space, method)?;
    let span = params.sweep_time();
    let rows = try_replicate(seed, reps, |_, rng| -> Result<(f64, f64)> {
        let real = simulate_realization(params, rng);
        let c = eval.cover_time(&real, &params.space, params.v)?;
        Ok((c.time, real.first_arrival().expect("at least one arrival")))
    })?;
    let first_arrivals: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(GrowthCoverStats {
        stats: CoverStats::from_samples(rows.iter().map(|r| r.0).collect(), seed),
        method,
        diameter_bounds: first_arrivals.iter().map(|t| t + span).collect(),
        first_arrivals,
    })
}

/// Conversion between original and standardized units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StandardizedUnits {
    /// Original time per standardized time unit, `1 / lambda`.
    pub time_scale: f64,
    /// Original length per standardized length unit, `v / lambda`.
    pub length_scale: f64,
}

/// Rescale lengths by `lambda / v` and times by `lambda`, giving
/// `lambda' = v' = 1`. The standardized cover time is `lambda` times the
/// original one in law.
pub fn standardize(params: &GrowthParams) -> (GrowthParams, StandardizedUnits) {
    let factor = params.lambda / params.v;
    let std = GrowthParams {
        space: params.space.scaled(factor),
        mu: params.mu.scaled(factor),
        lambda: 1.0,
        v: 1.0,
    };
    (
        std,
        StandardizedUnits {
            time_scale: 1.0 / params.lambda,
            length_scale: params.v / params.lambda,
        },
    )
}

/// One CSV row per arrival: `replicate,tau,coord1,coord2`. Finite-metric
/// points write their index, graph points their edge and offset.
pub fn write_realizations_csv<W: Write>(out: W, reals: &[GrowthRealization]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "tau", "coord1", "coord2"])?;
    for (i, real) in reals.iter().enumerate() {
        for a in &real.arrivals {
            let (c1, c2) = match a.sigma {
                Point::Pos(x) => (format!("{x:.16e}"), String::new()),
                Point::Torus(x, y) => (format!("{x:.16e}"), format!("{y:.16e}")),
                Point::Index(j) => (j.to_string(), String::new()),
                Point::Edge { edge, offset } => (edge.to_string(), format!("{offset:.16e}")),
            };
            w.write_record([i.to_string(), format!("{:.16e}", a.tau), c1, c2])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
