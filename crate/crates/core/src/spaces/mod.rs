//! Compact metric spaces, seed distributions and the geometric quantities
//! the coverage bounds are phrased in: ball masses, `eta(r)`, covering
//! numbers, the doubling count `d(r)` and epsilon-nets.

pub mod finite;
pub mod graph;
pub mod setcover;
pub mod torus;

use rand::Rng;
use serde::Serialize;

pub use finite::FiniteMetric;
pub use graph::MetricGraph;

use crate::error::{invalid, CoverError, Result};
use crate::numerics::{adaptive_simpson_piecewise, QUAD_REL_TOL};

/// Largest finite metric on which covering problems are solved exactly.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// A point of some [`Space`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Point {
    /// Position along a circle or segment.
    Pos(f64),
    /// Coordinates in the torus fundamental domain.
    Torus(f64, f64),
    /// Index into a finite metric.
    Index(usize),
    /// Offset along an edge of a metric graph, measured from its first end.
    Edge { edge: usize, offset: f64 },
}

impl Point {
    fn kind(&self) -> &'static str {
        match self {
            Point::Pos(_) => "position",
            Point::Torus(..) => "torus",
            Point::Index(_) => "index",
            Point::Edge { .. } => "edge",
        }
    }

    pub fn pos(&self) -> Option<f64> {
        match *self {
            Point::Pos(x) => Some(x),
            _ => None,
        }
    }

    fn scaled(&self, c: f64) -> Point {
        match *self {
            Point::Pos(x) => Point::Pos(x * c),
            Point::Torus(x, y) => Point::Torus(x * c, y * c),
            Point::Index(i) => Point::Index(i),
            Point::Edge { edge, offset } => Point::Edge {
                edge,
                offset: offset * c,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Circle {
        circumference: f64,
    },
    Segment {
        length: f64,
    },
    /// Flat torus with the quotient Euclidean (geodesic) metric.
    FlatTorus {
        width: f64,
        height: f64,
    },
    FiniteMetric(FiniteMetric),
    MetricGraph(MetricGraph),
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

#[inline]
fn circle_dist(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).abs() % l;
    d.min(l - d)
}

impl Space {
    pub fn circle(circumference: f64) -> Result<Space> {
        Ok(Space::Circle {
            circumference: positive("circumference", circumference)?,
        })
    }

    pub fn segment(length: f64) -> Result<Space> {
        Ok(Space::Segment {
            length: positive("length", length)?,
        })
    }

    pub fn torus(width: f64, height: f64) -> Result<Space> {
        Ok(Space::FlatTorus {
            width: positive("width", width)?,
            height: positive("height", height)?,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Space::Circle { .. } => "circle",
            Space::Segment { .. } => "segment",
            Space::FlatTorus { .. } => "torus",
            Space::FiniteMetric(_) => "finite",
            Space::MetricGraph(_) => "graph",
        }
    }

    /// Circle, segment and finite metrics admit exact cover computations.
    pub fn is_exact_kind(&self) -> bool {
        matches!(
            self,
            Space::Circle { .. } | Space::Segment { .. } | Space::FiniteMetric(_)
        )
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let ok = match (self, *p) {
            (Space::Circle { circumference: l }, Point::Pos(x)) => (0.0..*l).contains(&x),
            (Space::Segment { length: l }, Point::Pos(x)) => (0.0..=*l).contains(&x),
            (Space::FlatTorus { width, height }, Point::Torus(x, y)) => {
                (0.0..*width).contains(&x) && (0.0..*height).contains(&y)
            }
            (Space::FiniteMetric(fm), Point::Index(i)) => i < fm.len(),
            (Space::MetricGraph(g), Point::Edge { edge, offset }) => {
                edge < g.edges().len() && (0.0..=g.edges()[edge].len).contains(&offset)
            }
            _ => {
                return Err(CoverError::SpaceMismatch {
                    space: self.kind(),
                    point: p.kind(),
                })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("{p:?} lies outside the {} domain", self.kind())))
        }
    }

    /// Metric distance; for a metric graph this is the shortest route length.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.dist(a, b))
    }

    /// Distance without membership checks. Points must belong to the space.
    #[inline]
    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        match (self, *a, *b) {
            (Space::Circle { circumference: l }, Point::Pos(x), Point::Pos(y)) => circle_dist(x, y, *l),
            (Space::Segment { .. }, Point::Pos(x), Point::Pos(y)) => (x - y).abs(),
            (Space::FlatTorus { width, height }, Point::Torus(x1, y1), Point::Torus(x2, y2)) => {
                circle_dist(x1, x2, *width).hypot(circle_dist(y1, y2, *height))
            }
            (Space::FiniteMetric(fm), Point::Index(i), Point::Index(j)) => fm.d(i, j),
            (Space::MetricGraph(g), Point::Edge { edge: e1, offset: o1 }, Point::Edge { edge: e2, offset: o2 }) => {
                g.distance(e1, o1, e2, o2)
            }
            _ => panic!(
                "point kinds {} / {} do not match {} space",
                a.kind(),
                b.kind(),
                self.kind()
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Circle { circumference } => 0.5 * circumference,
            Space::Segment { length } => *length,
            Space::FlatTorus { width, height } => (0.5 * width).hypot(0.5 * height),
            Space::FiniteMetric(fm) => fm.diameter(),
            Space::MetricGraph(g) => g.diameter(),
        }
    }

    /// A point drawn from the canonical uniform measure (length, area or
    /// counting measure). Consumes exactly one or two variates.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Space::Circle { circumference: l } => Point::Pos(rng.random::<f64>() * l),
            Space::Segment { length: l } => Point::Pos(rng.random::<f64>() * l),
            Space::FlatTorus { width, height } => {
                Point::Torus(rng.random::<f64>() * width, rng.random::<f64>() * height)
            }
            Space::FiniteMetric(fm) => {
                Point::Index(((rng.random::<f64>() * fm.len() as f64) as usize).min(fm.len() - 1))
            }
            Space::MetricGraph(g) => {
                let (edge, offset) = g.locate(rng.random::<f64>());
                Point::Edge { edge, offset }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, mu: &SeedDistribution, rng: &mut R) -> Point {
        match mu {
            SeedDistribution::Uniform => self.sample_uniform(rng),
            SeedDistribution::Atoms(a) => a.draw(rng),
            SeedDistribution::Mixture { atoms, atom_weight } => {
                if rng.random::<f64>() < *atom_weight {
                    atoms.draw(rng)
                } else {
                    self.sample_uniform(rng)
                }
            }
        }
    }

    /// Uniform-measure mass of the closed ball `ball(s, r)`.
    pub fn uniform_ball_measure(&self, s: &Point, r: f64) -> f64 {
        let m = match (self, *s) {
            (Space::Circle { circumference: l }, _) => 2.0 * r / l,
            (Space::Segment { length: l }, Point::Pos(p)) => ((p + r).min(*l) - (p - r).max(0.0)) / l,
            (Space::FlatTorus { width, height }, _) => torus::ball_area(*width, *height, r) / (width * height),
            (Space::FiniteMetric(fm), Point::Index(i)) => fm.ball(i, r).len() as f64 / fm.len() as f64,
            (Space::MetricGraph(g), Point::Edge { edge, offset }) => g.ball_length(edge, offset, r) / g.total_length(),
            _ => panic!("point kind {} does not match {} space", s.kind(), self.kind()),
        };
        m.clamp(0.0, 1.0)
    }

    fn atoms_ball_measure(&self, atoms: &Atoms, s: &Point, r: f64) -> f64 {
        atoms
            .iter()
            .filter(|(p, _)| self.dist(s, p) <= r)
            .map(|(_, w)| w)
            .sum::<f64>()
            .min(1.0)
    }

    /// `mu(ball(s, r))`, exact for every space and distribution kind.
    pub fn ball_measure(&self, mu: &SeedDistribution, s: &Point, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(invalid(format!("ball radius must be nonnegative, got {r}")));
        }
        self.check_point(s)?;
        Ok(self.ball_measure_unchecked(mu, s, r))
    }

    pub(crate) fn ball_measure_unchecked(&self, mu: &SeedDistribution, s: &Point, r: f64) -> f64 {
        let (wu, atoms, wa) = mu.parts();
        let mut m = 0.0;
        if wu > 0.0 {
            m += wu * self.uniform_ball_measure(s, r);
        }
        if let Some(a) = atoms {
            m += wa * self.atoms_ball_measure(a, s, r);
        }
        m.min(1.0)
    }

    /// `int_0^R mu(ball(s, r)) dr`. Closed form for circle, segment, finite
    /// spaces and atoms; adaptive Simpson across the known kinks otherwise.
    pub fn integrated_ball_measure(&self, mu: &SeedDistribution, s: &Point, big_r: f64) -> Result<f64> {
        let (wu, atoms, wa) = mu.parts();
        let mut total = 0.0;
        if let Some(a) = atoms {
            let part: f64 = a.iter().map(|(p, w)| w * (big_r - self.dist(s, p)).max(0.0)).sum();
            total += wa * part;
        }
        if wu > 0.0 {
            let u = match (self, *s) {
                (Space::Circle { circumference: l }, _) => {
                    if big_r <= 0.5 * l {
                        big_r * big_r / l
                    } else {
                        0.25 * l + (big_r - 0.5 * l)
                    }
                }
                (Space::Segment { length: l }, Point::Pos(p)) => {
                    let (a, b) = (p.min(l - p), p.max(l - p));
                    let upto = |r: f64| {
                        if r <= a {
                            r * r / l
                        } else {
                            (a * a + 0.5 * (r * r - a * a) + a * (r - a)) / l
                        }
                    };
                    if big_r <= b {
                        upto(big_r)
                    } else {
                        upto(b) + (big_r - b)
                    }
                }
                (Space::FiniteMetric(fm), Point::Index(i)) => {
                    let w = 1.0 / fm.len() as f64;
                    (0..fm.len()).map(|j| w * (big_r - fm.d(i, j)).max(0.0)).sum()
                }
                (Space::FlatTorus { width, height }, _) => {
                    let kinks = torus::ball_area_kinks(*width, *height);
                    integrate_measure(|r| self.uniform_ball_measure(s, r), big_r, &kinks)?
                }
                (Space::MetricGraph(g), Point::Edge { edge, offset }) => {
                    let kinks = g.ball_length_kinks(edge, offset);
                    integrate_measure(|r| self.uniform_ball_measure(s, r), big_r, &kinks)?
                }
                _ => {
                    return Err(CoverError::SpaceMismatch {
                        space: self.kind(),
                        point: s.kind(),
                    })
                }
            };
            total += wu * u;
        }
        Ok(total)
    }

    /// Radii at which `r -> mu(ball(s, r))` changes analytic form.
    pub fn ball_measure_kinks(&self, mu: &SeedDistribution, s: &Point) -> Vec<f64> {
        let (wu, atoms, _) = mu.parts();
        let mut k = Vec::new();
        if let Some(a) = atoms {
            k.extend(a.points().iter().map(|p| self.dist(s, p)));
        }
        if wu > 0.0 {
            match (self, *s) {
                (Space::Circle { circumference: l }, _) => k.push(0.5 * l),
                (Space::Segment { length: l }, Point::Pos(p)) => k.extend([p, l - p]),
                (Space::FlatTorus { width, height }, _) => k.extend(torus::ball_area_kinks(*width, *height)),
                (Space::FiniteMetric(fm), Point::Index(i)) => k.extend((0..fm.len()).map(|j| fm.d(i, j))),
                (Space::MetricGraph(g), Point::Edge { edge, offset }) => k.extend(g.ball_length_kinks(edge, offset)),
                _ => {}
            }
        }
        k.retain(|&r| r > 0.0);
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// Radius beyond which every ball has full `mu` mass.
    pub fn saturation_radius(&self) -> f64 {
        self.diameter()
    }

    /// `eta(r) = inf_s mu(ball(s, r))`.
    ///
    /// Exact on circles and segments (the mass is piecewise constant plus
    /// piecewise linear between finitely many breakpoints), on the uniform
    /// torus (translation invariance) and on finite metrics. Elsewhere a
    /// certified lower bound `min_q mu(ball(q, r - eps))` over an `eps`-net.
    pub fn eta(&self, mu: &SeedDistribution, r: f64) -> Result<Eta> {
        if !(r > 0.0) {
            return Err(invalid(format!("eta needs r > 0, got {r}")));
        }
        mu.validate(self)?;
        let exact = |value| {
            Ok(Eta {
                value,
                exact: true,
                eps: 0.0,
            })
        };
        match (self, mu) {
            (Space::Circle { .. } | Space::Segment { .. }, _) => exact(self.eta_1d(mu, r)),
            (Space::FlatTorus { .. }, SeedDistribution::Uniform) => {
                exact(self.uniform_ball_measure(&Point::Torus(0.0, 0.0), r))
            }
            (Space::FiniteMetric(fm), _) => exact(
                (0..fm.len())
                    .map(|i| self.ball_measure_unchecked(mu, &Point::Index(i), r))
                    .fold(f64::INFINITY, f64::min),
            ),
            _ => {
                let eps = r / 10.0;
                let net = self.epsilon_net(eps)?;
                let value = net
                    .points
                    .iter()
                    .map(|q| self.ball_measure_unchecked(mu, q, r - eps))
                    .fold(f64::INFINITY, f64::min);
                Ok(Eta {
                    value,
                    exact: false,
                    eps,
                })
            }
        }
    }

    fn eta_1d(&self, mu: &SeedDistribution, r: f64) -> f64 {
        let (circular, l) = match self {
            Space::Circle { circumference } => (true, *circumference),
            Space::Segment { length } => (false, *length),
            _ => unreachable!(),
        };
        let (wu, atoms, wa) = mu.parts();
        let norm = |x: f64| if circular { x.rem_euclid(l) } else { x };
        let mut bps: Vec<f64> = Vec::new();
        if let Some(a) = atoms {
            for (p, _) in a.iter() {
                let x = p.pos().expect("validated");
                bps.push(norm(x - r));
                bps.push(norm(x + r));
            }
        }
        if circular {
            bps.push(0.0);
        } else {
            bps.extend([0.0, l, r, l - r]);
        }
        let mut bps: Vec<f64> = bps
            .into_iter()
            .filter(|&x| (0.0..=l).contains(&x) && !(circular && x >= l))
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();

        let uni = |x: f64| wu * self.uniform_ball_measure(&Point::Pos(x), r);
        let atomic = |x: f64| match atoms {
            Some(a) => wa * self.atoms_ball_measure(a, &Point::Pos(x), r),
            None => 0.0,
        };
        let mut best = f64::INFINITY;
        for &b in &bps {
            best = best.min(uni(b) + atomic(b));
        }
        // open intervals: atomic part constant, uniform part linear
        let mut intervals: Vec<(f64, f64)> = bps.windows(2).map(|w| (w[0], w[1])).collect();
        if circular {
            let last = *bps.last().unwrap();
            intervals.push((last, bps[0] + l));
        }
        for (lo, hi) in intervals {
            if hi <= lo {
                continue;
            }
            let mid = norm(0.5 * (lo + hi));
            let u = uni(norm(lo).min(l)).min(uni(norm(hi).min(l)));
            best = best.min(u + atomic(mid));
        }
        best.min(1.0)
    }

    /// Centers of radius-`r` balls covering the space.
    pub fn covering(&self, r: f64) -> Result<Covering> {
        if !(r > 0.0) {
            return Err(invalid(format!("covering radius must be positive, got {r}")));
        }
        let one = |p| Covering {
            centers: vec![p],
            exact: true,
        };
        Ok(match self {
            Space::Circle { circumference: l } => {
                let k = if 2.0 * r >= *l {
                    1
                } else {
                    ((l / (2.0 * r)) * (1.0 - 1e-12)).ceil() as usize
                };
                Covering {
                    centers: grid_1d(*l, k),
                    exact: true,
                }
            }
            Space::Segment { length: l } => {
                let k = (((l / (2.0 * r)) * (1.0 - 1e-12)).ceil() as usize).max(1);
                Covering {
                    centers: grid_1d(*l, k),
                    exact: true,
                }
            }
            _ if r >= self.diameter() => one(self.any_point()),
            Space::FlatTorus { width, height } => {
                // square cells of half-diagonal <= r
                let side = r * std::f64::consts::SQRT_2;
                let kx = (width / side).ceil() as usize;
                let ky = (height / side).ceil() as usize;
                Covering {
                    centers: grid_2d(*width, *height, kx, ky),
                    exact: false,
                }
            }
            Space::FiniteMetric(fm) => {
                let m = fm.len();
                let balls: Vec<Vec<usize>> = (0..m).map(|i| fm.ball(i, r)).collect();
                let (chosen, exact) = if m <= EXHAUSTIVE_LIMIT {
                    let masks: Vec<u64> = balls.iter().map(|b| mask(b)).collect();
                    (setcover::exact((1u64 << m) - 1, &masks).expect("balls cover"), true)
                } else {
                    (setcover::greedy(m, &balls).expect("balls cover"), false)
                };
                Covering {
                    centers: chosen.into_iter().map(Point::Index).collect(),
                    exact,
                }
            }
            Space::MetricGraph(_) => {
                // cover an (r/4)-net at radius 3r/4: every point lies within
                // r/4 of a net point, so the balls of radius r cover the space
                let eps = r / 4.0;
                let net = self.epsilon_net(eps)?;
                let chosen = self.greedy_cover_net(&net.points, &net.points, r - eps);
                Covering {
                    centers: chosen.into_iter().map(|i| net.points[i]).collect(),
                    exact: false,
                }
            }
        })
    }

    /// `cov(r)`: minimum number of radius-`r` balls covering the space (an
    /// upper bound when `exact` is false).
    pub fn covering_number(&self, r: f64) -> Result<CoveringNumber> {
        let c = self.covering(r)?;
        Ok(CoveringNumber {
            count: c.centers.len(),
            exact: c.exact,
        })
    }

    /// `d(r)`: the number of radius-`r/2` balls needed to cover any
    /// radius-`r` ball. Exact on circles, segments and small finite
    /// metrics; a certified upper bound otherwise.
    pub fn dimension_d(&self, r: f64) -> Result<Dimension> {
        if !(r > 0.0) {
            return Err(invalid(format!("d(r) needs r > 0, got {r}")));
        }
        Ok(match self {
            Space::Circle { circumference: l } | Space::Segment { length: l } => Dimension {
                value: if r >= *l { 1 } else { 2 },
                exact: true,
            },
            Space::FiniteMetric(fm) => {
                let m = fm.len();
                let halves: Vec<Vec<usize>> = (0..m).map(|j| fm.ball(j, 0.5 * r)).collect();
                let exhaustive = m <= EXHAUSTIVE_LIMIT;
                let masks: Vec<u64> = if exhaustive {
                    halves.iter().map(|b| mask(b)).collect()
                } else {
                    Vec::new()
                };
                let mut worst = 0;
                for i in 0..m {
                    let ball = fm.ball(i, r);
                    let count = if exhaustive {
                        setcover::exact(mask(&ball), &masks).expect("singletons cover").len()
                    } else {
                        let pos: std::collections::HashMap<usize, usize> =
                            ball.iter().enumerate().map(|(k, &p)| (p, k)).collect();
                        let sets: Vec<Vec<usize>> = halves
                            .iter()
                            .map(|h| h.iter().filter_map(|p| pos.get(p).copied()).collect())
                            .collect();
                        setcover::greedy(ball.len(), &sets).expect("singletons cover").len()
                    };
                    worst = worst.max(count);
                }
                Dimension {
                    value: worst,
                    exact: exhaustive,
                }
            }
            Space::FlatTorus { .. } | Space::MetricGraph(_) => {
                // Any s is within eps of a net point c, and ball(s, r) lies in
                // the eps-cells of net points within r + 2 eps of c; covering
                // those net points at radius r/2 - eps covers ball(s, r).
                let eps = r / 8.0;
                let net = self.epsilon_net(eps)?;
                let centers: Vec<&Point> = match self {
                    // grid nets are invariant under the grid translations
                    Space::FlatTorus { .. } => net.points.iter().take(1).collect(),
                    _ => net.points.iter().collect(),
                };
                let mut worst = 1;
                for c in centers {
                    let targets: Vec<Point> = net
                        .points
                        .iter()
                        .filter(|q| self.dist(c, q) <= r + 2.0 * eps)
                        .copied()
                        .collect();
                    let cands: Vec<Point> = net
                        .points
                        .iter()
                        .filter(|q| self.dist(c, q) <= 1.5 * r + 2.0 * eps)
                        .copied()
                        .collect();
                    let n = self.greedy_cover_net(&targets, &cands, 0.5 * r - eps).len();
                    worst = worst.max(n);
                }
                Dimension {
                    value: worst,
                    exact: false,
                }
            }
        })
    }

    /// Greedy cover of `targets` by balls of radius `r` centred at
    /// `candidates`; returns indices into `candidates`.
    fn greedy_cover_net(&self, targets: &[Point], candidates: &[Point], r: f64) -> Vec<usize> {
        let sets: Vec<Vec<usize>> = candidates
            .iter()
            .map(|c| (0..targets.len()).filter(|&t| self.dist(c, &targets[t]) <= r).collect())
            .collect();
        setcover::greedy(targets.len(), &sets).expect("targets are candidates")
    }

    /// A finite set whose covering radius is at most `eps`.
    pub fn epsilon_net(&self, eps: f64) -> Result<Net> {
        if !(eps > 0.0) {
            return Err(invalid(format!("net mesh must be positive, got {eps}")));
        }
        let points = match self {
            Space::Circle { circumference: l } | Space::Segment { length: l } => {
                grid_1d(*l, ((l / (2.0 * eps)).ceil() as usize).max(1))
            }
            Space::FlatTorus { width, height } => {
                let side = eps * std::f64::consts::SQRT_2;
                grid_2d(
                    *width,
                    *height,
                    (width / side).ceil() as usize,
                    (height / side).ceil() as usize,
                )
            }
            Space::FiniteMetric(fm) => {
                // farthest-point traversal from point 0
                let m = fm.len();
                let mut chosen = vec![0usize];
                let mut gap: Vec<f64> = (0..m).map(|j| fm.d(0, j)).collect();
                loop {
                    let (far, d) = gap
                        .iter()
                        .enumerate()
                        .fold((0, -1.0), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
                    if d <= eps {
                        break;
                    }
                    chosen.push(far);
                    for (j, g) in gap.iter_mut().enumerate() {
                        *g = g.min(fm.d(far, j));
                    }
                }
                chosen.sort_unstable();
                chosen.into_iter().map(Point::Index).collect()
            }
            Space::MetricGraph(g) => g
                .edges()
                .iter()
                .enumerate()
                .flat_map(|(i, e)| {
                    let k = ((e.len / (2.0 * eps)).ceil() as usize).max(1);
                    let step = e.len / k as f64;
                    (0..k).map(move |j| Point::Edge {
                        edge: i,
                        offset: (j as f64 + 0.5) * step,
                    })
                })
                .collect(),
        };
        Ok(Net { points, mesh: eps })
    }

    fn any_point(&self) -> Point {
        match self {
            Space::Circle { .. } | Space::Segment { .. } => Point::Pos(0.0),
            Space::FlatTorus { .. } => Point::Torus(0.0, 0.0),
            Space::FiniteMetric(_) => Point::Index(0),
            Space::MetricGraph(_) => Point::Edge { edge: 0, offset: 0.0 },
        }
    }

    /// The same space with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Space {
        match self {
            Space::Circle { circumference } => Space::Circle {
                circumference: circumference * factor,
            },
            Space::Segment { length } => Space::Segment {
                length: length * factor,
            },
            Space::FlatTorus { width, height } => Space::FlatTorus {
                width: width * factor,
                height: height * factor,
            },
            Space::FiniteMetric(fm) => Space::FiniteMetric(fm.scaled(factor)),
            Space::MetricGraph(g) => Space::MetricGraph(g.scaled(factor)),
        }
    }
}

fn integrate_measure<F: Fn(f64) -> f64>(f: F, big_r: f64, kinks: &[f64]) -> Result<f64> {
    if big_r <= 0.0 {
        return Ok(0.0);
    }
    adaptive_simpson_piecewise(f, 0.0, big_r, kinks, QUAD_REL_TOL)
}

fn mask(idx: &[usize]) -> u64 {
    idx.iter().fold(0, |m, &i| m | 1 << i)
}

fn grid_1d(l: f64, k: usize) -> Vec<Point> {
    let step = l / k as f64;
    (0..k).map(|i| Point::Pos((i as f64 + 0.5) * step)).collect()
}

fn grid_2d(w: f64, h: f64, kx: usize, ky: usize) -> Vec<Point> {
    let (kx, ky) = (kx.max(1), ky.max(1));
    let (sx, sy) = (w / kx as f64, h / ky as f64);
    (0..kx)
        .flat_map(|i| (0..ky).map(move |j| Point::Torus((i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy)))
        .collect()
}

/// Weighted atoms with precomputed cumulative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Atoms {
    points: Vec<Point>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Atoms {
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Atoms> {
        if atoms.is_empty() {
            return Err(invalid("atom list is empty"));
        }
        if atoms.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("atom weights must be nonnegative"));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("atom weights sum to {total}, not 1")));
        }
        let (points, weights): (Vec<Point>, Vec<f64>) = atoms.into_iter().unzip();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Atoms {
            points,
            weights,
            cumulative,
        })
    }

    /// Equal weights on `points`.
    pub fn uniform(points: Vec<Point>) -> Result<Atoms> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        let mut atoms: Vec<(Point, f64)> = points.into_iter().map(|p| (p, w)).collect();
        // absorb rounding so the weights sum to 1 within tolerance
        if n > 0 {
            let rest: f64 = atoms[..n - 1].iter().map(|(_, w)| w).sum();
            atoms[n - 1].1 = 1.0 - rest;
        }
        Atoms::new(atoms)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Index selected by the uniform variate `u` (inverse CDF).
    pub fn index_for(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.points.len() - 1)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.points[self.index_for(rng.random::<f64>())]
    }

    fn scaled(&self, c: f64) -> Atoms {
        Atoms {
            points: self.points.iter().map(|p| p.scaled(c)).collect(),
            ..self.clone()
        }
    }
}

/// The law `mu` of seed or ball centers. Full support is not required.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedDistribution {
    /// The space's canonical uniform measure.
    Uniform,
    Atoms(Atoms),
    /// `atom_weight * atoms + (1 - atom_weight) * uniform`.
    Mixture {
        atoms: Atoms,
        atom_weight: f64,
    },
}

impl SeedDistribution {
    pub fn atoms(atoms: Vec<(Point, f64)>) -> Result<Self> {
        Ok(SeedDistribution::Atoms(Atoms::new(atoms)?))
    }

    pub fn uniform_atoms(points: Vec<Point>) -> Result<Self> {
        Ok(SeedDistribution::Atoms(Atoms::uniform(points)?))
    }

    pub fn mixture(atoms: Vec<(Point, f64)>, atom_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&atom_weight) {
            return Err(invalid(format!("mixture weight {atom_weight} outside [0, 1]")));
        }
        Ok(SeedDistribution::Mixture {
            atoms: Atoms::new(atoms)?,
            atom_weight,
        })
    }

    /// (uniform weight, atoms, atom weight)
    fn parts(&self) -> (f64, Option<&Atoms>, f64) {
        match self {
            SeedDistribution::Uniform => (1.0, None, 0.0),
            SeedDistribution::Atoms(a) => (0.0, Some(a), 1.0),
            SeedDistribution::Mixture { atoms, atom_weight } => (1.0 - atom_weight, Some(atoms), *atom_weight),
        }
    }

    pub fn atom_list(&self) -> Option<&Atoms> {
        self.parts().1
    }

    /// Every atom must be a point of `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        if let Some(a) = self.atom_list() {
            for p in a.points() {
                space.check_point(p)?;
            }
        }
        Ok(())
    }

    /// True when every point of `space` lies within `r` of the support, so
    /// i.i.d. balls of radius `r` eventually cover almost surely.
    pub fn can_cover(&self, space: &Space, r: f64) -> bool {
        let (uniform, atoms, _) = self.parts();
        if uniform > 0.0 {
            return true;
        }
        if let Ok(eta) = space.eta(self, r) {
            if eta.exact || eta.value > 0.0 {
                return eta.value > 0.0;
            }
        }
        let Some(atoms) = atoms else { return true };
        let Ok(net) = space.epsilon_net(r / 16.0) else {
            return false;
        };
        let reach = r - net.mesh;
        net.points
            .iter()
            .all(|q| atoms.iter().any(|(p, w)| w > 0.0 && space.dist(p, q) <= reach))
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SeedDistribution::Uniform => SeedDistribution::Uniform,
            SeedDistribution::Atoms(a) => SeedDistribution::Atoms(a.scaled(c)),
            SeedDistribution::Mixture { atoms, atom_weight } => SeedDistribution::Mixture {
                atoms: atoms.scaled(c),
                atom_weight: *atom_weight,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eta {
    pub value: f64,
    /// False when `value` is a certified lower bound.
    pub exact: bool,
    /// Net mesh used for the lower bound (0 when exact).
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    pub centers: Vec<Point>,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringNumber {
    pub count: usize,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dimension {
    pub value: usize,
    pub exact: bool,
}

/// A finite point set with covering radius at most `mesh`.
#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    pub points: Vec<Point>,
    pub mesh: f64,
}
