//! Seed-law search on a fixed support, and the evenly spaced comparison.

use serde::Serialize;

use crate::bounds::default_r_grid;
use crate::error::{invalid, Result};
use crate::fixed_radius::{simulate_cover_count, FixedRadiusConfig};
use crate::growth::{simulate_realization, CoverEvaluator, CoverMethod, GrowthParams};
use crate::rng::{try_replicate, Seed, SEARCH_TAG};
use crate::spaces::{Point, SeedDistribution, Space};
use crate::stats::{CoverStats, Estimate};

const CRN_STREAM: u64 = 0;
const FRESH_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchStep {
    pub iter: usize,
    pub step: f64,
    pub mean: f64,
    pub se: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinMuSearch {
    #[serde(skip)]
    pub support: Vec<Point>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub mu: SeedDistribution,
    /// The best law re-simulated on a fresh stream.
    pub estimate: CoverStats,
    /// Equal weights on the support, on the same fresh stream.
    pub baseline: CoverStats,
    /// Standard error of the paired difference `estimate - baseline`.
    pub diff_se: f64,
    pub candidates: usize,
    pub history: Vec<SearchStep>,
}

struct Evaluation {
    samples: Vec<f64>,
    last_coverer: Vec<f64>,
}

impl Evaluation {
    fn estimate(&self) -> Estimate {
        Estimate::from_samples(&self.samples)
    }
}

fn law(support: &[Point], weights: &[f64]) -> Result<SeedDistribution> {
    SeedDistribution::atoms(support.iter().copied().zip(weights.iter().copied()).collect())
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let n = w.len();
    let rest: f64 = w[..n - 1].iter().sum();
    w[n - 1] = (1.0 - rest).max(0.0);
    w
}

/// Cover times under the atoms law, plus how often each atom's seed is the
/// one reaching the last covered point.
fn evaluate(space: &Space, support: &[Point], weights: &[f64], reps: usize, seed: Seed) -> Result<Evaluation> {
    let params = GrowthParams::standardized(space.clone(), law(support, weights)?)?;
    let eval = CoverEvaluator::new(space, CoverMethod::default_for(space))?;
    let rows = try_replicate(seed, reps, |_, rng| -> Result<(f64, usize)> {
        let real = simulate_realization(&params, rng);
        let c = eval.cover_time(&real, space, 1.0)?;
        let winner = real
            .arrivals
            .iter()
            .min_by(|a, b| {
                (a.tau + space.dist(&c.point, &a.sigma)).total_cmp(&(b.tau + space.dist(&c.point, &b.sigma)))
            })
            .expect("at least one arrival");
        let atom = support
            .iter()
            .position(|p| *p == winner.sigma)
            .expect("seed sits on an atom");
        Ok((c.time, atom))
    })?;
    let mut last_coverer = vec![0.0; support.len()];
    for &(_, j) in &rows {
        last_coverer[j] += 1.0 / reps as f64;
    }
    Ok(Evaluation {
        samples: rows.into_iter().map(|r| r.0).collect(),
        last_coverer,
    })
}

/// Weights putting equal mass on the support points nearest to the centers
/// of a radius-`r` covering.
fn projected_covering(space: &Space, support: &[Point], r: f64) -> Result<Vec<f64>> {
    let mut w = vec![0.0; support.len()];
    for c in space.covering(r)?.centers {
        let j = (0..support.len())
            .min_by(|&a, &b| space.dist(&c, &support[a]).total_cmp(&space.dist(&c, &support[b])))
            .expect("nonempty support");
        w[j] += 1.0;
    }
    Ok(normalized(w))
}

/// Heuristic minimisation of the standardized mean growth cover time over
/// atom weights on `support`.
///
/// Starting laws are the equal weights and the projections of coverings at
/// the radii where covering numbers change; the best of these under common
/// random numbers seeds the iteration. Each step moves the weights towards
/// the empirical last-coverer frequencies, `w + step (f - w)`, keeping the
/// move when the common-random-numbers mean drops and halving the step
/// otherwise.
pub fn min_mu_search(space: &Space, support: &[Point], reps: usize, iters: usize, seed: Seed) -> Result<MinMuSearch> {
    if support.is_empty() {
        return Err(invalid("support is empty"));
    }
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    for p in support {
        space.check_point(p)?;
    }
    let n = support.len();
    let crn = seed.path(&[SEARCH_TAG, CRN_STREAM]);

    let uniform = normalized(vec![1.0; n]);
    let mut starts = vec![uniform.clone()];
    for r in default_r_grid(space, n) {
        let w = projected_covering(space, support, r)?;
        if !starts.contains(&w) {
            starts.push(w);
        }
    }
    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    for w in &starts {
        let e = evaluate(space, support, w, reps, crn)?;
        if best.as_ref().is_none_or(|(_, b)| e.estimate().mean < b.estimate().mean) {
            best = Some((w.clone(), e));
        }
    }
    let (mut w, mut current) = best.expect("at least one start");
    let mut history = vec![];
    let mut step = 0.5;
    for iter in 0..iters {
        let cand = normalized(
            w.iter()
                .zip(&current.last_coverer)
                .map(|(a, f)| a + step * (f - a))
                .collect(),
        );
        let e = evaluate(space, support, &cand, reps, crn)?;
        let est = e.estimate();
        let accepted = est.mean < current.estimate().mean;
        history.push(SearchStep {
            iter,
            step,
            mean: est.mean,
            se: est.se,
            accepted,
        });
        if accepted {
            w = cand;
            current = e;
        } else {
            step *= 0.5;
        }
    }

    let fresh = seed.path(&[SEARCH_TAG, FRESH_STREAM]);
    let best_eval = evaluate(space, support, &w, reps, fresh)?;
    let base_eval = evaluate(space, support, &uniform, reps, fresh)?;
    let diffs: Vec<f64> = best_eval
        .samples
        .iter()
        .zip(&base_eval.samples)
        .map(|(a, b)| a - b)
        .collect();
    Ok(MinMuSearch {
        support: support.to_vec(),
        mu: law(support, &w)?,
        weights: w,
        estimate: CoverStats::from_samples(best_eval.samples, fresh),
        baseline: CoverStats::from_samples(base_eval.samples, fresh),
        diff_se: Estimate::from_samples(&diffs).se,
        candidates: starts.len(),
        history,
    })
}

/// `support_size` evenly spaced points (cell midpoints), or every point of
/// a finite metric.
pub fn default_support(space: &Space, size: usize) -> Result<Vec<Point>> {
    let n = size.max(1) as f64;
    Ok(match space {
        Space::Circle { circumference: l } | Space::Segment { length: l } => {
            (0..size).map(|i| Point::Pos((i as f64 + 0.5) * l / n)).collect()
        }
        Space::FlatTorus { width, height } => {
            let k = n.sqrt().ceil() as usize;
            let (sx, sy) = (width / k as f64, height / k as f64);
            (0..k)
                .flat_map(|i| (0..k).map(move |j| Point::Torus((i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy)))
                .collect()
        }
        Space::FiniteMetric(fm) => (0..fm.len()).map(Point::Index).collect(),
        Space::MetricGraph(_) => {
            return Err(crate::error::CoverError::Unsupported {
                op: "a default search support",
                space: space.kind(),
            })
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvenModel {
    /// Fixed radius `r0 = 1/2`, cover counted in balls.
    FixedRadius,
    /// Standardized growth.
    Growth,
}

/// Paired replicates under the two laws.
#[derive(Clone, Debug, Serialize)]
pub struct PairedComparison {
    pub model: EvenModel,
    pub length: usize,
    pub even: Estimate,
    pub uniform: Estimate,
    /// `even - uniform` per replicate.
    pub difference: Estimate,
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Uniform weights on the `L` integer points of a circle of length `L`
/// against the uniform law, with both laws driven by the same replicate
/// streams.
pub fn evenly_spaced_vs_uniform(l: usize, model: EvenModel, reps: usize, seed: Seed) -> Result<PairedComparison> {
    if l == 0 {
        return Err(invalid("length must be a positive integer"));
    }
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let space = Space::circle(l as f64)?;
    let even = SeedDistribution::uniform_atoms((0..l).map(|i| Point::Pos(i as f64)).collect())?;
    let samples = match model {
        EvenModel::FixedRadius => {
            let a = FixedRadiusConfig::new(space.clone(), even, 0.5)?;
            let b = FixedRadiusConfig::new(space, SeedDistribution::Uniform, 0.5)?;
            try_replicate(seed, reps, |i, _| -> Result<(f64, f64)> {
                let x = simulate_cover_count(&a, &mut seed.replicate(i as u64))?;
                let y = simulate_cover_count(&b, &mut seed.replicate(i as u64))?;
                Ok((x as f64, y as f64))
            })?
        }
        EvenModel::Growth => {
            let a = GrowthParams::standardized(space.clone(), even)?;
            let b = GrowthParams::standardized(space.clone(), SeedDistribution::Uniform)?;
            let eval = CoverEvaluator::new(&space, CoverMethod::Exact)?;
            try_replicate(seed, reps, |i, _| -> Result<(f64, f64)> {
                let x = eval.cover_time(&simulate_realization(&a, &mut seed.replicate(i as u64)), &space, 1.0)?;
                let y = eval.cover_time(&simulate_realization(&b, &mut seed.replicate(i as u64)), &space, 1.0)?;
                Ok((x.time, y.time))
            })?
        }
    };
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let ds: Vec<f64> = samples.iter().map(|s| s.0 - s.1).collect();
    Ok(PairedComparison {
        model,
        length: l,
        even: Estimate::from_samples(&xs),
        uniform: Estimate::from_samples(&ys),
        difference: Estimate::from_samples(&ds),
        samples,
    })
}
