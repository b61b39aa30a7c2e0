use std::path::Path;

use crate::error::{invalid, CoverError, Result};

/// A finite metric space given by its full distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    m: usize,
    dist: Vec<f64>,
}

impl FiniteMetric {
    /// Build from a row-major `m x m` matrix. The metric axioms, including
    /// the triangle inequality over every triple, are checked here.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(invalid("finite metric needs at least one point"));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(invalid("distance matrix must be square"));
        }
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        let d = |i: usize, j: usize| dist[i * m + j];
        let scale = dist.iter().fold(0.0f64, |a, &b| a.max(b));
        let tol = 1e-12 * scale.max(1.0);
        for i in 0..m {
            if d(i, i) != 0.0 {
                return Err(invalid(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..m {
                let x = d(i, j);
                if !x.is_finite() || x < 0.0 {
                    return Err(invalid(format!("bad distance at ({i}, {j})")));
                }
                if i != j && x == 0.0 {
                    return Err(invalid(format!("distinct points {i} and {j} at distance 0")));
                }
                if (x - d(j, i)).abs() > tol {
                    return Err(invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if d(i, k) > d(i, j) + d(j, k) + tol {
                        return Err(invalid(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(FiniteMetric { m, dist })
    }

    /// `m` points at pairwise distance `d`.
    pub fn equilateral(m: usize, d: f64) -> Result<Self> {
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { d }).collect())
            .collect();
        Self::new(rows)
    }

    /// Parse the plain-text format: first line `m`, then `m` rows of `m`
    /// whitespace-separated decimal lengths.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |reason: String| CoverError::Parse {
            what: "distance matrix".into(),
            reason,
        };
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let m: usize = lines
            .next()
            .ok_or_else(|| err("empty input".into()))?
            .parse()
            .map_err(|e| err(format!("point count: {e}")))?;
        let mut rows = Vec::with_capacity(m);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(format!("row {i}: {e}")))?;
            if row.len() != m {
                return Err(err(format!("row {i} has {} entries, expected {m}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(err(format!("found {} rows, expected {m}", rows.len())));
        }
        Self::new(rows)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.m + j]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    pub fn min_positive_distance(&self) -> f64 {
        self.dist
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Indices within distance `r` of `i` (closed ball).
    pub fn ball(&self, i: usize, r: f64) -> Vec<usize> {
        (0..self.m).filter(|&j| self.d(i, j) <= r).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FiniteMetric {
            m: self.m,
            dist: self.dist.iter().map(|x| x * factor).collect(),
        }
    }
}
