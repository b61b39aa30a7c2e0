use std::path::Path;

use crate::error::{invalid, CoverError, Result};

/// A connected finite graph whose edges are segments of given length, with
/// the shortest-route metric on all of its points (vertices and edge
/// interiors).
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    vertices: usize,
    edges: Vec<Edge>,
    /// vertex-to-vertex shortest path lengths, row-major
    apsp: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

impl MetricGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(invalid("metric graph needs at least one edge"));
        }
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|(a, b, len)| {
                if a >= vertices || b >= vertices {
                    Err(invalid(format!("edge ({a}, {b}) references a missing vertex")))
                } else if !(len > 0.0 && len.is_finite()) {
                    Err(invalid(format!("edge ({a}, {b}) has non-positive length")))
                } else {
                    Ok(Edge { a, b, len })
                }
            })
            .collect::<Result<_>>()?;

        let n = vertices;
        let mut apsp = vec![f64::INFINITY; n * n];
        for i in 0..n {
            apsp[i * n + i] = 0.0;
        }
        for e in &edges {
            let cur = apsp[e.a * n + e.b];
            if e.len < cur {
                apsp[e.a * n + e.b] = e.len;
                apsp[e.b * n + e.a] = e.len;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = apsp[i * n + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik + apsp[k * n + j];
                    if via < apsp[i * n + j] {
                        apsp[i * n + j] = via;
                    }
                }
            }
        }
        if apsp.iter().any(|d| d.is_infinite()) {
            return Err(invalid("metric graph must be connected"));
        }
        let mut acc = 0.0;
        let cumulative = edges
            .iter()
            .map(|e| {
                acc += e.len;
                acc
            })
            .collect();
        Ok(MetricGraph {
            vertices,
            edges,
            apsp,
            cumulative,
        })
    }

    /// Parse `n` on the first line, then one `u v length` line per edge.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |reason: String| CoverError::Parse {
            what: "metric graph".into(),
            reason,
        };
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| err("empty input".into()))?
            .parse()
            .map_err(|e| err(format!("vertex count: {e}")))?;
        let mut edges = Vec::new();
        for (i, line) in lines.enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err(format!("edge line {i} needs `u v length`")));
            }
            let u = toks[0].parse().map_err(|e| err(format!("edge {i}: {e}")))?;
            let v = toks[1].parse().map_err(|e| err(format!("edge {i}: {e}")))?;
            let l = toks[2].parse().map_err(|e| err(format!("edge {i}: {e}")))?;
            edges.push((u, v, l));
        }
        Self::new(n, edges)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    #[inline]
    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.apsp[u * self.vertices + v]
    }

    /// Distance from the point at `offset` along `edge` (measured from its
    /// `a` end) to vertex `v`.
    #[inline]
    pub fn to_vertex(&self, edge: usize, offset: f64, v: usize) -> f64 {
        let e = self.edges[edge];
        (offset + self.vertex_distance(e.a, v)).min(e.len - offset + self.vertex_distance(e.b, v))
    }

    pub fn distance(&self, e1: usize, o1: f64, e2: usize, o2: f64) -> f64 {
        let f = self.edges[e2];
        let mut d = (self.to_vertex(e1, o1, f.a) + o2).min(self.to_vertex(e1, o1, f.b) + f.len - o2);
        if e1 == e2 {
            d = d.min((o1 - o2).abs());
        }
        d
    }

    /// Exact diameter. For two distinct edges the farthest point on the
    /// second edge from offset `s` on the first is at distance
    /// `(A(s) + B(s) + len2) / 2`, a concave piecewise-linear function of `s`
    /// maximised at an endpoint or a kink. On a single edge the farthest pair
    /// is at distance `(D(a, b) + len) / 2`.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, e) in self.edges.iter().enumerate() {
            best = best.max(0.5 * (self.vertex_distance(e.a, e.b) + e.len));
            for (j, f) in self.edges.iter().enumerate() {
                if i == j {
                    continue;
                }
                let kink = |v: usize| {
                    (0.5 * (e.len + self.vertex_distance(e.b, v) - self.vertex_distance(e.a, v))).clamp(0.0, e.len)
                };
                for s in [0.0, e.len, kink(f.a), kink(f.b)] {
                    let g = 0.5 * (self.to_vertex(i, s, f.a) + self.to_vertex(i, s, f.b) + f.len);
                    best = best.max(g);
                }
            }
        }
        best
    }

    /// Length of the set of points within `r` of `(edge, offset)`.
    pub fn ball_length(&self, edge: usize, offset: f64, r: f64) -> f64 {
        let mut total = 0.0;
        for (j, f) in self.edges.iter().enumerate() {
            let ra = (r - self.to_vertex(edge, offset, f.a)).max(0.0);
            let rb = (r - self.to_vertex(edge, offset, f.b)).max(0.0);
            if j != edge {
                total += (ra + rb).min(f.len);
            } else {
                let mut iv = [
                    (0.0, ra.min(f.len)),
                    ((f.len - rb).max(0.0), f.len),
                    ((offset - r).max(0.0), (offset + r).min(f.len)),
                ];
                iv.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut len = 0.0;
                let mut cur: Option<(f64, f64)> = None;
                for (lo, hi) in iv {
                    if hi <= lo {
                        continue;
                    }
                    cur = match cur {
                        Some((clo, chi)) if lo <= chi => Some((clo, chi.max(hi))),
                        Some((clo, chi)) => {
                            len += chi - clo;
                            Some((lo, hi))
                        }
                        None => Some((lo, hi)),
                    };
                }
                if let Some((clo, chi)) = cur {
                    len += chi - clo;
                }
                total += len;
            }
        }
        total
    }

    /// Breakpoints of `r -> ball_length(edge, offset, r)`.
    pub fn ball_length_kinks(&self, edge: usize, offset: f64) -> Vec<f64> {
        let mut k = Vec::new();
        for f in &self.edges {
            let a = self.to_vertex(edge, offset, f.a);
            let b = self.to_vertex(edge, offset, f.b);
            k.extend([a, b, a + f.len, b + f.len, 0.5 * (a + b + f.len)]);
        }
        let e = self.edges[edge];
        k.extend([offset, e.len - offset]);
        k
    }

    /// Map a uniform variate in `[0, 1)` to a point under the length measure.
    pub fn locate(&self, u: f64) -> (usize, f64) {
        let x = u * self.total_length();
        let i = self.cumulative.partition_point(|&c| c <= x).min(self.edges.len() - 1);
        let start = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (i, (x - start).clamp(0.0, self.edges[i].len))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        MetricGraph {
            vertices: self.vertices,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    len: e.len * factor,
                    ..*e
                })
                .collect(),
            apsp: self.apsp.iter().map(|d| d * factor).collect(),
            cumulative: self.cumulative.iter().map(|c| c * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MetricGraph {
        MetricGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    #[test]
    fn cycle_graph_behaves_like_circle() {
        let g = triangle();
        assert!((g.diameter() - 1.5).abs() < 1e-12);
        // midpoint of edge 0 to vertex 2 goes round either way: 0.5 + 1
        assert!((g.distance(0, 0.5, 1, 1.0) - 1.5).abs() < 1e-12);
        // ball of radius r on a cycle of length 3 has length min(2r, 3)
        for r in [0.1, 0.7, 1.4, 2.0] {
            assert!((g.ball_length(0, 0.3, r) - (2.0 * r).min(3.0)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn path_graph_diameter_and_ball() {
        let g = MetricGraph::new(3, vec![(0, 1, 2.0), (1, 2, 3.0)]).unwrap();
        assert!((g.diameter() - 5.0).abs() < 1e-12);
        // from vertex 0 (offset 0 on edge 0), radius 3 reaches 2 + 1
        assert!((g.ball_length(0, 0.0, 3.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn star_diameter_is_two_longest_arms() {
        let g = MetricGraph::new(4, vec![(0, 1, 1.0), (0, 2, 2.0), (0, 3, 4.0)]).unwrap();
        assert!((g.diameter() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_disconnected() {
        assert!(MetricGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).is_err());
    }

    #[test]
    fn parse_format() {
        let g = MetricGraph::parse("# triangle\n3\n0 1 1\n1 2 1\n2 0 1\n").unwrap();
        assert_eq!(g, triangle());
    }
}
