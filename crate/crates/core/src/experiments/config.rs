//! Experiment configuration files.
//!
//! A config is a flat TOML document. The optional key `include` names one
//! file (or a list of files) whose keys act as defaults; keys in the
//! including file win. Include paths, `matrix_file` and `graph_file` are
//! resolved relative to the file that mentions them.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoverError, Result};
use crate::spaces::{FiniteMetric, MetricGraph, Point, SeedDistribution, Space};

pub const INCLUDE_KEY: &str = "include";
const PATH_KEYS: [&str; 2] = ["matrix_file", "graph_file"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FixedConcentration,
    GrowthConcentration,
    Pch,
    MinMuSearch,
    SegmentExample,
    SubsetKappa,
    BoundsReport,
    EvenlySpaced,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::FixedConcentration,
        ExperimentKind::GrowthConcentration,
        ExperimentKind::Pch,
        ExperimentKind::MinMuSearch,
        ExperimentKind::SegmentExample,
        ExperimentKind::SubsetKappa,
        ExperimentKind::BoundsReport,
        ExperimentKind::EvenlySpaced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FixedConcentration => "fixed-concentration",
            ExperimentKind::GrowthConcentration => "growth-concentration",
            ExperimentKind::Pch => "pch",
            ExperimentKind::MinMuSearch => "min-mu-search",
            ExperimentKind::SegmentExample => "segment-example",
            ExperimentKind::SubsetKappa => "subset-kappa",
            ExperimentKind::BoundsReport => "bounds-report",
            ExperimentKind::EvenlySpaced => "evenly-spaced",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::FixedConcentration => {
                "fixed-radius cover counts and the variance ratio over a family of radii"
            }
            ExperimentKind::GrowthConcentration => "growth cover times: variance, mean and tail bounds per length",
            ExperimentKind::Pch => "circle cover-time law, uncovered-point probabilities and gap lengths",
            ExperimentKind::MinMuSearch => "search for a seed law with small mean cover time, bracketed by bounds",
            ExperimentKind::SegmentExample => "two-atom seed law on a segment and its limiting cover-time law",
            ExperimentKind::SubsetKappa => "terminal-set variance ratio for finite samplers and hitting-time chains",
            ExperimentKind::BoundsReport => "every growth bound evaluated for one seed law over a family of lengths",
            ExperimentKind::EvenlySpaced => "evenly spaced atoms against the uniform law on an integer circle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Circle,
    Segment,
    Torus,
    Finite,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuKind {
    Uniform,
    Atoms,
    Mixture,
    /// Equal weights on `atom_count` evenly spaced points of a circle or
    /// segment.
    Even,
}

/// An atom location: a position or vertex index, or a coordinate pair
/// (torus point, or graph edge and offset).
#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum AtomCoord {
    One(f64),
    Two([f64; 2]),
}

/// Pass/fail thresholds for checks that compare against a fixed tolerance
/// rather than a standard error.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ks_pch: f64,
    pub ks_trend: f64,
    pub gap_mean_rel: f64,
    pub gap_ks: f64,
    pub gap_min_samples: usize,
    pub segment_sup: f64,
    pub segment_atom: f64,
    pub coupon_rel: f64,
    pub chain_var_rel: f64,
    pub kappa_guard: f64,
    pub fixed_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ks_pch: 0.1,
            ks_trend: 0.02,
            gap_mean_rel: 0.05,
            gap_ks: 0.05,
            gap_min_samples: 1000,
            segment_sup: 0.05,
            segment_atom: 0.03,
            coupon_rel: 0.01,
            chain_var_rel: 0.10,
            kappa_guard: 10.0,
            fixed_guard: 10.0,
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_reps() -> usize {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

fn default_one() -> f64 {
    1.0
}

fn default_inner_reps() -> usize {
    100
}

fn default_support_size() -> usize {
    20
}

fn default_iters() -> usize {
    10
}

/// One experiment. Every key except `experiment` has a default; see the
/// README for the full table.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,

    pub space: Option<SpaceKind>,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub matrix_file: Option<PathBuf>,
    pub graph_file: Option<PathBuf>,

    pub mu: Option<MuKind>,
    #[serde(default)]
    pub atoms: Vec<AtomCoord>,
    pub atom_weights: Option<Vec<f64>>,
    pub atom_weight: Option<f64>,
    pub atom_count: Option<usize>,

    #[serde(default = "default_one")]
    pub lambda: f64,
    #[serde(default = "default_one")]
    pub v: f64,
    pub r0: Option<f64>,

    /// Family of lengths (circle circumference or segment length).
    #[serde(default)]
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub r0_values: Vec<f64>,
    pub net_eps: Option<f64>,
    pub gap_reps: Option<usize>,
    pub arc_length: Option<f64>,
    #[serde(default)]
    pub samplers: Vec<String>,
    #[serde(default = "default_inner_reps")]
    pub inner_reps: usize,
    pub chain: Option<String>,
    pub chain_reps: Option<usize>,
    #[serde(default = "default_support_size")]
    pub support_size: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,

    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Read `path`, resolve includes and check the result.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let table = load_table(path.as_ref(), &mut BTreeSet::new())?;
        let cfg = Self::from_table(table, &path.as_ref().display().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a config given as text. Includes and relative paths resolve
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let table = parse_table(text, "config", base_dir, &mut BTreeSet::new())?;
        let cfg = Self::from_table(table, "config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_table(table: toml::Table, origin: &str) -> Result<Self> {
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| CoverError::Parse {
            what: format!("{origin} at `{}`", e.path()),
            reason: e.into_inner().to_string(),
        })
    }

    pub fn space_kind(&self) -> SpaceKind {
        self.space.unwrap_or(match self.experiment {
            ExperimentKind::SegmentExample => SpaceKind::Segment,
            _ => SpaceKind::Circle,
        })
    }

    pub fn mu_kind(&self) -> MuKind {
        self.mu.unwrap_or(MuKind::Uniform)
    }

    pub fn default_length(&self) -> f64 {
        self.length.unwrap_or(match self.experiment {
            ExperimentKind::Pch => 1e4,
            ExperimentKind::SegmentExample => 1000.0,
            ExperimentKind::EvenlySpaced => 20.0,
            _ => 100.0,
        })
    }

    /// `lengths`, or the single `length` when no family is given.
    pub fn length_family(&self) -> Vec<f64> {
        if self.lengths.is_empty() {
            vec![self.default_length()]
        } else {
            self.lengths.clone()
        }
    }

    pub fn r0_family(&self) -> Vec<f64> {
        if self.r0_values.is_empty() {
            vec![self.r0.unwrap_or(1.0)]
        } else {
            self.r0_values.clone()
        }
    }

    /// The configured space with `length` replaced by `l` where lengths
    /// apply.
    pub fn build_space(&self, l: f64) -> Result<Space> {
        match self.space_kind() {
            SpaceKind::Circle => Space::circle(l),
            SpaceKind::Segment => Space::segment(l),
            SpaceKind::Torus => Space::torus(self.width.unwrap_or(l), self.height.unwrap_or(l)),
            SpaceKind::Finite => {
                let path = self
                    .matrix_file
                    .as_ref()
                    .ok_or_else(|| invalid("space = \"finite\" needs matrix_file"))?;
                Ok(Space::FiniteMetric(FiniteMetric::from_file(path)?))
            }
            SpaceKind::Graph => {
                let path = self
                    .graph_file
                    .as_ref()
                    .ok_or_else(|| invalid("space = \"graph\" needs graph_file"))?;
                Ok(Space::MetricGraph(MetricGraph::from_file(path)?))
            }
        }
    }

    fn atom_points(&self) -> Result<Vec<Point>> {
        if self.atoms.is_empty() {
            return Err(invalid("this mu needs a nonempty `atoms` list"));
        }
        self.atoms.iter().map(|a| atom_point(self.space_kind(), *a)).collect()
    }

    fn atom_list(&self) -> Result<Vec<(Point, f64)>> {
        let points = self.atom_points()?;
        let weights = match &self.atom_weights {
            Some(w) if w.len() != points.len() => {
                return Err(invalid(format!("{} atom weights for {} atoms", w.len(), points.len())))
            }
            Some(w) => {
                let total: f64 = w.iter().sum();
                if !(total > 0.0) {
                    return Err(invalid("atom weights must have a positive sum"));
                }
                w.iter().map(|x| x / total).collect()
            }
            None => vec![1.0 / points.len() as f64; points.len()],
        };
        let mut atoms: Vec<(Point, f64)> = points.into_iter().zip(weights).collect();
        let n = atoms.len();
        let rest: f64 = atoms[..n - 1].iter().map(|a| a.1).sum();
        atoms[n - 1].1 = (1.0 - rest).max(0.0);
        Ok(atoms)
    }

    /// The configured seed law on `space`.
    pub fn build_mu(&self, space: &Space) -> Result<SeedDistribution> {
        let mu = match self.mu_kind() {
            MuKind::Uniform => SeedDistribution::Uniform,
            MuKind::Atoms => SeedDistribution::atoms(self.atom_list()?)?,
            MuKind::Mixture => SeedDistribution::mixture(self.atom_list()?, self.atom_weight.unwrap_or(0.5))?,
            MuKind::Even => {
                let (l, circular) = match space {
                    Space::Circle { circumference } => (*circumference, true),
                    Space::Segment { length } => (*length, false),
                    _ => {
                        return Err(CoverError::Unsupported {
                            op: "evenly spaced atoms",
                            space: space.kind(),
                        })
                    }
                };
                let n = self.atom_count.unwrap_or(l.round().max(1.0) as usize);
                if n == 0 {
                    return Err(invalid("atom_count must be at least 1"));
                }
                let step = if circular || n == 1 {
                    l / n as f64
                } else {
                    l / (n - 1) as f64
                };
                SeedDistribution::uniform_atoms((0..n).map(|i| Point::Pos(i as f64 * step)).collect())?
            }
        };
        mu.validate(space)?;
        Ok(mu)
    }

    /// Schema-level checks that do not need simulation.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind as K;
        if self.reps < 2 {
            return Err(invalid(format!("reps must be at least 2, got {}", self.reps)));
        }
        for (name, x) in [("lambda", self.lambda), ("v", self.v)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {x}")));
            }
        }
        for &l in self.length_family().iter() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid(format!("lengths must be positive, got {l}")));
            }
        }
        for &r in self.r0_family().iter() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid(format!("r0 must be positive, got {r}")));
            }
        }
        let kind = self.space_kind();
        let unsupported = |op: &'static str| {
            Err(CoverError::Unsupported {
                op,
                space: match kind {
                    SpaceKind::Circle => "circle",
                    SpaceKind::Segment => "segment",
                    SpaceKind::Torus => "torus",
                    SpaceKind::Finite => "finite metric",
                    SpaceKind::Graph => "metric graph",
                },
            })
        };
        let standardized = self.lambda == 1.0 && self.v == 1.0;
        match self.experiment {
            K::Pch => {
                if kind != SpaceKind::Circle {
                    return unsupported("the pch experiment");
                }
                if self.mu_kind() != MuKind::Uniform || !standardized {
                    return Err(invalid(
                        "pch runs the standardized circle with uniform seeds; drop mu, lambda and v",
                    ));
                }
                if self.reps < 100 {
                    return Err(invalid("pch needs reps >= 100"));
                }
            }
            K::SegmentExample => {
                if kind != SpaceKind::Segment {
                    return unsupported("the segment example");
                }
                if self.mu.is_some() || !standardized {
                    return Err(invalid("segment-example fixes its own seed law; drop mu, lambda and v"));
                }
            }
            K::EvenlySpaced => {
                if kind != SpaceKind::Circle {
                    return unsupported("the evenly spaced comparison");
                }
                let l = self.default_length();
                if l.fract() != 0.0 || l < 1.0 {
                    return Err(invalid(format!("evenly-spaced needs an integer length, got {l}")));
                }
            }
            K::MinMuSearch => {
                if self.support_size == 0 && self.atoms.is_empty() {
                    return Err(invalid("support_size must be at least 1"));
                }
                if kind == SpaceKind::Graph && self.atoms.is_empty() {
                    return Err(invalid("min-mu-search on a graph needs an explicit `atoms` support"));
                }
            }
            K::SubsetKappa => {
                if self.inner_reps < 2 {
                    return Err(invalid("inner_reps must be at least 2"));
                }
                for s in &self.samplers {
                    parse_sampler_spec(s)?;
                }
                if let Some(c) = &self.chain {
                    parse_chain_spec(c)?;
                }
            }
            K::FixedConcentration | K::GrowthConcentration | K::BoundsReport => {}
        }
        if let Some(mu) = self.mu {
            if mu != MuKind::Uniform && mu != MuKind::Even {
                self.atom_points()?;
            }
        }
        Ok(())
    }
}

fn atom_point(kind: SpaceKind, a: AtomCoord) -> Result<Point> {
    match (kind, a) {
        (SpaceKind::Circle | SpaceKind::Segment, AtomCoord::One(x)) => Ok(Point::Pos(x)),
        (SpaceKind::Torus, AtomCoord::Two([x, y])) => Ok(Point::Torus(x, y)),
        (SpaceKind::Finite, AtomCoord::One(i)) if i >= 0.0 && i.fract() == 0.0 => Ok(Point::Index(i as usize)),
        (SpaceKind::Graph, AtomCoord::Two([e, o])) if e >= 0.0 && e.fract() == 0.0 => Ok(Point::Edge {
            edge: e as usize,
            offset: o,
        }),
        _ => Err(invalid(format!("atom {a:?} does not fit a {kind:?} space"))),
    }
}

/// A subset sampler written `kind:m[:k]`, or `metric-ball:r0` using the
/// configured finite space and seed law.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerSpec {
    UniformSingleton { m: usize },
    RandomKSubset { m: usize, k: usize },
    CyclicArc { m: usize, k: usize },
    MetricBall { r0: f64 },
}

fn spec_error(spec: &str, reason: &str) -> CoverError {
    CoverError::Parse {
        what: format!("spec `{spec}`"),
        reason: reason.to_string(),
    }
}

fn numbers<T: std::str::FromStr>(spec: &str, parts: &[&str]) -> Result<Vec<T>> {
    parts
        .iter()
        .map(|p| p.trim().parse::<T>().map_err(|_| spec_error(spec, "expected a number")))
        .collect()
}

pub fn parse_sampler_spec(spec: &str) -> Result<SamplerSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    match (parts[0].trim(), parts.len()) {
        ("uniform-singleton", 2) => Ok(SamplerSpec::UniformSingleton {
            m: numbers(spec, &parts[1..])?[0],
        }),
        ("random-k-subset", 3) => {
            let n: Vec<usize> = numbers(spec, &parts[1..])?;
            Ok(SamplerSpec::RandomKSubset { m: n[0], k: n[1] })
        }
        ("cyclic-arc", 3) => {
            let n: Vec<usize> = numbers(spec, &parts[1..])?;
            Ok(SamplerSpec::CyclicArc { m: n[0], k: n[1] })
        }
        ("metric-ball", 2) => Ok(SamplerSpec::MetricBall {
            r0: numbers(spec, &parts[1..])?[0],
        }),
        _ => Err(spec_error(
            spec,
            "expected uniform-singleton:m, random-k-subset:m:k, cyclic-arc:m:k or metric-ball:r0",
        )),
    }
}

/// A chain written `coupon:n` or `two-rate:n1:n2:p`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainSpec {
    Coupon { n: usize },
    TwoRate { n1: usize, n2: usize, p: f64 },
}

pub fn parse_chain_spec(spec: &str) -> Result<ChainSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    match (parts[0].trim(), parts.len()) {
        ("coupon", 2) => Ok(ChainSpec::Coupon {
            n: numbers(spec, &parts[1..])?[0],
        }),
        ("two-rate", 4) => {
            let n: Vec<usize> = numbers(spec, &parts[1..3])?;
            let p: f64 = numbers(spec, &parts[3..])?[0];
            Ok(ChainSpec::TwoRate { n1: n[0], n2: n[1], p })
        }
        _ => Err(spec_error(spec, "expected coupon:n or two-rate:n1:n2:p")),
    }
}

fn load_table(path: &Path, seen: &mut BTreeSet<PathBuf>) -> Result<toml::Table> {
    let canonical = path.canonicalize().map_err(|e| CoverError::Parse {
        what: format!("config {}", path.display()),
        reason: e.to_string(),
    })?;
    if !seen.insert(canonical.clone()) {
        return Err(CoverError::Parse {
            what: format!("config {}", path.display()),
            reason: "include cycle".into(),
        });
    }
    let text = std::fs::read_to_string(&canonical)?;
    let base = canonical.parent().unwrap_or(Path::new("."));
    let table = parse_table(&text, &path.display().to_string(), base, seen)?;
    seen.remove(&canonical);
    Ok(table)
}

fn parse_table(text: &str, origin: &str, base: &Path, seen: &mut BTreeSet<PathBuf>) -> Result<toml::Table> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CoverError::Parse {
        what: origin.to_string(),
        reason: e.to_string(),
    })?;
    for key in PATH_KEYS {
        if let Some(toml::Value::String(p)) = table.get(key) {
            let resolved = base.join(p).display().to_string();
            table.insert(key.to_string(), toml::Value::String(resolved));
        }
    }
    let includes = match table.remove(INCLUDE_KEY) {
        None => vec![],
        Some(toml::Value::String(s)) => vec![s],
        Some(toml::Value::Array(a)) => a
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                other => Err(CoverError::Parse {
                    what: format!("{origin} at `{INCLUDE_KEY}`"),
                    reason: format!("expected a file name, got {other}"),
                }),
            })
            .collect::<Result<_>>()?,
        Some(other) => {
            return Err(CoverError::Parse {
                what: format!("{origin} at `{INCLUDE_KEY}`"),
                reason: format!("expected a file name or a list of them, got {other}"),
            })
        }
    };
    let mut merged = toml::Table::new();
    for inc in includes {
        merge(&mut merged, load_table(&base.join(inc), seen)?);
    }
    merge(&mut merged, table);
    Ok(merged)
}

/// Keys of `top` override `base`; nested tables merge key by key.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
