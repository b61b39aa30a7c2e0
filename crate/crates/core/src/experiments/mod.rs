//! Config-driven experiments with CSV and JSON outputs.
//!
//! [`run`] dispatches on the experiment kind, writes one CSV per table and a
//! `summary.json` holding every bound report, the estimates, the config and
//! the code version. CSV numbers use 17 significant digits and every CSV
//! row carries the master seed. Replicate streams depend only on the seed
//! and replicate index, so CSVs are identical for any thread count.

mod config;
mod runners;
mod search;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::BoundReport;
use crate::error::Result;
use crate::rng::with_threads;

pub use config::{
    parse_chain_spec, parse_sampler_spec, AtomCoord, ChainSpec, ExperimentConfig, ExperimentKind, MuKind, SamplerSpec,
    SpaceKind, Tolerances, INCLUDE_KEY,
};
pub use search::{
    default_support, evenly_spaced_vs_uniform, min_mu_search, EvenModel, MinMuSearch, PairedComparison, SearchStep,
};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "COVERLAB_OUTPUT_DIR";

/// A CSV table. The writer prepends a `seed` column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    fn write(&self, dir: &Path, seed: u64) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(std::iter::once("seed").chain(self.header.iter().map(String::as_str)))?;
        let s = seed.to_string();
        for row in &self.rows {
            w.write_record(std::iter::once(s.as_str()).chain(row.iter().map(String::as_str)))?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// A float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// What one experiment produced before anything is written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<BoundReport>,
    pub results: serde_json::Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("serializable record");
        self.results.insert(key.to_string(), v);
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub summary: Value,
    pub reports: Vec<BoundReport>,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl ExperimentResult {
    pub fn any_violated(&self) -> bool {
        self.reports.iter().any(BoundReport::violated)
    }

    /// 1 when some bound is violated, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_violated())
    }
}

/// Run the experiment without writing anything.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    with_threads(cfg.threads, || runners::dispatch(cfg))
}

/// Run the experiment and write its CSVs and `summary.json` into
/// `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let outcome = execute(cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let mut files = vec![];
    for t in &outcome.tables {
        files.push(t.write(&dir, cfg.seed)?);
    }
    let violated = outcome.reports.iter().any(BoundReport::violated);
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "wall_clock_seconds": elapsed,
        "threads": rayon_threads(cfg.threads),
        "any_violated": violated,
        "reports": outcome.reports,
        "results": outcome.results,
        "tables": outcome.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        "config": cfg,
    });
    let summary_path = dir.join("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("json") + "\n",
    )?;
    files.push(summary_path);
    Ok(ExperimentResult {
        summary,
        reports: outcome.reports,
        output_dir: dir,
        files,
    })
}

fn rayon_threads(configured: usize) -> usize {
    if configured == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        configured
    }
}
