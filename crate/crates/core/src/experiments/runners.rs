//! One function per experiment kind.

use std::f64::consts::LN_2;

use serde_json::json;

use super::config::{parse_chain_spec, parse_sampler_spec, ChainSpec, ExperimentConfig, ExperimentKind, SamplerSpec};
use super::search::{default_support, evenly_spaced_vs_uniform, min_mu_search, EvenModel};
use super::{num, Outcome, Table};
use crate::bounds::{
    coupon_mean, default_r_grid, ec_diameter_check, ec_over_cstar_upper, fixed_family_check, fixed_ratio,
    growth_var_check, min_mu_construction_check, min_mu_lower, min_mu_upper, tail_envelope_check, BoundReport,
};
use crate::circle_pch::{
    empirical_vs_pch, predicted_uncovered_arc, predicted_uncovered_point, uncovered_arc_prob, uncovered_gap_stats,
    uncovered_point_prob, variance_orders,
};
use crate::error::{invalid, CoverError, Result};
use crate::fixed_radius::{cover_counts, FixedRadiusConfig};
use crate::growth::{c_star, estimate_cover_stats, standardize, GrowthParams};
use crate::rng::Seed;
use crate::spaces::{Point, SeedDistribution, Space};
use crate::stats::{self, CoverStats};
use crate::subset_cover::{kappa_ratio, monotone_chain_check, MonotoneChain, SubsetSampler};

const AUX: u64 = 0xA0A0;

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    match cfg.experiment {
        ExperimentKind::FixedConcentration => fixed_concentration(cfg, &mut out)?,
        ExperimentKind::GrowthConcentration => {
            growth_family(cfg, &mut out, false)?;
        }
        ExperimentKind::Pch => pch(cfg, &mut out)?,
        ExperimentKind::MinMuSearch => min_mu(cfg, &mut out)?,
        ExperimentKind::SegmentExample => segment_example(cfg, &mut out)?,
        ExperimentKind::SubsetKappa => subset_kappa(cfg, &mut out)?,
        ExperimentKind::BoundsReport => {
            growth_family(cfg, &mut out, true)?;
        }
        ExperimentKind::EvenlySpaced => evenly_spaced(cfg, &mut out)?,
    }
    Ok(out)
}

fn seed_of(cfg: &ExperimentConfig) -> Seed {
    Seed(cfg.seed)
}

fn aux(cfg: &ExperimentConfig, k: u64) -> Seed {
    seed_of(cfg).path(&[AUX, k])
}

fn stats_cols(s: &CoverStats) -> Vec<String> {
    vec![
        s.reps.to_string(),
        num(s.mean),
        num(s.se_mean),
        num(s.variance),
        num(s.normalized_var),
        num(s.normalized_var_se),
    ]
}

const STATS_HEADER: [&str; 6] = [
    "reps",
    "mean",
    "se_mean",
    "variance",
    "normalized_var",
    "normalized_var_se",
];

fn with_stats<'a>(lead: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    lead.iter()
        .chain(STATS_HEADER.iter())
        .chain(tail.iter())
        .copied()
        .collect()
}

/// `|lhs|` against a fixed tolerance, no standard-error slack.
fn tolerance_check(name: &str, lhs: f64, tol: f64, params: &[(&str, f64)]) -> BoundReport {
    BoundReport::compare(name, lhs, 0.0, tol, params)
}

fn fixed_concentration(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let space = cfg.build_space(cfg.default_length())?;
    let mu = cfg.build_mu(&space)?;
    let mut family = vec![];
    let mut summary = Table::new(
        "fixed_family",
        &with_stats(
            &["r0"],
            &["d_r0", "d_exact", "eta_half", "eta_exact", "rhs", "ratio", "ratio_se"],
        ),
    );
    let mut samples = Table::new("fixed_samples", &["r0", "replicate", "count"]);
    for (j, &r0) in cfg.r0_family().iter().enumerate() {
        let fr = FixedRadiusConfig::new(space.clone(), mu.clone(), r0)?;
        let seed = seed_of(cfg).child(j as u64);
        let counts = cover_counts(&fr, cfg.reps, seed)?;
        for (i, c) in counts.iter().enumerate() {
            samples.push(vec![num(r0), i.to_string(), c.to_string()]);
        }
        let stats = CoverStats::from_samples(counts.iter().map(|&c| c as f64).collect(), seed);
        let d = space.dimension_d(r0)?;
        let eta = space.eta(&mu, 0.5 * r0)?;
        if !(eta.value > 0.0) {
            return Err(CoverError::NotCoverable(format!("eta(r0/2) = 0 at r0 = {r0}")));
        }
        let ratio = fixed_ratio(r0, &stats, d.value, eta.value)?;
        let mut row = vec![num(r0)];
        row.extend(stats_cols(&stats));
        row.extend([
            d.value.to_string(),
            d.exact.to_string(),
            num(eta.value),
            eta.exact.to_string(),
            num(ratio.rhs),
            num(ratio.ratio),
            num(ratio.ratio_se),
        ]);
        summary.push(row);
        if let (Space::FiniteMetric(fm), SeedDistribution::Uniform) = (&space, &mu) {
            if r0 < fm.min_positive_distance() {
                let exact = coupon_mean(fm.len() as u64);
                out.reports.push(tolerance_check(
                    "coupon reduction",
                    (stats.mean - exact).abs() / exact,
                    cfg.tolerances.coupon_rel,
                    &[("m", fm.len() as f64), ("exact_mean", exact), ("r0", r0)],
                ));
            }
        }
        out.record(
            &format!("r0={r0}"),
            json!({ "stats": stats, "ratio": ratio, "d_r0": d, "eta_half": eta }),
        );
        family.push(ratio);
    }
    out.reports
        .push(fixed_family_check(&family, cfg.tolerances.fixed_guard)?);
    out.tables.extend([summary, samples]);
    Ok(())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Standardized growth runs over the length family. With `all_bounds` the
/// mean-over-c* bound and the seed-law bounds are evaluated as well.
fn growth_family(cfg: &ExperimentConfig, out: &mut Outcome, all_bounds: bool) -> Result<()> {
    let mut family = Table::new(
        "growth_family",
        &with_stats(
            &["length", "lambda", "v"],
            &[
                "c_star",
                "c_star_slack",
                "delta",
                "delta_over_ec_sq",
                "pathwise_violations",
                "time_scale",
                "length_scale",
            ],
        ),
    );
    let mut samples = Table::new(
        "growth_samples",
        &["length", "replicate", "cover_time", "first_arrival", "diameter_bound"],
    );
    let mut bounds = Table::new(
        "bounds",
        &[
            "length",
            "mean",
            "c_star",
            "ec_over_cstar_bound",
            "ec_over_cstar_argmin",
            "ec_over_cstar_cov",
            "min_mu_lower",
            "min_mu_upper",
            "min_mu_upper_argmin",
            "min_mu_upper_cov",
        ],
    );
    for (j, &l) in cfg.length_family().iter().enumerate() {
        let space = cfg.build_space(l)?;
        let mu = cfg.build_mu(&space)?;
        let (params, units) = standardize(&GrowthParams::new(space, mu, cfg.lambda, cfg.v)?);
        let space = &params.space;
        let seed = seed_of(cfg).child(j as u64);
        let g = estimate_cover_stats(&params, cfg.reps, seed)?;
        let delta = space.diameter();
        let eps = cfg.net_eps.map(|e| e * cfg.lambda / cfg.v).unwrap_or(delta / 200.0);
        let cs = c_star(&params, &space.epsilon_net(eps)?)?;
        let violations = g.pathwise_violations();
        let st = &g.stats;
        for (i, c) in st.samples.iter().enumerate() {
            samples.push(vec![
                num(l),
                i.to_string(),
                num(*c),
                num(g.first_arrivals[i]),
                num(g.diameter_bounds[i]),
            ]);
        }
        let diam = ec_diameter_check(st, delta, 1.0, 1.0);
        let lp = [("length", l)];
        let with_l = |mut r: BoundReport| {
            r.parameters.insert("length".into(), l);
            r
        };
        out.reports.push(with_l(growth_var_check(st, cs.value)));
        out.reports.push(with_l(diam.lower.clone()));
        out.reports.push(with_l(diam.upper.clone()));
        out.reports.push(BoundReport::compare(
            "pathwise diameter",
            violations as f64,
            0.0,
            0.0,
            &lp,
        ));
        let grid: Vec<f64> = (1..=16).map(|k| st.mean * k as f64 / 4.0).collect();
        out.reports.push(with_l(tail_envelope_check(st, &grid)?));

        let mut row = vec![num(l), num(cfg.lambda), num(cfg.v)];
        row.extend(stats_cols(st));
        row.extend([
            num(cs.value),
            num(cs.lipschitz_slack),
            num(delta),
            num(diam.delta_over_ec_sq),
            violations.to_string(),
            num(units.time_scale),
            num(units.length_scale),
        ]);
        family.push(row);
        let mut record = json!({
            "length": l,
            "stats": st,
            "method": g.method,
            "c_star": cs,
            "units": units,
            "delta_over_ec_sq": diam.delta_over_ec_sq,
            "pathwise_violations": violations,
        });

        if all_bounds {
            let cov = |r: f64| Ok(space.covering_number(r)?.count);
            let ratio = ec_over_cstar_upper(cs.value, cov, &log_grid(1e-2, 1e2, 81))?;
            // c* is known up to the net slack; the bound is monotone in it
            let c_hi = cs.value + cs.lipschitz_slack;
            out.reports.push(BoundReport::compare(
                "mean over c-star",
                st.mean,
                st.se_mean,
                c_hi * ratio.value,
                &[("length", l), ("c_star", cs.value), ("a", ratio.argmin)],
            ));
            let lower = min_mu_lower(space)?;
            let upper = min_mu_upper(space, &default_r_grid(space, 64))?;
            out.reports.push(BoundReport::compare(
                "seed-law lower bound",
                lower,
                st.se_mean,
                st.mean,
                &lp,
            ));
            bounds.push(vec![
                num(l),
                num(st.mean),
                num(cs.value),
                num(ratio.value),
                num(ratio.argmin),
                ratio.cov.to_string(),
                num(lower),
                num(upper.value),
                num(upper.argmin),
                upper.cov.to_string(),
            ]);
            record["ec_over_cstar"] = json!(ratio);
            record["min_mu_lower"] = json!(lower);
            record["min_mu_upper"] = json!(upper);
        }
        out.record(&format!("length={l}"), record);
    }
    out.tables.extend([family, samples]);
    if all_bounds {
        out.tables.push(bounds);
    }
    Ok(())
}

fn pch(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let lengths = cfg.length_family();
    let mut cdf = Table::new("pch_cdf", &["L", "t", "empirical_cdf", "pch_cdf", "gumbel_cdf"]);
    let mut summary = Table::new(
        "pch_summary",
        &with_stats(
            &["L"],
            &[
                "t0",
                "sigma",
                "ks_pch",
                "ks_gumbel",
                "median",
                "scaled_normalized_var",
                "scaled_cstar_ratio",
            ],
        ),
    );
    let mut ks = vec![];
    for (j, &l) in lengths.iter().enumerate() {
        let c = empirical_vs_pch(l, cfg.reps, seed_of(cfg).child(j as u64))?;
        let v = variance_orders(l, &c.stats)?;
        let p = c.prediction;
        let sorted = stats::sorted(&c.stats.samples);
        let n = sorted.len() as f64;
        for (i, t) in sorted.iter().enumerate() {
            cdf.push(vec![
                num(l),
                num(*t),
                num((i + 1) as f64 / n),
                num(p.cdf(*t)),
                num(p.gumbel(*t)),
            ]);
        }
        let mut row = vec![num(l)];
        row.extend(stats_cols(&c.stats));
        row.extend([
            num(p.t0),
            num(p.sigma),
            num(c.ks_pch),
            num(c.ks_gumbel),
            num(c.median),
            num(v.scaled_normalized_var),
            num(v.scaled_cstar_ratio),
        ]);
        summary.push(row);
        out.record(
            &format!("L={l}"),
            json!({
                "t0": p.t0,
                "sigma": p.sigma,
                "ks_pch": c.ks_pch,
                "ks_gumbel": c.ks_gumbel,
                "median": c.median,
                "stats": c.stats,
                "variance_orders": v,
            }),
        );
        ks.push((l, c.ks_pch));
    }
    let (l_max, ks_max) = *ks.iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty family");
    let (l_min, ks_min) = *ks.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty family");
    let tol = &cfg.tolerances;
    out.reports
        .push(tolerance_check("pch ks", ks_max, tol.ks_pch, &[("L", l_max)]));
    if l_min < l_max {
        out.reports.push(tolerance_check(
            "pch ks trend",
            ks_max,
            ks_min + tol.ks_trend,
            &[("L_small", l_min), ("L_large", l_max), ("ks_small", ks_min)],
        ));
    }

    let l = l_max;
    let t = (l * LN_2).sqrt();
    let a = cfg.arc_length.unwrap_or(t);
    let reps = cfg.gap_reps.unwrap_or(cfg.reps);
    let point = uncovered_point_prob(l, t, reps, aux(cfg, 0))?;
    let arc = uncovered_arc_prob(l, a, t, reps, aux(cfg, 1))?;
    let p_point = predicted_uncovered_point(l, t);
    let p_arc = predicted_uncovered_arc(l, a, t);
    let lt = [("L", l), ("t", t)];
    out.reports.push(BoundReport::compare(
        "uncovered point",
        (point.mean - p_point).abs(),
        point.se,
        0.0,
        &lt,
    ));
    out.reports.push(BoundReport::compare(
        "uncovered arc",
        (arc.mean - p_arc).abs(),
        arc.se,
        0.0,
        &[("L", l), ("t", t), ("a", a)],
    ));
    let gaps = uncovered_gap_stats(l, t, reps, aux(cfg, 2))?;
    let want = l / t;
    out.reports.push(tolerance_check(
        "gap mean",
        (gaps.mean_a1.mean - want).abs() / want,
        tol.gap_mean_rel,
        &[("L", l), ("t", t), ("predicted_mean", want)],
    ));
    out.reports.push(tolerance_check(
        "gap ks",
        gaps.ks_exp_a1.max(gaps.ks_exp_a2),
        tol.gap_ks,
        &lt,
    ));
    out.reports.push(BoundReport::compare(
        "gap samples",
        tol.gap_min_samples as f64,
        0.0,
        gaps.conditioned as f64,
        &lt,
    ));
    let mut gap_table = Table::new("gaps", &["L", "t", "a1", "a2"]);
    for g in &gaps.samples {
        gap_table.push(vec![num(l), num(g.t), num(g.a1), num(g.a2)]);
    }
    let mut probs = Table::new("uncovered", &["L", "t", "a", "estimate", "se", "predicted"]);
    probs.push(vec![
        num(l),
        num(t),
        num(0.0),
        num(point.mean),
        num(point.se),
        num(p_point),
    ]);
    probs.push(vec![num(l), num(t), num(a), num(arc.mean), num(arc.se), num(p_arc)]);
    out.record(
        "uncovered",
        json!({ "L": l, "t": t, "a": a, "point": point, "point_predicted": p_point, "arc": arc, "arc_predicted": p_arc, "gaps": gaps }),
    );
    out.tables.extend([summary, cdf, probs, gap_table]);
    Ok(())
}

fn min_mu(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let space = cfg.build_space(cfg.default_length())?;
    let raw_support = if cfg.atoms.is_empty() {
        None
    } else {
        Some(SeedDistribution::uniform_atoms(
            cfg.build_mu(&space)?.atom_list().expect("atoms").points().to_vec(),
        )?)
    };
    let (params, units) = standardize(&GrowthParams::new(
        space.clone(),
        raw_support.clone().unwrap_or(SeedDistribution::Uniform),
        cfg.lambda,
        cfg.v,
    )?);
    let space = params.space.clone();
    let support = match raw_support {
        Some(_) => params.mu.atom_list().expect("atoms").points().to_vec(),
        None => default_support(&space, cfg.support_size)?,
    };
    let s = min_mu_search(&space, &support, cfg.reps, cfg.iters, seed_of(cfg))?;
    let lower = min_mu_lower(&space)?;
    let upper = min_mu_upper(&space, &default_r_grid(&space, 64))?;
    let cons = min_mu_construction_check(&space, upper.argmin, cfg.reps, aux(cfg, 0))?;
    let best = &s.estimate;
    out.reports.push(BoundReport::compare(
        "seed-law lower bracket",
        lower,
        best.se_mean,
        best.mean,
        &[("lower", lower)],
    ));
    out.reports.push(BoundReport::compare(
        "construction bracket",
        best.mean,
        best.se_mean.hypot(cons.stats.se_mean),
        cons.stats.mean,
        &[("r", cons.r), ("centers", cons.centers as f64)],
    ));
    out.reports.push(BoundReport::compare(
        "search baseline",
        best.mean,
        s.diff_se,
        s.baseline.mean,
        &[("support", support.len() as f64)],
    ));
    out.reports.push(BoundReport::compare(
        "construction pathwise",
        cons.pathwise_violations as f64,
        0.0,
        0.0,
        &[("r", cons.r)],
    ));
    out.reports.push(cons.coupon_report.clone());
    out.reports.push(cons.bound_report.clone());

    let mut weights = Table::new("min_mu_weights", &["atom", "coord1", "coord2", "weight"]);
    for (j, (p, w)) in support.iter().zip(&s.weights).enumerate() {
        let (c1, c2) = coords(p);
        weights.push(vec![j.to_string(), c1, c2, num(*w)]);
    }
    let mut history = Table::new("min_mu_history", &["iter", "step", "mean", "se", "accepted"]);
    for h in &s.history {
        history.push(vec![
            h.iter.to_string(),
            num(h.step),
            num(h.mean),
            num(h.se),
            h.accepted.to_string(),
        ]);
    }
    let mut samples = Table::new("min_mu_samples", &["replicate", "best", "baseline", "construction"]);
    for i in 0..cfg.reps {
        samples.push(vec![
            i.to_string(),
            num(best.samples[i]),
            num(s.baseline.samples[i]),
            num(cons.stats.samples[i]),
        ]);
    }
    out.record("search", &s);
    out.record("units", units);
    out.record("min_mu_lower", lower);
    out.record("min_mu_upper", upper);
    out.record("construction", &cons);
    out.tables.extend([weights, history, samples]);
    Ok(())
}

fn coords(p: &Point) -> (String, String) {
    match *p {
        Point::Pos(x) => (num(x), String::new()),
        Point::Torus(x, y) => (num(x), num(y)),
        Point::Index(i) => (i.to_string(), String::new()),
        Point::Edge { edge, offset } => (edge.to_string(), num(offset)),
    }
}

/// `1 - exp(-(2x - 1))` on `[1/2, 1)`, the continuous part of the limit law
/// of `C / n`; the remaining mass `1/e` sits at 1.
pub(super) fn segment_limit_cdf(x: f64) -> f64 {
    if x < 0.5 {
        0.0
    } else if x < 1.0 {
        1.0 - (-(2.0 * x - 1.0)).exp()
    } else {
        1.0
    }
}

fn segment_example(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let n = cfg.default_length();
    let space = Space::segment(n)?;
    let mu = SeedDistribution::atoms(vec![(Point::Pos(0.0), 1.0 - 1.0 / n), (Point::Pos(n), 1.0 / n)])?;
    let params = GrowthParams::standardized(space, mu)?;
    let g = estimate_cover_stats(&params, cfg.reps, seed_of(cfg))?;
    let x: Vec<f64> = g.stats.samples.iter().map(|c| c / n).collect();
    let sup = stats::ks_distance_where(&x, segment_limit_cdf, |v| (0.5..1.0).contains(&v));
    let atom = x.iter().filter(|&&v| v >= 1.0).count() as f64 / x.len() as f64;
    let tol = &cfg.tolerances;
    out.reports
        .push(tolerance_check("segment cdf", sup, tol.segment_sup, &[("n", n)]));
    out.reports.push(tolerance_check(
        "segment atom",
        (atom - (-1.0f64).exp()).abs(),
        tol.segment_atom,
        &[("n", n), ("atom", atom)],
    ));
    out.reports.push(BoundReport::compare(
        "pathwise diameter",
        g.pathwise_violations() as f64,
        0.0,
        0.0,
        &[("n", n)],
    ));
    let mut samples = Table::new("segment_samples", &["replicate", "c_over_n"]);
    for (i, v) in x.iter().enumerate() {
        samples.push(vec![i.to_string(), num(*v)]);
    }
    let sorted = stats::sorted(&x);
    let m = sorted.len() as f64;
    let mut cdf = Table::new("segment_cdf", &["x", "empirical_cdf", "limit_cdf"]);
    for (i, v) in sorted.iter().enumerate() {
        cdf.push(vec![num(*v), num((i + 1) as f64 / m), num(segment_limit_cdf(*v))]);
    }
    out.record(
        "segment",
        json!({ "n": n, "sup_distance": sup, "atom_mass": atom, "atom_limit": (-1.0f64).exp(), "stats": g.stats }),
    );
    out.tables.extend([samples, cdf]);
    Ok(())
}

fn default_samplers() -> Vec<String> {
    [
        "uniform-singleton:20",
        "uniform-singleton:100",
        "cyclic-arc:60:1",
        "cyclic-arc:60:2",
        "cyclic-arc:60:5",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn subset_kappa(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let specs = if cfg.samplers.is_empty() {
        default_samplers()
    } else {
        cfg.samplers.clone()
    };
    let mut kappa = Table::new(
        "kappa",
        &[
            "sampler",
            "ratio",
            "ratio_se",
            "ratio_ci_lo",
            "ratio_ci_hi",
            "mean_cover",
            "normalized_var",
            "mean_terminal_cost",
            "outer_reps",
            "inner_reps",
        ],
    );
    let mut records = Table::new(
        "kappa_records",
        &["sampler", "replicate", "cover_count", "terminal_size"],
    );
    let tol = &cfg.tolerances;
    for (j, spec) in specs.iter().enumerate() {
        let sampler = match parse_sampler_spec(spec)? {
            SamplerSpec::UniformSingleton { m } => SubsetSampler::uniform_singleton(m)?,
            SamplerSpec::RandomKSubset { m, k } => SubsetSampler::random_k_subset(m, k)?,
            SamplerSpec::CyclicArc { m, k } => SubsetSampler::cyclic_arc(m, k)?,
            SamplerSpec::MetricBall { r0 } => {
                let space = cfg.build_space(cfg.default_length())?;
                let mu = cfg.build_mu(&space)?;
                match space {
                    Space::FiniteMetric(fm) => SubsetSampler::metric_ball(fm, r0, mu)?,
                    other => {
                        return Err(CoverError::Unsupported {
                            op: "metric-ball sampler",
                            space: other.kind(),
                        })
                    }
                }
            }
        };
        let k = kappa_ratio(&sampler, cfg.reps, cfg.inner_reps, seed_of(cfg).child(j as u64))?;
        if !k.ratio.is_finite() {
            return Err(invalid(format!("kappa ratio for {spec} is not finite")));
        }
        out.reports.push(BoundReport::compare(
            &format!("kappa guard {spec}"),
            k.ratio,
            k.ratio_se,
            tol.kappa_guard,
            &[("outer_reps", cfg.reps as f64), ("inner_reps", cfg.inner_reps as f64)],
        ));
        if let SubsetSampler::UniformSingleton { m } = sampler {
            let exact = coupon_mean(m as u64);
            out.reports.push(tolerance_check(
                &format!("coupon mean {spec}"),
                (k.mean_cover - exact).abs() / exact,
                tol.coupon_rel,
                &[("m", m as f64), ("exact_mean", exact)],
            ));
        }
        kappa.push(vec![
            spec.clone(),
            num(k.ratio),
            num(k.ratio_se),
            num(k.ratio_ci.0),
            num(k.ratio_ci.1),
            num(k.mean_cover),
            num(k.normalized_var),
            num(k.mean_terminal_cost),
            k.outer_reps.to_string(),
            k.inner_reps.to_string(),
        ]);
        for (i, (c, t)) in k.records.iter().enumerate() {
            records.push(vec![spec.clone(), i.to_string(), c.to_string(), t.to_string()]);
        }
        out.record(spec, &k);
    }
    out.tables.extend([kappa, records]);

    if let Some(spec) = &cfg.chain {
        let chain = match parse_chain_spec(spec)? {
            ChainSpec::Coupon { n } => MonotoneChain::coupon(n)?,
            ChainSpec::TwoRate { n1, n2, p } => MonotoneChain::two_rate(n1, n2, p)?,
        };
        let reps = cfg.chain_reps.unwrap_or(cfg.reps);
        let c = monotone_chain_check(&chain, reps, aux(cfg, 0))?;
        out.reports.push(c.report.clone());
        out.reports.push(tolerance_check(
            "chain variance accuracy",
            (c.stats.variance - c.exact_var).abs() / c.exact_var,
            tol.chain_var_rel,
            &[("exact_var", c.exact_var), ("reps", reps as f64)],
        ));
        let mut t = Table::new(
            "chain",
            &[
                "chain",
                "reps",
                "exact_mean",
                "exact_var",
                "mean",
                "variance",
                "max_drop",
            ],
        );
        t.push(vec![
            spec.clone(),
            reps.to_string(),
            num(c.exact_mean),
            num(c.exact_var),
            num(c.stats.mean),
            num(c.stats.variance),
            num(c.max_drop),
        ]);
        out.record("chain", &c);
        out.tables.push(t);
    }
    Ok(())
}

fn evenly_spaced(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let l = cfg.default_length() as usize;
    let mut table = Table::new("evenly_spaced", &["model", "replicate", "even", "uniform"]);
    let mut means = Table::new(
        "evenly_spaced_means",
        &[
            "model",
            "length",
            "even_mean",
            "even_se",
            "uniform_mean",
            "uniform_se",
            "difference",
            "difference_se",
        ],
    );
    for (j, model) in [EvenModel::FixedRadius, EvenModel::Growth].into_iter().enumerate() {
        let c = evenly_spaced_vs_uniform(l, model, cfg.reps, seed_of(cfg).child(j as u64))?;
        let name = match model {
            EvenModel::FixedRadius => "fixed-radius",
            EvenModel::Growth => "growth",
        };
        if model == EvenModel::FixedRadius {
            out.reports.push(BoundReport::compare(
                "evenly spaced fixed radius",
                c.even.mean,
                c.difference.se,
                c.uniform.mean,
                &[("length", l as f64), ("r0", 0.5)],
            ));
        }
        for (i, (a, b)) in c.samples.iter().enumerate() {
            table.push(vec![name.into(), i.to_string(), num(*a), num(*b)]);
        }
        means.push(vec![
            name.into(),
            l.to_string(),
            num(c.even.mean),
            num(c.even.se),
            num(c.uniform.mean),
            num(c.uniform.se),
            num(c.difference.mean),
            num(c.difference.se),
        ]);
        out.record(name, &c);
    }
    out.tables.extend([means, table]);
    Ok(())
}
