use super::*;
use crate::spaces::FiniteMetric;
use proptest::prelude::*;
use statrs::function::erf::erf;
use std::f64::consts::PI;

fn circle_params(l: f64) -> GrowthParams {
    GrowthParams::standardized(Space::circle(l).unwrap(), SeedDistribution::Uniform).unwrap()
}

fn segment_example(n: f64) -> GrowthParams {
    let mu = SeedDistribution::atoms(vec![(Point::Pos(0.0), 1.0 - 1.0 / n), (Point::Pos(n), 1.0 / n)]).unwrap();
    GrowthParams::standardized(Space::segment(n).unwrap(), mu).unwrap()
}

fn single(tau: f64, p: Point) -> GrowthRealization {
    GrowthRealization {
        arrivals: vec![Arrival { tau, sigma: p }],
        horizon: tau + 100.0,
    }
}

/// Truncated closed form of `int_0^inf tail` for the standardized uniform
/// circle: the tail is `exp(-t^2/L)` up to `L/2`, then decays at rate 1.
fn circle_point_mean(l: f64) -> f64 {
    0.5 * (PI * l).sqrt() * erf(0.5 * l.sqrt()) + (-0.25 * l).exp()
}

#[test]
fn rejects_bad_rates() {
    let s = Space::circle(1.0).unwrap();
    assert!(GrowthParams::new(s.clone(), SeedDistribution::Uniform, 0.0, 1.0).is_err());
    assert!(GrowthParams::new(s, SeedDistribution::Uniform, 1.0, f64::INFINITY).is_err());
}

#[test]
fn first_arrival_is_exponential() {
    let p = GrowthParams::new(Space::circle(5.0).unwrap(), SeedDistribution::Uniform, 2.0, 1.0).unwrap();
    let taus = crate::rng::replicate(Seed(8), 100_000, |_, rng| {
        simulate_realization(&p, rng).first_arrival().unwrap()
    });
    let e = Estimate::from_samples(&taus);
    assert!((e.mean - 0.5).abs() < 3.0 * e.se, "{e:?}");
}

#[test]
fn realization_structure() {
    let p = circle_params(30.0);
    let mut rng = Seed(4).stream();
    for _ in 0..200 {
        let r = simulate_realization(&p, &mut rng);
        let t1 = r.first_arrival().unwrap();
        assert!(r.horizon >= t1 + 15.0 - 1e-12);
        assert!(r.arrivals.windows(2).all(|w| w[0].tau < w[1].tau));
        assert!(r.arrivals.iter().all(|a| a.tau <= r.horizon));
        assert_eq!(r.count_by(r.horizon), r.arrivals.len());
    }
    let r = simulate_until(&p, 3.0, &mut rng);
    assert!(r.arrivals.iter().all(|a| a.tau <= 3.0));
}

#[test]
fn point_cover_time_examples() {
    let space = Space::circle(10.0).unwrap();
    let p = circle_params(10.0);
    let mut rng = Seed(2).stream();
    let r = simulate_realization(&p, &mut rng);
    let a = &r.arrivals[0];
    assert_eq!(point_cover_time(&r, &space, &a.sigma, 1.0), a.tau);
    let one = single(0.7, Point::Pos(1.0));
    assert!((point_cover_time(&one, &space, &Point::Pos(4.5), 2.0) - (0.7 + 3.5 / 2.0)).abs() < 1e-12);
}

#[test]
fn single_seed_cover_times() {
    let circle = Space::circle(10.0).unwrap();
    let c = cover_time_exact(&single(1.5, Point::Pos(2.0)), &circle, 1.0).unwrap();
    assert!((c.time - 6.5).abs() < 1e-12);
    assert!((c.point.pos().unwrap() - 7.0).abs() < 1e-12);
    let seg = Space::segment(10.0).unwrap();
    let c = cover_time_exact(&single(1.5, Point::Pos(3.0)), &seg, 2.0).unwrap();
    assert!((c.time - (1.5 + 7.0 / 2.0)).abs() < 1e-12);
    assert_eq!(c.point, Point::Pos(10.0));
    let torus = Space::torus(1.0, 1.0).unwrap();
    assert!(cover_time_exact(&single(1.0, Point::Torus(0.0, 0.0)), &torus, 1.0).is_err());
    let empty = GrowthRealization {
        arrivals: vec![],
        horizon: 1.0,
    };
    assert!(cover_time_exact(&empty, &circle, 1.0).is_err());
}

#[test]
fn sweep_matches_all_pairs() {
    let mut rng = Seed(31).stream();
    for (space, v) in [
        (Space::circle(20.0).unwrap(), 1.0),
        (Space::circle(7.0).unwrap(), 0.3),
        (Space::segment(20.0).unwrap(), 1.0),
        (Space::segment(5.0).unwrap(), 4.0),
    ] {
        let p = GrowthParams::new(space.clone(), SeedDistribution::Uniform, 1.0, v).unwrap();
        for _ in 0..300 {
            let r = simulate_realization(&p, &mut rng);
            let fast = cover_time_exact(&r, &space, v).unwrap();
            let slow = cover_time_all_pairs(&r, &space, v).unwrap();
            assert!(
                (fast.time - slow).abs() < 1e-9 * slow.max(1.0),
                "{} {fast:?} {slow}",
                space.kind()
            );
            // the returned point is a last-covered point
            assert!((point_cover_time(&r, &space, &fast.point, v) - fast.time).abs() < 1e-9);
        }
    }
}

#[test]
fn sweep_handles_atoms_and_duplicate_positions() {
    let space = Space::circle(6.0).unwrap();
    let mu = SeedDistribution::uniform_atoms(vec![Point::Pos(0.0), Point::Pos(3.0)]).unwrap();
    let p = GrowthParams::standardized(space.clone(), mu).unwrap();
    let mut rng = Seed(1).stream();
    for _ in 0..200 {
        let r = simulate_realization(&p, &mut rng);
        let fast = cover_time_exact(&r, &space, 1.0).unwrap().time;
        assert!((fast - cover_time_all_pairs(&r, &space, 1.0).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn lipschitz_sandwich_on_circle() {
    let p = circle_params(20.0);
    let eps = 0.05;
    let net = p.space.epsilon_net(eps).unwrap();
    let mut rng = Seed(12).stream();
    for _ in 0..1000 {
        let r = simulate_realization(&p, &mut rng);
        let exact = cover_time_exact(&r, &p.space, 1.0).unwrap().time;
        let approx = cover_time_net(&r, &p.space, &net, 1.0).unwrap().time;
        assert!(approx <= exact + 1e-12 && exact <= approx + eps + 1e-12);
    }
}

#[test]
fn full_net_on_finite_metric_is_exact() {
    let fm = FiniteMetric::new(vec![
        vec![0.0, 1.0, 2.0, 2.5],
        vec![1.0, 0.0, 1.5, 2.0],
        vec![2.0, 1.5, 0.0, 1.0],
        vec![2.5, 2.0, 1.0, 0.0],
    ])
    .unwrap();
    let space = Space::FiniteMetric(fm);
    let p = GrowthParams::new(space.clone(), SeedDistribution::Uniform, 1.5, 0.7).unwrap();
    let all = Net {
        points: (0..4).map(Point::Index).collect(),
        mesh: 0.0,
    };
    let mut rng = Seed(5).stream();
    for _ in 0..200 {
        let r = simulate_realization(&p, &mut rng);
        let a = cover_time_exact(&r, &space, 0.7).unwrap().time;
        assert_eq!(a, cover_time_net(&r, &space, &all, 0.7).unwrap().time);
    }
}

#[test]
fn nested_nets_are_monotone() {
    let p = circle_params(10.0);
    let coarse = p.space.epsilon_net(1.0).unwrap();
    let mut fine = coarse.clone();
    fine.points.extend(p.space.epsilon_net(0.3).unwrap().points);
    let mut rng = Seed(6).stream();
    for _ in 0..200 {
        let r = simulate_realization(&p, &mut rng);
        let a = cover_time_net(&r, &p.space, &coarse, 1.0).unwrap().time;
        let b = cover_time_net(&r, &p.space, &fine, 1.0).unwrap().time;
        assert!(b >= a);
    }
    let empty = Net {
        points: vec![],
        mesh: 1.0,
    };
    let r = simulate_realization(&p, &mut rng);
    assert!(cover_time_net(&r, &p.space, &empty, 1.0).is_err());
}

#[test]
fn deleting_an_arrival_never_speeds_cover() {
    let p = circle_params(8.0);
    let mut rng = Seed(9).stream();
    for _ in 0..200 {
        let r = simulate_realization(&p, &mut rng);
        let c = cover_time_exact(&r, &p.space, 1.0).unwrap().time;
        for i in 0..r.arrivals.len().min(6) {
            let loo = r.without(i);
            if loo.arrivals.is_empty() {
                continue;
            }
            assert!(cover_time_exact(&loo, &p.space, 1.0).unwrap().time >= c - 1e-12);
        }
    }
}

#[test]
fn tail_examples() {
    let p = circle_params(100.0);
    let s = Point::Pos(3.0);
    assert_eq!(point_tail_analytic(&p, &s, 0.0).unwrap(), 1.0);
    for t in [1.0f64, 10.0, 50.0] {
        let want = (-t * t / 100.0).exp();
        assert!((point_tail_analytic(&p, &s, t).unwrap() - want).abs() < 1e-14);
    }
    let atom = SeedDistribution::atoms(vec![(Point::Pos(2.0), 1.0)]).unwrap();
    let q = GrowthParams::new(Space::segment(4.0).unwrap(), atom, 1.7, 1.0).unwrap();
    for t in [0.3, 2.0, 9.0] {
        let tail = point_tail_analytic(&q, &Point::Pos(2.0), t).unwrap();
        assert!((tail - (-1.7 * t).exp()).abs() < 1e-14);
    }
    assert!(point_tail_analytic(&p, &s, -1.0).is_err());
}

#[test]
fn empirical_tail_matches_analytic() {
    let p = circle_params(100.0);
    let s = Point::Pos(0.0);
    let t = 6.0;
    let hits = crate::rng::replicate(Seed(10), 10_000, |_, rng| {
        let r = simulate_until(&p, t, rng);
        point_cover_time(&r, &p.space, &s, 1.0) > t
    });
    let e = Estimate::proportion(hits.iter().filter(|&&h| h).count(), hits.len());
    let want = point_tail_analytic(&p, &s, t).unwrap();
    assert!((e.mean - want).abs() < 3.0 * e.se, "{e:?} vs {want}");
}

#[test]
fn c_star_on_circle_matches_closed_form() {
    for l in [10.0, 100.0, 1000.0] {
        let p = circle_params(l);
        let net = Net {
            points: vec![Point::Pos(0.0), Point::Pos(0.3 * l)],
            mesh: l,
        };
        let c = c_star(&p, &net).unwrap();
        let want = circle_point_mean(l);
        assert!((c.value - want).abs() / want < 1e-7, "L={l}: {} vs {want}", c.value);
    }
    let c = c_star(
        &circle_params(100.0),
        &Net {
            points: vec![Point::Pos(1.0)],
            mesh: 1.0,
        },
    )
    .unwrap();
    assert!((c.value - 0.5 * (PI * 100.0).sqrt()).abs() < 1e-5);
}

#[test]
fn c_star_atom_is_mean_first_arrival() {
    let atom = SeedDistribution::atoms(vec![(Point::Pos(1.0), 1.0)]).unwrap();
    let p = GrowthParams::new(Space::segment(3.0).unwrap(), atom, 2.5, 1.0).unwrap();
    let c = c_star(
        &p,
        &Net {
            points: vec![Point::Pos(1.0)],
            mesh: 0.0,
        },
    )
    .unwrap();
    assert!((c.value - 0.4).abs() < 1e-9);
}

#[test]
fn segment_example_point_mean() {
    // mass 1/n within reach until radius n: E C(n) = n (1 - 1/e) + 1/e
    let n = 100.0;
    let m = expected_point_cover_time(&segment_example(n), &Point::Pos(n)).unwrap();
    let want = n * (1.0 - (-1.0f64).exp()) + (-1.0f64).exp();
    assert!((m.value - want).abs() / want < 1e-8);
}

/// Midpoint-rule oracle for `E C(s)` built only from ball masses.
fn riemann_point_mean(p: &GrowthParams, s: &Point, steps: usize) -> f64 {
    let t_max = p.sweep_time();
    let h = t_max / steps as f64;
    let mut integral = 0.0;
    let mut mass = 0.0;
    for i in 0..steps {
        let t = (i as f64 + 0.5) * h;
        let m_mid = mass + 0.5 * h * p.space.ball_measure(&p.mu, s, p.v * t).unwrap();
        integral += h * (-p.lambda * m_mid).exp();
        mass += h * p.space.ball_measure(&p.mu, s, p.v * t).unwrap();
    }
    integral + (-p.lambda * mass).exp() / p.lambda
}

#[test]
fn quadrature_matches_riemann_oracle() {
    let torus = GrowthParams::new(Space::torus(6.0, 4.0).unwrap(), SeedDistribution::Uniform, 0.5, 1.0).unwrap();
    let mixed = GrowthParams::new(
        Space::segment(8.0).unwrap(),
        SeedDistribution::mixture(vec![(Point::Pos(1.0), 1.0)], 0.4).unwrap(),
        1.0,
        2.0,
    )
    .unwrap();
    for (p, s) in [(torus, Point::Torus(1.0, 1.0)), (mixed, Point::Pos(6.5))] {
        let q = expected_point_cover_time(&p, &s).unwrap().value;
        let oracle = riemann_point_mean(&p, &s, 200_000);
        assert!((q - oracle).abs() / q < 1e-5, "{q} vs {oracle}");
    }
}

#[test]
fn point_means_match_quadrature_on_torus() {
    let p = GrowthParams::standardized(Space::torus(5.0, 3.0).unwrap(), SeedDistribution::Uniform).unwrap();
    let s = [Point::Torus(0.0, 0.0)];
    let e = point_cover_means(&p, &s, 20_000, Seed(3)).unwrap()[0];
    let q = expected_point_cover_time(&p, &s[0]).unwrap().value;
    assert!((e.mean - q).abs() < 3.0 * e.se, "{e:?} vs {q}");
}

#[test]
fn pathwise_diameter_bound() {
    let p = circle_params(100.0);
    let g = estimate_cover_stats(&p, 2000, Seed(1)).unwrap();
    assert_eq!(g.pathwise_violations(), 0);
    assert_eq!(g.method, CoverMethod::Exact);
}

#[test]
fn single_point_space_cover_is_first_arrival() {
    let space = Space::FiniteMetric(FiniteMetric::new(vec![vec![0.0]]).unwrap());
    let mu = SeedDistribution::atoms(vec![(Point::Index(0), 1.0)]).unwrap();
    let p = GrowthParams::new(space, mu, 4.0, 1.0).unwrap();
    let g = estimate_cover_stats(&p, 10_000, Seed(2)).unwrap();
    assert_eq!(g.stats.samples, g.first_arrivals);
    assert!((g.stats.mean - 0.25).abs() < 3.0 * g.stats.se_mean);
}

#[test]
fn net_method_on_torus_respects_bounds() {
    let p = GrowthParams::standardized(Space::torus(4.0, 4.0).unwrap(), SeedDistribution::Uniform).unwrap();
    let g = estimate_cover_stats(&p, 200, Seed(4)).unwrap();
    assert!(matches!(g.method, CoverMethod::Net { .. }));
    assert_eq!(g.pathwise_violations(), 0);
}

#[test]
fn standardize_examples() {
    let p = circle_params(7.0);
    let (s, u) = standardize(&p);
    assert_eq!(s.space, p.space);
    assert_eq!((u.time_scale, u.length_scale), (1.0, 1.0));

    let p = GrowthParams::new(Space::segment(9.0).unwrap(), SeedDistribution::Uniform, 1.0, 3.0).unwrap();
    assert_eq!(standardize(&p).0.space, Space::segment(3.0).unwrap());

    let p = GrowthParams::new(Space::circle(10.0).unwrap(), SeedDistribution::Uniform, 2.0, 1.0).unwrap();
    let (s, u) = standardize(&p);
    assert_eq!(s.space, Space::circle(20.0).unwrap());
    assert_eq!((s.lambda, s.v, u.time_scale, u.length_scale), (1.0, 1.0, 0.5, 0.5));
    let orig = estimate_cover_stats(&p, 10_000, Seed(20)).unwrap().stats;
    let std = estimate_cover_stats(&s, 10_000, Seed(21)).unwrap().stats;
    let se = (4.0 * orig.se_mean.powi(2) + std.se_mean.powi(2)).sqrt();
    assert!((2.0 * orig.mean - std.mean).abs() < 3.0 * se);
}

#[test]
fn realization_csv_layout() {
    let r = single(0.5, Point::Torus(1.0, 2.0));
    let mut buf = Vec::new();
    write_realizations_csv(&mut buf, &[r.clone(), r]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "replicate,tau,coord1,coord2");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1,5.0000000000000000e-1,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn envelope_agrees_with_candidates(
        seeds in prop::collection::vec((0.0..10.0f64, 0.0..5.0f64), 1..12),
        circular in any::<bool>(),
        v in 0.2..3.0f64,
    ) {
        let mut seeds = seeds;
        seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
        let real = GrowthRealization {
            arrivals: seeds.iter().map(|&(x, t)| Arrival { tau: t, sigma: Point::Pos(x) }).collect(),
            horizon: 100.0,
        };
        let space = if circular { Space::circle(10.0).unwrap() } else { Space::segment(10.0).unwrap() };
        let fast = cover_time_exact(&real, &space, v).unwrap().time;
        let slow = cover_time_all_pairs(&real, &space, v).unwrap();
        prop_assert!((fast - slow).abs() < 1e-9);
        let t1 = real.first_arrival().unwrap();
        prop_assert!(fast >= t1 && fast <= t1 + space.diameter() / v + 1e-12);
    }
}
