mod common;

use common::{env, linear_density, random_instance, uniform};
use influence::distribution::solve_thresholds_on;
use influence::menu::{willingness_to_pay, MenuKind};
use influence::{
    access_pricing, bundle_to_experiment, check_assumptions, coercion_menu, contains, first_best,
    geometry, is_garbling, mirror, optimal_menu, sender_value, solve_thresholds, verify_menu,
    Classification, Environment, InfluenceBundle, TypeDistribution,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn environments() -> impl Strategy<Value = Environment> {
    (0.0..0.9f64, 0.05..0.95f64, 0.05..0.95f64).prop_filter_map("ordered", |(a, s, t)| {
        let mu_low = a;
        let mu_high = mu_low + (1.0 - mu_low) * (0.1 + 0.9 * t);
        let mu_prior = mu_low + (mu_high - mu_low) * s;
        Environment::new(mu_low, mu_prior, mu_high.min(1.0)).ok()
    })
}

fn grid_bundles(n: usize) -> impl Iterator<Item = InfluenceBundle> {
    (0..n).flat_map(move |i| {
        (0..n).map(move |j| {
            InfluenceBundle::new(i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_on_grid(e in environments()) {
        for b in grid_bundles(50).filter(|b| contains(&e, b).inside) {
            let back = bundle_to_experiment(&e, &b).unwrap().bundle();
            prop_assert!(back.distance(&b) <= 1e-10, "{b} -> {back}");
        }
    }

    #[test]
    fn membership_matches_constructibility(e in environments(), pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 100)) {
        let random = pts.into_iter().map(|(a, b)| InfluenceBundle::new(a, b));
        for b in grid_bundles(50).chain(random) {
            prop_assert_eq!(contains(&e, &b).inside, bundle_to_experiment(&e, &b).is_ok(), "{}", b);
        }
    }

    #[test]
    fn vertices_match_pairwise_line_intersections(e in environments()) {
        // Lines a q_L + b q_R = c for the three faces and both axes.
        let (l, p, h) = (e.mu_low(), e.mu_prior(), e.mu_high());
        let lines = [
            (1.0, 1.0, 1.0),
            (h - l, -(1.0 - h), h - p),
            (-l, h - l, p - l),
            (1.0, 0.0, 0.0),
            (0.0, 1.0, 0.0),
        ];
        let mut found: Vec<InfluenceBundle> = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let q = InfluenceBundle::new((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det);
                if q.q_l >= -1e-12 && q.q_r >= -1e-12 && contains(&e, &q).inside
                    && !found.iter().any(|f| f.distance(&q) < 1e-9)
                {
                    found.push(q);
                }
            }
        }
        let named = geometry(&e).extreme_points.named();
        for f in &found {
            prop_assert!(named.iter().any(|(_, v)| v.distance(f) < 1e-9), "stray vertex {f}");
        }
        for (name, v) in named {
            prop_assert!(found.iter().any(|f| f.distance(&v) < 1e-9), "{name} not a vertex");
            prop_assert!(contains(&e, &v).binding().len() + usize::from(v.q_l.abs() < 1e-12) + usize::from(v.q_r.abs() < 1e-12) >= 2);
        }
    }

    #[test]
    fn mirror_is_an_involution(e in environments(), lo in -1.0..0.4f64, w in 0.2..2.0f64) {
        let d = uniform(lo, lo + w);
        let (e1, d1) = mirror(&e, &d);
        let (e2, d2) = mirror(&e1, &d1);
        prop_assert!((e2.mu_low() - e.mu_low()).abs() <= 1e-15);
        prop_assert!((e2.mu_prior() - e.mu_prior()).abs() <= 1e-15);
        prop_assert!((e2.mu_high() - e.mu_high()).abs() <= 1e-15);
        prop_assert!((d2.low() - d.low()).abs() <= 1e-15 && (d2.high() - d.high()).abs() <= 1e-15);
        for k in 0..=20 {
            let t = d.low() + (d.high() - d.low()) * k as f64 / 20.0;
            prop_assert!((d2.cdf(t) - d.cdf(t)).abs() <= 1e-15);
        }
        if e.classification() == Classification::MirrorUnbalanced {
            prop_assert_eq!(e1.classification(), Classification::Unbalanced);
        }
    }

    #[test]
    fn virtual_types_straddle_the_type(lo in -1.0..0.45f64, w in 0.2..2.0f64, tilt in -0.9..0.9f64, u in 0.01..0.99f64) {
        let d = linear_density(lo, lo + w, tilt);
        let t = lo + w * u;
        prop_assert!(d.virtual_minus(t).unwrap() > t);
        prop_assert!(d.virtual_plus(t).unwrap() < t);
    }
}

#[test]
fn garbling_is_transitive_on_menu_experiments() {
    let mut experiments = Vec::new();
    for (e, d) in [common::balanced_example(), common::unbalanced_example()] {
        let menus = [
            optimal_menu(&e, &d).unwrap(),
            coercion_menu(&e, &d).unwrap().menu,
        ];
        for m in menus {
            for s in &m.segments {
                experiments.push((e, bundle_to_experiment(&e, &s.bundle).unwrap()));
            }
        }
    }
    let mut checked = 0;
    for (ea, a) in &experiments {
        for (eb, b) in &experiments {
            for (ec, c) in &experiments {
                if ea != eb || eb != ec {
                    continue;
                }
                let ab = is_garbling(ea, a, b).unwrap().garbling;
                let bc = is_garbling(ea, b, c).unwrap().garbling;
                if ab && bc {
                    assert!(is_garbling(ea, a, c).unwrap().garbling);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 10);
}

/// Shared random admissible instances for the menu invariants.
fn instances(count: usize, seed: u64) -> Vec<(Environment, TypeDistribution)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng)).collect()
}

#[test]
fn thresholds_are_ordered_accurate_and_grid_independent() {
    for (e, d) in instances(40, 11) {
        let t = solve_thresholds(&d, &e).unwrap();
        assert!(d.low() < t.theta_star && t.theta_star < 0.5);
        assert!(0.5 < t.theta_star_star_b && t.theta_star_star_b < d.high());
        assert!(t.theta_star < t.theta_star_star_u && t.theta_star_star_u <= d.high());
        assert!((d.virtual_minus(t.theta_star).unwrap() - 0.5).abs() <= 1e-10);
        assert!((d.virtual_plus(t.theta_star_star_b).unwrap() - 0.5).abs() <= 1e-10);
        if let Some(target) = e.right_extreme_target() {
            if t.theta_star_star_u < d.high() {
                assert!((d.virtual_minus(t.theta_star_star_u).unwrap() - target).abs() <= 1e-10);
            }
        }
        let fine = solve_thresholds_on(&d, &e, 4000).unwrap();
        assert!((fine.theta_star - t.theta_star).abs() <= 1e-10);
        assert!((fine.theta_star_star_u - t.theta_star_star_u).abs() <= 1e-10);
    }
}

#[test]
fn menus_satisfy_envelope_monotonicity_and_incentive_constraints() {
    for (e, d) in instances(30, 12) {
        let mut menus = vec![optimal_menu(&e, &d).unwrap()];
        let c = coercion_menu(&e, &d).unwrap();
        menus.push(c.menu);
        for m in menus {
            for s in &m.segments {
                let mid = 0.5 * (s.theta_lo + s.theta_hi);
                for t in [s.theta_lo, mid, s.theta_hi] {
                    let lhs = s.price.at(t);
                    let rhs = sender_value(&s.bundle, t) - m.envelope_utility(t).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
                }
            }
            let tilts: Vec<f64> = m.segments.iter().map(|s| s.bundle.tilt()).collect();
            assert!(tilts.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{tilts:?}");
            let r = verify_menu(&m, 200);
            assert!(r.passes(), "{e:?} {d:?} {r:?}");
            if m.kind != MenuKind::Coercive {
                assert!(m.indirect_utility(m.theta0).unwrap().abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn allocation_shapes() {
    for (e, d) in instances(30, 13) {
        let m = optimal_menu(&e, &d).unwrap();
        let grid: Vec<f64> = (0..=200)
            .map(|k| d.low() + (d.high() - d.low()) * k as f64 / 200.0)
            .collect();
        let q: Vec<InfluenceBundle> = grid.iter().map(|&t| m.allocation(t).unwrap()).collect();
        let tol = 1e-12;
        match m.kind {
            MenuKind::Balanced => {
                assert!(q.windows(2).all(|w| w[1].q_l <= w[0].q_l + tol));
                assert!(q.windows(2).all(|w| w[1].q_r >= w[0].q_r - tol));
            }
            MenuKind::Unbalanced if !m.mirrored => {
                assert!(q.windows(2).all(|w| w[1].q_l <= w[0].q_l + tol));
                let peak = q.iter().map(|b| b.q_r).fold(f64::MIN, f64::max);
                let k = q.iter().position(|b| b.q_r == peak).unwrap();
                assert!(q[..=k].windows(2).all(|w| w[1].q_r >= w[0].q_r - tol));
                assert!(q[k..].windows(2).all(|w| w[1].q_r <= w[0].q_r + tol));
            }
            _ => {}
        }
    }
}

#[test]
fn revenue_dominance_chain() {
    for (e, d) in instances(40, 14) {
        let access = access_pricing(&e, &d).unwrap().revenue;
        let screening = optimal_menu(&e, &d).unwrap().revenue(&d);
        let coercive = coercion_menu(&e, &d).unwrap().revenue;
        let fb = first_best(&e, &d).unwrap().revenue(&d);
        assert!(access <= screening + 1e-9, "{access} {screening}");
        assert!(screening <= coercive + 1e-9);
        assert!(coercive <= fb + 1e-9, "{coercive} {fb} {e:?} {d:?}");
    }
}

#[test]
fn access_buyers_value_access_at_the_price() {
    for (e, d) in instances(30, 15) {
        let a = access_pricing(&e, &d).unwrap();
        for iv in &a.buying_set {
            for k in 0..=50 {
                let t = iv[0] + (iv[1] - iv[0]) * k as f64 / 50.0;
                assert!(willingness_to_pay(&e, t) >= a.price - 1e-12);
            }
        }
    }
}

#[test]
fn all_moderate_types_are_never_coerced() {
    for (e, _) in instances(20, 16) {
        let d = uniform(0.0, 1.0);
        if check_assumptions(&d, &e).a2_ok {
            let c = coercion_menu(&e, &d).unwrap();
            assert_eq!(c.outside_option, InfluenceBundle::ORIGIN);
            assert_eq!(c.revenue_gain, 0.0);
        }
    }
}

#[test]
fn boundary_environments_are_named() {
    assert_eq!(
        env(0.25, 1.0 / 3.0, 2.0 / 3.0).classification(),
        Classification::BoundaryBalancedUnbalanced
    );
    assert_eq!(
        env(0.2, 0.6, 0.7).classification(),
        Classification::BoundaryBalancedMirror
    );
}
