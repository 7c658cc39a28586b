mod common;

use common::{balanced_example, env, unbalanced_example, uniform};
use influence::menu::Price;
use influence::{
    coercion_menu, compare_to_oracle, contains, discretize, extended_menu, lp_oracle, optimal_menu,
    sender_value, DiscreteInstance, InfluenceBundle,
};

#[test]
fn balanced_gap_shrinks_as_cells_double() {
    let (e, d) = balanced_example();
    let analytic = optimal_menu(&e, &d).unwrap().revenue(&d);
    assert!((analytic - 43.0 / 72.0).abs() <= 1e-12);
    let mut gaps = Vec::new();
    for n in [25, 50, 100, 200] {
        let sol = lp_oracle(&discretize(&e, &d, n).unwrap(), false).unwrap();
        let (ic, ir) = sol.discrete_violations();
        assert!(ic <= 1e-9 && ir <= 1e-9, "n={n}: {ic} {ir}");
        gaps.push((sol.revenue - analytic).abs());
    }
    assert!(gaps[3] <= 0.01, "{gaps:?}");
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0], "{gaps:?}");
        let ratio = w[1] / w[0];
        assert!((0.3..=3.0).contains(&ratio), "{gaps:?}");
    }
}

#[test]
fn unbalanced_oracle_matches_screening_and_coercion() {
    let (e, d) = unbalanced_example();
    let inst = discretize(&e, &d, 200).unwrap();
    let menu = optimal_menu(&e, &d).unwrap();
    let plain = lp_oracle(&inst, false).unwrap();
    let cmp = compare_to_oracle(&menu, &inst, &plain);
    assert!((plain.revenue - menu.revenue(&d)).abs() <= 0.01);
    assert!(cmp.within(0.01), "{}", cmp.gap);
    assert_eq!(cmp.mismatches_away_from_knots, 0);
    // Some left-leaning types buy R*.
    let r_star = e.r_star();
    assert!(plain
        .types
        .iter()
        .zip(&plain.bundles)
        .any(|(&t, b)| t < 0.5 && b.distance(&r_star) <= 1e-6));

    let coerced = lp_oracle(&inst, true).unwrap();
    let c = coercion_menu(&e, &d).unwrap();
    assert!((c.revenue - 0.481944).abs() <= 1e-6);
    assert!((coerced.revenue - 0.481944).abs() <= 0.01);
    let outside = coerced.outside_option.unwrap();
    assert!(
        (outside.q_l - 0.1).abs() <= 0.02 && outside.q_r.abs() <= 0.02,
        "{outside}"
    );
    assert!(coerced.revenue >= plain.revenue - 1e-9);
    let (ic, ir) = coerced.discrete_violations();
    assert!(ic <= 1e-9 && ir <= 1e-9);
    assert!(compare_to_oracle(&c.menu, &inst, &coerced).within(0.01));
}

#[test]
fn coercion_never_lowers_oracle_revenue() {
    for (e, d) in [
        balanced_example(),
        unbalanced_example(),
        (env(0.1, 0.2, 0.8), uniform(-0.3, 1.2)),
    ] {
        let inst = discretize(&e, &d, 30).unwrap();
        let plain = lp_oracle(&inst, false).unwrap();
        let coerced = lp_oracle(&inst, true).unwrap();
        assert!(coerced.revenue >= plain.revenue - 1e-9);
        assert!(plain.lp_residual <= 1e-9 && coerced.lp_residual <= 1e-9);
    }
}

#[test]
fn wrong_prices_are_caught() {
    let (e, d) = balanced_example();
    let inst = discretize(&e, &d, 50).unwrap();
    let sol = lp_oracle(&inst, false).unwrap();
    let good = optimal_menu(&e, &d).unwrap();
    assert!(compare_to_oracle(&good, &inst, &sol).within(0.01));
    let mut bad = good.clone();
    for s in &mut bad.segments {
        // Full extraction from the segment's middle type.
        let mid = 0.5 * (s.theta_lo + s.theta_hi);
        s.price = Price::Flat {
            value: sender_value(&s.bundle, mid),
        };
    }
    let cmp = compare_to_oracle(&bad, &inst, &sol);
    assert!(!cmp.within(0.01) && cmp.gap > 0.02, "{}", cmp.gap);
}

/// Best revenue from a fixed pair of bundles for two equally likely types,
/// by enumerating vertices of the two-price feasible region.
fn pair_revenue(types: [f64; 2], b: [InfluenceBundle; 2]) -> f64 {
    let u = |i: usize, j: usize| sender_value(&b[j], types[i]);
    // Rows a1 p1 + a2 p2 <= c.
    let rows: [(f64, f64, f64); 4] = [
        (1.0, 0.0, u(0, 0)),
        (0.0, 1.0, u(1, 1)),
        (1.0, -1.0, u(0, 0) - u(0, 1)),
        (-1.0, 1.0, u(1, 1) - u(1, 0)),
    ];
    let mut best = f64::NEG_INFINITY;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a1, b1, c1) = rows[i];
            let (a2, b2, c2) = rows[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-12 {
                continue;
            }
            let p1 = (c1 * b2 - c2 * b1) / det;
            let p2 = (a1 * c2 - a2 * c1) / det;
            if rows.iter().all(|&(a, bb, c)| a * p1 + bb * p2 <= c + 1e-12) {
                best = best.max(0.5 * (p1 + p2));
            }
        }
    }
    best
}

#[test]
fn two_type_oracle_matches_vertex_enumeration() {
    for e in [
        env(0.25, 0.5, 2.0 / 3.0),
        env(0.2, 0.45, 0.7),
        env(0.25, 0.3, 2.0 / 3.0),
    ] {
        let types = [0.25, 0.75];
        let inst = DiscreteInstance::new(e, types.to_vec(), vec![0.5, 0.5]).unwrap();
        let sol = lp_oracle(&inst, false).unwrap();
        let candidates: Vec<InfluenceBundle> = [
            InfluenceBundle::ORIGIN,
            e.r0_star(),
            e.r_star(),
            e.l_star(),
            e.l0_star(),
            InfluenceBundle::EQUALIZING,
            e.crossing_bundle(),
        ]
        .into_iter()
        .filter(|b| contains(&e, b).inside)
        .collect();
        let mut best = f64::NEG_INFINITY;
        for &b0 in &candidates {
            for &b1 in &candidates {
                best = best.max(pair_revenue(types, [b0, b1]));
            }
        }
        assert!(
            (sol.revenue - best).abs() <= 1e-9,
            "{} vs {best}",
            sol.revenue
        );
    }
}

#[test]
fn extended_menu_agrees_with_oracle() {
    let e = env(0.25, 0.5, 2.0 / 3.0);
    let d = uniform(-0.5, 3.0);
    let menu = extended_menu(&e, &d).unwrap();
    let labels: Vec<&str> = menu.segments.iter().map(|s| s.label.as_str()).collect();
    assert!(
        labels.contains(&"R0*") && labels.contains(&"R*"),
        "{labels:?}"
    );
    let inst = discretize(&e, &d, 100).unwrap();
    let sol = lp_oracle(&inst, false).unwrap();
    let cmp = compare_to_oracle(&menu, &inst, &sol);
    assert!(cmp.within(0.01), "{}", cmp.gap);
    assert_eq!(cmp.mismatches_away_from_knots, 0);
}
