use serde::{Deserialize, Serialize};

use super::{Menu, MenuKind, Price, Segment};
use crate::distribution::{check_assumptions, solve_thresholds, Thresholds, TypeDistribution};
use crate::error::{Error, Result};
use crate::model::{Classification, Environment, InfluenceBundle};

/// Full surplus extraction: `L*` to left-leaning types and `R*` to
/// right-leaning types, each at its own willingness to pay.
pub fn first_best(env: &Environment, dist: &TypeDistribution) -> Result<Menu> {
    check_assumptions(dist, env)
        .require_a2()
        .map_err(|e| match e {
            Error::TypeBounds(msg) => Error::TypeBounds(format!("{msg}; use extended_menu")),
            other => other,
        })?;
    let (lo, hi) = (dist.low(), dist.high());
    let affine = |b: InfluenceBundle| Price::Affine {
        intercept: b.q_l,
        slope: b.tilt(),
    };
    let segments = [(lo, 0.5, env.l_star(), "L*"), (0.5, hi, env.r_star(), "R*")]
        .into_iter()
        .filter(|p| p.1 > p.0)
        .map(|(a, b, bundle, label)| Segment {
            theta_lo: a,
            theta_hi: b,
            label: label.to_string(),
            bundle,
            price: affine(bundle),
        })
        .collect();
    Ok(Menu {
        kind: MenuKind::FirstBest,
        env: *env,
        theta_low: lo,
        theta_high: hi,
        theta0: 0.5,
        anchor_utility: 0.0,
        outside_option: InfluenceBundle::ORIGIN,
        segments,
        thresholds: None,
        mirrored: false,
        warnings: Vec::new(),
    })
}

fn balanced_pieces(
    env: &Environment,
    dist: &TypeDistribution,
    t: &Thresholds,
) -> super::Allocation {
    vec![
        (dist.low(), t.theta_star, env.l_star(), "L*"),
        (
            t.theta_star,
            t.theta_star_star_b,
            InfluenceBundle::EQUALIZING,
            "equalizing",
        ),
        (t.theta_star_star_b, dist.high(), env.r_star(), "R*"),
    ]
}

/// Revenue-maximising menu without coercion.
pub fn optimal_menu(env: &Environment, dist: &TypeDistribution) -> Result<Menu> {
    let class = env.classification();
    if class == Classification::MirrorUnbalanced {
        let menu = optimal_menu(&env.mirrored(), &dist.mirrored())?;
        return Ok(menu.mirrored());
    }
    let thresholds = solve_thresholds(dist, env)?;
    check_assumptions(dist, env).require_a2()?;
    let mut menu = if class.solves_as_balanced() {
        let pieces = balanced_pieces(env, dist, &thresholds);
        let mut m = Menu::from_envelope(
            MenuKind::Balanced,
            env,
            dist,
            pieces,
            0.5,
            InfluenceBundle::ORIGIN,
        );
        if class.is_boundary() {
            m.warnings.push(format!(
                "{class} environment solved as balanced; the equalizing bundle is an extreme point"
            ));
        }
        m
    } else {
        let t = &thresholds;
        let pieces = vec![
            (dist.low(), t.theta_star, env.l_star(), "L*"),
            (t.theta_star, t.theta_star_star_u, env.r_star(), "R*"),
            (t.theta_star_star_u, dist.high(), env.crossing_bundle(), "B"),
        ];
        Menu::from_envelope(
            MenuKind::Unbalanced,
            env,
            dist,
            pieces,
            dist.high(),
            InfluenceBundle::ORIGIN,
        )
    };
    menu.thresholds = Some(thresholds);
    Ok(menu)
}

/// Balanced menu when types are allowed to be extreme enough to prefer
/// `R0*` or `L0*`.
pub fn extended_menu(env: &Environment, dist: &TypeDistribution) -> Result<Menu> {
    let class = env.classification();
    if !class.solves_as_balanced() {
        return Err(Error::NotImplemented(
            "extended menus are only characterised for balanced environments",
        ));
    }
    let t = solve_thresholds(dist, env)?;
    let (lo, hi) = (dist.low(), dist.high());
    let bottom = t.theta_double_dagger.unwrap_or(lo);
    let top = t.theta_dagger.unwrap_or(hi);
    let pieces = vec![
        (lo, bottom, env.l0_star(), "L0*"),
        (bottom, t.theta_star, env.l_star(), "L*"),
        (
            t.theta_star,
            t.theta_star_star_b,
            InfluenceBundle::EQUALIZING,
            "equalizing",
        ),
        (t.theta_star_star_b, top, env.r_star(), "R*"),
        (top, hi, env.r0_star(), "R0*"),
    ];
    let extended = t.theta_dagger.is_some() || t.theta_double_dagger.is_some();
    let kind = if extended {
        MenuKind::Extended
    } else {
        MenuKind::Balanced
    };
    let mut menu = Menu::from_envelope(kind, env, dist, pieces, 0.5, InfluenceBundle::ORIGIN);
    menu.thresholds = Some(t);
    Ok(menu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoercionStatus {
    /// Coercion with `C*` is optimal and the menu is built in closed form.
    Optimal,
    /// Every type is moderate, so the zero outside option is optimal.
    NotBeneficial,
    /// The sufficient conditions do not hold; the screening menu is returned.
    NotEstablished,
    /// Coercion is necessary but no closed form is known; use the LP oracle.
    NecessaryUncharacterised,
    /// Balanced environment: the screening menu is returned.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercionSolution {
    pub status: CoercionStatus,
    pub menu: Menu,
    pub outside_option: InfluenceBundle,
    pub revenue: f64,
    pub screening_revenue: f64,
    pub revenue_gain: f64,
    pub advisory: Option<String>,
}

/// Optimal menu when the intermediary can commit to an outside option.
pub fn coercion_menu(env: &Environment, dist: &TypeDistribution) -> Result<CoercionSolution> {
    let class = env.classification();
    if class == Classification::MirrorUnbalanced {
        let mut sol = coercion_menu(&env.mirrored(), &dist.mirrored())?;
        sol.menu = sol.menu.mirrored();
        sol.outside_option = sol.outside_option.mirrored();
        return Ok(sol);
    }
    let screening = optimal_menu(env, dist)?;
    let screening_revenue = screening.revenue(dist);
    let fallback = |status, advisory: Option<String>| CoercionSolution {
        status,
        outside_option: InfluenceBundle::ORIGIN,
        revenue: screening_revenue,
        screening_revenue,
        revenue_gain: 0.0,
        advisory,
        menu: screening.clone(),
    };
    let moderate = check_assumptions(dist, env).all_moderate;
    if moderate {
        return Ok(fallback(CoercionStatus::NotBeneficial, None));
    }
    if class.solves_as_balanced() {
        return Ok(fallback(
            CoercionStatus::Inapplicable,
            Some(
                "types outside [0, 1] exist; the LP oracle with coercion gives the optimum".into(),
            ),
        ));
    }
    let t = screening
        .thresholds
        .expect("screening menus carry thresholds");
    if t.theta_star_star_u <= 1.0 {
        return Ok(fallback(
            CoercionStatus::NotEstablished,
            Some("theta**_U <= 1: no closed form; use the LP oracle with coercion".into()),
        ));
    }
    if t.theta_star_star_b > 1.0 {
        return Ok(fallback(
            CoercionStatus::NecessaryUncharacterised,
            Some(
                "coercion is necessary but uncharacterised; use the LP oracle with coercion".into(),
            ),
        ));
    }
    let outside = env.coercive_outside_option();
    let (lo, hi) = (dist.low(), dist.high());
    let pieces = vec![
        (lo, t.theta_star, env.l_star(), "L*"),
        (t.theta_star, hi, env.r_star(), "R*"),
    ];
    let mut menu = Menu::from_envelope(MenuKind::Coercive, env, dist, pieces, hi, outside);
    menu.thresholds = Some(t);
    let revenue = menu.revenue(dist);
    Ok(CoercionSolution {
        status: CoercionStatus::Optimal,
        outside_option: outside,
        revenue,
        screening_revenue,
        revenue_gain: revenue - screening_revenue,
        advisory: None,
        menu,
    })
}
