//! Independent certification of menus: grid checks of the screening
//! constraints and a discrete-type linear-programming oracle.

mod oracle;

use serde::{Deserialize, Serialize};

use crate::menu::Menu;
use crate::model::{contains, sender_value};
use crate::tolerance;

pub use oracle::{
    compare_to_oracle, discretize, lp_oracle, DiscreteInstance, OracleComparison, OracleSolution,
    TypeComparison,
};

/// Worst constraint violations found on a grid of types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub grid_size: usize,
    /// Largest gain from misreporting, with the true type and the deviation
    /// (a grid type's report or a menu item label).
    pub worst_ic_violation: f64,
    pub ic_witness: Option<(f64, String)>,
    /// Largest shortfall of `U` below the outside option.
    pub worst_ir_violation: f64,
    pub ir_witness: Option<f64>,
    pub mon_ok: bool,
    pub mon_witness: Option<usize>,
    pub implementability_ok: bool,
    pub unimplementable: Vec<String>,
    /// Largest gap between `u - p` and the integrated envelope slope.
    pub envelope_residual: f64,
    /// `|U(theta0) - anchor|`.
    pub anchor_residual: f64,
}

impl ViolationReport {
    pub fn ic_ok(&self) -> bool {
        self.worst_ic_violation <= tolerance::INCENTIVE
    }

    pub fn ir_ok(&self) -> bool {
        self.worst_ir_violation <= tolerance::INCENTIVE
    }

    pub fn passes(&self) -> bool {
        self.ic_ok()
            && self.ir_ok()
            && self.mon_ok
            && self.implementability_ok
            && self.envelope_residual <= tolerance::INCENTIVE
            && self.anchor_residual <= tolerance::GEOMETRY
    }
}

/// Checks implementability, participation, pairwise incentive compatibility,
/// monotonicity and the envelope identity on `grid_size` evenly spaced types.
pub fn verify_menu(menu: &Menu, grid_size: usize) -> ViolationReport {
    let grid_size = grid_size.max(2);
    let (lo, hi) = (menu.theta_low, menu.theta_high);
    let types: Vec<f64> = (0..grid_size)
        .map(|k| lo + (hi - lo) * k as f64 / (grid_size - 1) as f64)
        .collect();
    let env = &menu.env;

    let mut unimplementable = Vec::new();
    for s in &menu.segments {
        if !contains(env, &s.bundle).inside {
            unimplementable.push(s.label.clone());
        }
    }
    if !contains(env, &menu.outside_option).inside {
        unimplementable.push("outside option".to_string());
    }

    let mut mon_witness = None;
    for (k, w) in menu.segments.windows(2).enumerate() {
        if w[1].bundle.tilt() < w[0].bundle.tilt() - tolerance::GEOMETRY {
            mon_witness = Some(k + 1);
            break;
        }
    }

    // Reports available to each type: every grid type's allocation and
    // price, plus every menu item.
    let offers: Vec<(f64, crate::model::InfluenceBundle, f64)> = types
        .iter()
        .map(|&t| {
            let s = &menu.segments[menu.segment_index(t).expect("grid inside support")];
            (t, s.bundle, s.price.at(t))
        })
        .collect();
    let items = menu.items();

    let mut worst_ic = 0.0;
    let mut ic_witness = None;
    let mut worst_ir = 0.0;
    let mut ir_witness = None;
    let mut envelope_residual: f64 = 0.0;
    for (i, &t) in types.iter().enumerate() {
        let own = sender_value(&offers[i].1, t) - offers[i].2;
        let outside = sender_value(&menu.outside_option, t);
        if outside - own > worst_ir {
            worst_ir = outside - own;
            ir_witness = Some(t);
        }
        let envelope = menu.envelope_utility(t).expect("grid inside support");
        envelope_residual = envelope_residual.max((own - envelope).abs());
        for &(report, bundle, price) in &offers {
            let gain = sender_value(&bundle, t) - price - own;
            if gain > worst_ic {
                worst_ic = gain;
                ic_witness = Some((t, format!("report {report}")));
            }
        }
        for item in &items {
            let gain = sender_value(&item.bundle, t) - item.price - own;
            if gain > worst_ic {
                worst_ic = gain;
                ic_witness = Some((t, format!("item {}", menu.segments[item.segment].label)));
            }
        }
    }
    let anchor_residual = menu
        .indirect_utility(menu.theta0)
        .map(|u| (u - menu.anchor_utility).abs())
        .unwrap_or(f64::INFINITY);

    ViolationReport {
        grid_size,
        worst_ic_violation: worst_ic,
        ic_witness,
        worst_ir_violation: worst_ir,
        ir_witness,
        mon_ok: mon_witness.is_none(),
        mon_witness,
        implementability_ok: unimplementable.is_empty(),
        unimplementable,
        envelope_residual,
        anchor_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::TypeDistribution;
    use crate::menu::{first_best, optimal_menu, Price};
    use crate::model::Environment;

    fn balanced() -> Menu {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        optimal_menu(&env, &TypeDistribution::uniform(0.0, 1.5).unwrap()).unwrap()
    }

    #[test]
    fn optimal_menu_passes() {
        let r = verify_menu(&balanced(), 500);
        assert!(r.passes(), "{r:?}");
    }

    #[test]
    fn raised_price_breaks_incentive_compatibility() {
        let mut m = balanced();
        if let Price::Flat { value } = &mut m.segments[0].price {
            *value += 0.01;
        }
        let r = verify_menu(&m, 500);
        assert!(!r.ic_ok());
        assert!(r.worst_ic_violation > 0.009);
        let (t, dev) = r.ic_witness.unwrap();
        assert!(t < 0.25);
        assert!(
            dev.contains("equalizing") || dev.starts_with("report"),
            "{dev}"
        );
    }

    #[test]
    fn swapped_segments_break_monotonicity() {
        let mut m = balanced();
        let (a, b) = (m.segments[0].bundle, m.segments[2].bundle);
        m.segments[0].bundle = b;
        m.segments[2].bundle = a;
        assert!(!verify_menu(&m, 100).mon_ok);
    }

    #[test]
    fn first_best_is_not_incentive_compatible() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let fb = first_best(&env, &TypeDistribution::uniform(0.0, 1.5).unwrap()).unwrap();
        let r = verify_menu(&fb, 200);
        assert!(r.ir_ok());
        assert!(r.envelope_residual < 1e-12);
        assert!(!r.ic_ok());
    }
}
