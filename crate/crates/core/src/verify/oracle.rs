use serde::{Deserialize, Serialize};

use crate::distribution::TypeDistribution;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::menu::Menu;
use crate::model::{sender_value, Environment, InfluenceBundle};

/// Finitely many types with equal masses, one per quantile cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteInstance {
    pub env: Environment,
    pub types: Vec<f64>,
    pub weights: Vec<f64>,
    /// Cell edges `F^-1(k/N)`, `k = 0..=N`.
    pub boundaries: Vec<f64>,
}

impl DiscreteInstance {
    pub fn new(env: Environment, types: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if types.len() != weights.len() || types.is_empty() {
            return Err(Error::InvalidArgument(
                "types and weights must match".into(),
            ));
        }
        if types.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "types must strictly increase".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "weights must be a probability vector".into(),
            ));
        }
        let mut boundaries = Vec::with_capacity(types.len() + 1);
        boundaries.push(types[0]);
        boundaries.extend(types.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        boundaries.push(types[types.len() - 1]);
        Ok(DiscreteInstance {
            env,
            types,
            weights,
            boundaries,
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// `n` equal-mass cells, each represented by the midpoint of its edges.
pub fn discretize(
    env: &Environment,
    dist: &TypeDistribution,
    n: usize,
) -> Result<DiscreteInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 cells, got {n}"
        )));
    }
    let boundaries = (0..=n)
        .map(|k| dist.quantile(k as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    let types: Vec<f64> = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(DiscreteInstance {
        env: *env,
        types,
        weights: vec![1.0 / n as f64; n],
        boundaries,
    })
}

/// Optimal discrete menu found by linear programming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub n: usize,
    pub coercion: bool,
    pub revenue: f64,
    pub types: Vec<f64>,
    pub bundles: Vec<InfluenceBundle>,
    pub prices: Vec<f64>,
    pub utilities: Vec<f64>,
    pub outside_option: Option<InfluenceBundle>,
    pub iterations: usize,
    /// Largest constraint violation of the returned point.
    pub lp_residual: f64,
}

impl OracleSolution {
    /// Worst misreporting gain and worst participation shortfall.
    pub fn discrete_violations(&self) -> (f64, f64) {
        let outside = self.outside_option.unwrap_or(InfluenceBundle::ORIGIN);
        let mut ic: f64 = 0.0;
        let mut ir: f64 = 0.0;
        for (i, &t) in self.types.iter().enumerate() {
            let own = sender_value(&self.bundles[i], t) - self.prices[i];
            ir = ir.max(sender_value(&outside, t) - own);
            for j in 0..self.n {
                ic = ic.max(sender_value(&self.bundles[j], t) - self.prices[j] - own);
            }
        }
        (ic, ir)
    }
}

/// Revenue-maximising menu for a discrete type set, with every pairwise
/// incentive constraint imposed. Under `coercion` the outside option is a
/// choice variable as well.
pub fn lp_oracle(instance: &DiscreteInstance, coercion: bool) -> Result<OracleSolution> {
    let n = instance.len();
    let env = &instance.env;
    let (mu_l, mu_0, mu_h) = (env.mu_low(), env.mu_prior(), env.mu_high());
    let ql = |i: usize| 3 * i;
    let qr = |i: usize| 3 * i + 1;
    let p = |i: usize| 3 * i + 2;
    let (ol, or) = (3 * n, 3 * n + 1);
    let vars = 3 * n + if coercion { 2 } else { 0 };

    let mut lp = LinearProgram::new(Sense::Maximize, vars);
    let implementable = |lp: &mut LinearProgram, l: usize, r: usize| {
        lp.add_constraint(vec![(l, 1.0), (r, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(
            vec![(l, mu_h - mu_l), (r, -(1.0 - mu_h))],
            Relation::Le,
            mu_h - mu_0,
        );
        lp.add_constraint(
            vec![(l, -mu_l), (r, mu_h - mu_l)],
            Relation::Le,
            mu_0 - mu_l,
        );
    };
    for i in 0..n {
        lp.set_free(p(i));
        lp.objective[p(i)] = instance.weights[i];
        implementable(&mut lp, ql(i), qr(i));
    }
    if coercion {
        implementable(&mut lp, ol, or);
    }
    for (i, &t) in instance.types.iter().enumerate() {
        let mut ir = vec![(ql(i), 1.0 - t), (qr(i), t), (p(i), -1.0)];
        if coercion {
            ir.push((ol, -(1.0 - t)));
            ir.push((or, -t));
        }
        lp.add_constraint(ir, Relation::Ge, 0.0);
        for j in (0..n).filter(|&j| j != i) {
            lp.add_constraint(
                vec![
                    (ql(i), 1.0 - t),
                    (qr(i), t),
                    (p(i), -1.0),
                    (ql(j), -(1.0 - t)),
                    (qr(j), -t),
                    (p(j), 1.0),
                ],
                Relation::Ge,
                0.0,
            );
        }
    }

    let sol = lp.solve().map_err(|e| match e {
        crate::lp::LpError::Infeasible | crate::lp::LpError::Unbounded => Error::InvalidArgument(
            format!("oracle LP reported {e}, which the screening problem rules out"),
        ),
        other => Error::Lp(other),
    })?;
    let x = &sol.x;
    let bundles: Vec<InfluenceBundle> = (0..n)
        .map(|i| InfluenceBundle::new(x[ql(i)], x[qr(i)]))
        .collect();
    let prices: Vec<f64> = (0..n).map(|i| x[p(i)]).collect();
    let utilities = instance
        .types
        .iter()
        .enumerate()
        .map(|(i, &t)| sender_value(&bundles[i], t) - prices[i])
        .collect();
    Ok(OracleSolution {
        n,
        coercion,
        revenue: sol.objective,
        types: instance.types.clone(),
        bundles,
        prices,
        utilities,
        outside_option: coercion.then(|| InfluenceBundle::new(x[ol], x[or])),
        iterations: sol.iterations,
        lp_residual: lp.max_violation(x),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeComparison {
    pub theta: f64,
    pub oracle_bundle: InfluenceBundle,
    /// Item the type picks from the analytic menu; `None` if it stays out.
    pub menu_bundle: Option<InfluenceBundle>,
    pub distance: f64,
    pub oracle_utility: f64,
    pub menu_utility: f64,
    /// Within one cell of a segment boundary of the analytic menu.
    pub near_knot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub oracle_revenue: f64,
    /// Analytic menu's revenue when each discrete type picks its best item.
    pub menu_revenue: f64,
    /// `oracle_revenue - menu_revenue`.
    pub gap: f64,
    pub max_distance_away_from_knots: f64,
    pub mismatches_away_from_knots: usize,
    pub per_type: Vec<TypeComparison>,
}

impl OracleComparison {
    pub fn within(&self, tolerance: f64) -> bool {
        self.gap.abs() <= tolerance
    }
}

/// Lets every discrete type choose freely from `menu` and compares the
/// outcome with the oracle's allocation.
pub fn compare_to_oracle(
    menu: &Menu,
    instance: &DiscreteInstance,
    oracle: &OracleSolution,
) -> OracleComparison {
    let knots = menu.knots();
    let b = &instance.boundaries;
    let mut menu_revenue = 0.0;
    let mut per_type = Vec::with_capacity(instance.len());
    for (i, &t) in instance.types.iter().enumerate() {
        let choice = menu.choose(t);
        let (menu_bundle, menu_utility) = match choice {
            Some((item, v)) => {
                menu_revenue += instance.weights[i] * item.price;
                (Some(item.bundle), v)
            }
            None => (None, sender_value(&menu.outside_option, t)),
        };
        let lo = b[i.saturating_sub(1)];
        let hi = b[(i + 2).min(b.len() - 1)];
        let near_knot = knots.iter().any(|&k| k >= lo && k <= hi);
        let oracle_bundle = oracle.bundles[i];
        let distance = oracle_bundle.distance(&menu_bundle.unwrap_or(menu.outside_option));
        per_type.push(TypeComparison {
            theta: t,
            oracle_bundle,
            menu_bundle,
            distance,
            oracle_utility: oracle.utilities[i],
            menu_utility,
            near_knot,
        });
    }
    let away: Vec<&TypeComparison> = per_type.iter().filter(|c| !c.near_knot).collect();
    OracleComparison {
        oracle_revenue: oracle.revenue,
        menu_revenue,
        gap: oracle.revenue - menu_revenue,
        max_distance_away_from_knots: away.iter().map(|c| c.distance).fold(0.0, f64::max),
        mismatches_away_from_knots: away.iter().filter(|c| c.distance > 1e-6).count(),
        per_type,
    }
}
