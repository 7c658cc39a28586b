use serde::{Deserialize, Serialize};

use crate::distribution::{check_assumptions, TypeDistribution};
use crate::error::Result;
use crate::model::{sender_value, Environment};
use crate::tolerance;

/// Value of running one's favourite test: `max(u(L*), u(R*))`.
pub fn willingness_to_pay(env: &Environment, theta: f64) -> f64 {
    sender_value(&env.l_star(), theta).max(sender_value(&env.r_star(), theta))
}

/// Posted price for access to the receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessSolution {
    pub price: f64,
    /// Disjoint type intervals that buy; indifferent types buy.
    pub buying_set: Vec<[f64; 2]>,
    pub demand: f64,
    pub revenue: f64,
}

/// Affine pieces `(lo, hi, intercept, slope)` of the willingness to pay.
fn wtp_pieces(env: &Environment, dist: &TypeDistribution) -> Vec<(f64, f64, f64, f64)> {
    let (lo, hi) = (dist.low(), dist.high());
    [
        (lo, 0.5_f64.min(hi), env.l_star()),
        (0.5_f64.max(lo), hi, env.r_star()),
    ]
    .into_iter()
    .filter(|p| p.1 > p.0)
    .map(|(a, b, bundle)| (a, b, bundle.q_l, bundle.tilt()))
    .collect()
}

fn buyers(pieces: &[(f64, f64, f64, f64)], price: f64) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    for &(a, b, c, s) in pieces {
        let (wa, wb) = (c + s * a, c + s * b);
        let floor = price - tolerance::GEOMETRY;
        let interval = if wa >= floor && wb >= floor {
            Some([a, b])
        } else if wa < floor && wb < floor {
            None
        } else {
            let cross = ((price - c) / s).clamp(a, b);
            Some(if wa >= floor { [a, cross] } else { [cross, b] })
        };
        if let Some(iv) = interval {
            match out.last_mut() {
                Some(last) if (last[1] - iv[0]).abs() <= tolerance::GEOMETRY => last[1] = iv[1],
                _ => out.push(iv),
            }
        }
    }
    out
}

fn demand(dist: &TypeDistribution, set: &[[f64; 2]]) -> f64 {
    set.iter().map(|iv| dist.mass(iv[0], iv[1])).sum()
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Monopoly price for access. Between consecutive breakpoints of the demand
/// curve revenue is quadratic in the price for the built-in distributions, so
/// each stationary point is a candidate; otherwise each stretch is searched
/// by golden section.
pub fn access_pricing(env: &Environment, dist: &TypeDistribution) -> Result<AccessSolution> {
    check_assumptions(dist, env).require_a2()?;
    let pieces = wtp_pieces(env, dist);
    let wtp = |t: f64| willingness_to_pay(env, t);

    let mut type_points = vec![dist.low(), dist.high()];
    if dist.low() < 0.5 && 0.5 < dist.high() {
        type_points.push(0.5);
    }
    let closed_form = dist.affine_pieces();
    if let Some(knots) = &closed_form {
        type_points.extend(knots.iter().copied());
    }
    let mut breaks: Vec<f64> = type_points.into_iter().map(wtp).collect();
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= tolerance::GEOMETRY);

    let revenue_at = |p: f64| p * demand(dist, &buyers(&pieces, p));
    let mut candidates = breaks.clone();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b - a > tolerance::GEOMETRY) {
            continue;
        }
        match closed_form {
            Some(_) => {
                // Demand is affine on (a, b): fit it from two interior prices.
                let (x0, x1) = (a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0);
                let (d0, d1) = (
                    demand(dist, &buyers(&pieces, x0)),
                    demand(dist, &buyers(&pieces, x1)),
                );
                let c1 = (d1 - d0) / (x1 - x0);
                let c0 = d0 - c1 * x0;
                if c1 < 0.0 {
                    let p = -c0 / (2.0 * c1);
                    if p > a && p < b {
                        candidates.push(p);
                    }
                }
            }
            None => candidates.push(golden_section(revenue_at, a, b, 1e-10)),
        }
    }

    let mut best = (0.0, f64::NEG_INFINITY);
    for p in candidates {
        let r = revenue_at(p);
        if r > best.1 + 1e-15 {
            best = (p, r);
        }
    }
    let price = best.0;
    let buying_set = buyers(&pieces, price);
    let demand = demand(dist, &buying_set);
    Ok(AccessSolution {
        price,
        buying_set,
        demand,
        revenue: price * demand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_example_sells_to_everyone_at_one_half() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let d = TypeDistribution::uniform(0.0, 1.5).unwrap();
        let a = access_pricing(&env, &d).unwrap();
        assert!((a.price - 0.5).abs() < 1e-12);
        assert!((a.revenue - 0.5).abs() < 1e-12);
        assert_eq!(a.buying_set, vec![[0.0, 1.5]]);
    }

    #[test]
    fn decreasing_willingness_to_pay_excludes_only_top_types() {
        let env = Environment::new(0.25, 0.3, 2.0 / 3.0).unwrap();
        // Uniform types: dropping below WTP(top) = 0.4 costs more than it gains.
        let d = TypeDistribution::uniform(0.0, 1.5).unwrap();
        let a = access_pricing(&env, &d).unwrap();
        assert!((a.price - 0.4).abs() < 1e-12);
        assert_eq!(a.buying_set, vec![[0.0, 1.5]]);
        // Mass piled on left-leaning types makes exclusion profitable.
        let d = TypeDistribution::piecewise_linear_cdf(vec![(0.0, 0.0), (0.4, 0.9), (1.5, 1.0)])
            .unwrap();
        let a = access_pricing(&env, &d).unwrap();
        assert_eq!(a.buying_set.len(), 1);
        let [lo, hi] = a.buying_set[0];
        assert_eq!(lo, 0.0);
        assert!(hi < 1.5);
        for k in 0..=300 {
            let t = 1.5 * k as f64 / 300.0;
            if (t - hi).abs() > 1e-9 {
                assert_eq!(willingness_to_pay(&env, t) >= a.price - 1e-12, t < hi);
            }
        }
    }

    #[test]
    fn custom_distribution_matches_closed_form() {
        let env = Environment::new(0.25, 0.45, 2.0 / 3.0).unwrap();
        let u = TypeDistribution::uniform(0.0, 1.5).unwrap();
        let c = TypeDistribution::custom(0.0, 1.5, |t| t / 1.5, |_| 1.0 / 1.5).unwrap();
        let a = access_pricing(&env, &u).unwrap();
        let b = access_pricing(&env, &c).unwrap();
        assert!((a.revenue - b.revenue).abs() < 1e-9);
    }
}
