use serde::{Deserialize, Serialize};

use super::optimal_menu;
use crate::distribution::{Thresholds, TypeDistribution};
use crate::error::{Error, Result};
use crate::model::{Classification, Environment};

/// Indirect utility before and after a drop in the prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsPoint {
    pub theta: f64,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticsReport {
    pub classification: Classification,
    pub prior_before: f64,
    pub prior_after: f64,
    pub thresholds_before: Thresholds,
    pub thresholds_after: Thresholds,
    /// Largest change in any threshold.
    pub threshold_shift: f64,
    pub points: Vec<StaticsPoint>,
    /// Whether the signed change in utility matches the predicted pattern.
    /// `None` when no pattern is predicted (mirror-image environments).
    pub pattern_holds: Option<bool>,
    /// Grid types where the pattern fails.
    pub pattern_failures: Vec<f64>,
}

fn threshold_shift(a: &Thresholds, b: &Thresholds) -> f64 {
    let opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    [
        (a.theta_star - b.theta_star).abs(),
        (a.theta_star_star_b - b.theta_star_star_b).abs(),
        (a.theta_star_star_u - b.theta_star_star_u).abs(),
        opt(a.theta_dagger, b.theta_dagger),
        opt(a.theta_double_dagger, b.theta_double_dagger),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Effect of lowering the prior from `mu_0` to `mu_0 - delta` on the optimal
/// menu, sampled on `grid` types.
pub fn comparative_statics(
    env: &Environment,
    dist: &TypeDistribution,
    delta: f64,
    grid: usize,
) -> Result<StaticsReport> {
    if !(delta >= 0.0) || grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "need delta >= 0 and grid >= 2, got {delta} and {grid}"
        )));
    }
    let after_env = env.with_prior(env.mu_prior() - delta)?;
    let (c0, c1) = (env.classification(), after_env.classification());
    if c0 != c1 {
        return Err(Error::Scope(format!(
            "lowering the prior to {} moves the environment from {c0} to {c1}",
            after_env.mu_prior()
        )));
    }
    let before = optimal_menu(env, dist)?;
    let after = optimal_menu(&after_env, dist)?;
    let tb = before.thresholds.expect("screening menus carry thresholds");
    let ta = after.thresholds.expect("screening menus carry thresholds");

    let (lo, hi) = (dist.low(), dist.high());
    let points: Vec<StaticsPoint> = (0..grid)
        .map(|k| {
            let theta = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
            let b = before.indirect_utility(theta)?;
            let a = after.indirect_utility(theta)?;
            Ok(StaticsPoint {
                theta,
                before: b,
                after: a,
                delta: a - b,
            })
        })
        .collect::<Result<_>>()?;

    // Utility changes continuously, so types on a knot are not classified.
    let flat = 1e-12;
    let gap = 1e-9;
    let positive = delta > 0.0;
    let mut failures = Vec::new();
    let pattern_holds = match c0 {
        _ if !positive => {
            failures.extend(
                points
                    .iter()
                    .filter(|p| p.delta.abs() > flat)
                    .map(|p| p.theta),
            );
            Some(failures.is_empty())
        }
        Classification::Balanced
        | Classification::BoundaryBalancedUnbalanced
        | Classification::BoundaryBalancedMirror => {
            for p in &points {
                let ok = if p.theta < tb.theta_star - gap {
                    p.delta > 0.0
                } else if p.theta > tb.theta_star_star_b + gap {
                    p.delta < 0.0
                } else if p.theta > tb.theta_star + gap && p.theta < tb.theta_star_star_b - gap {
                    p.delta.abs() <= flat
                } else {
                    true
                };
                if !ok {
                    failures.push(p.theta);
                }
            }
            Some(failures.is_empty())
        }
        Classification::Unbalanced => {
            for p in &points {
                let ok = if p.theta < tb.theta_star_star_u - gap {
                    p.delta > 0.0
                } else if p.theta > tb.theta_star_star_u + gap {
                    p.delta.abs() <= flat
                } else {
                    p.delta >= -flat
                };
                if !ok {
                    failures.push(p.theta);
                }
            }
            Some(failures.is_empty())
        }
        Classification::MirrorUnbalanced => None,
    };

    Ok(StaticsReport {
        classification: c0,
        prior_before: env.mu_prior(),
        prior_after: after_env.mu_prior(),
        threshold_shift: threshold_shift(&tb, &ta),
        thresholds_before: tb,
        thresholds_after: ta,
        points,
        pattern_holds,
        pattern_failures: failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.5).unwrap()
    }

    #[test]
    fn balanced_prior_drop() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let r = comparative_statics(&env, &uniform(), 0.1, 301).unwrap();
        assert!(r.threshold_shift < 1e-10);
        assert_eq!(r.pattern_holds, Some(true), "{:?}", r.pattern_failures);
    }

    #[test]
    fn unbalanced_prior_drop_helps_right_leaning_types() {
        let env = Environment::new(0.25, 0.3, 2.0 / 3.0).unwrap();
        let r = comparative_statics(&env, &uniform(), 0.025, 301).unwrap();
        assert!(r.threshold_shift < 1e-10);
        assert_eq!(r.pattern_holds, Some(true), "{:?}", r.pattern_failures);
        assert!(r
            .points
            .iter()
            .filter(|p| p.theta > 0.5 && p.theta < 1.25)
            .all(|p| p.delta > 0.0));
    }

    #[test]
    fn zero_delta_changes_nothing() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let r = comparative_statics(&env, &uniform(), 0.0, 50).unwrap();
        assert!(r.points.iter().all(|p| p.delta == 0.0));
    }

    #[test]
    fn crossing_into_unbalanced_is_rejected() {
        let env = Environment::new(0.25, 0.4, 2.0 / 3.0).unwrap();
        assert!(matches!(
            comparative_statics(&env, &uniform(), 0.1, 10),
            Err(Error::Scope(_))
        ));
    }
}
