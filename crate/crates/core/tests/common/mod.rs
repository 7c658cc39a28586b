#![allow(dead_code)]

use influence::{check_assumptions, Classification, Environment, TypeDistribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn env(mu_low: f64, mu_prior: f64, mu_high: f64) -> Environment {
    Environment::new(mu_low, mu_prior, mu_high).unwrap()
}

pub fn uniform(low: f64, high: f64) -> TypeDistribution {
    TypeDistribution::uniform(low, high).unwrap()
}

pub fn balanced_example() -> (Environment, TypeDistribution) {
    (env(0.25, 0.5, 2.0 / 3.0), uniform(0.0, 1.5))
}

pub fn unbalanced_example() -> (Environment, TypeDistribution) {
    (env(0.25, 0.3, 2.0 / 3.0), uniform(0.0, 1.5))
}

/// Density `(1 + s (t - c)) / (b - a)` on `[a, b]` with midpoint `c`.
pub fn linear_density(a: f64, b: f64, tilt: f64) -> TypeDistribution {
    let w = b - a;
    let c = 0.5 * (a + b);
    let s = tilt / w;
    TypeDistribution::custom(
        a,
        b,
        move |t| ((t - a) + 0.5 * s * ((t - c).powi(2) - (a - c).powi(2))) / w,
        move |t| (1.0 + s * (t - c)) / w,
    )
    .unwrap()
}

fn random_env(rng: &mut ChaCha8Rng) -> Environment {
    loop {
        let mu_low = rng.gen_range(0.02..0.45);
        let mu_high = rng.gen_range(0.55..0.98);
        let mu_prior = rng.gen_range(mu_low + 0.02..mu_high - 0.02);
        let e = env(mu_low, mu_prior, mu_high);
        let margin = 0.02;
        if (2.0 * mu_prior - mu_high).abs() > margin
            && (2.0 * mu_prior - 1.0 - mu_low).abs() > margin
        {
            return e;
        }
    }
}

/// Admissible environment and type distribution: both virtual types strictly
/// increasing, the neutral type inside the support, no type extreme enough to
/// want `L0*` or `R0*`. Supports may extend beyond `[0, 1]`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Environment, TypeDistribution) {
    loop {
        let e = random_env(rng);
        let top = e.right_extreme_target().unwrap_or(f64::INFINITY).min(2.5);
        let bottom = e
            .left_extreme_target()
            .unwrap_or(f64::NEG_INFINITY)
            .max(-1.5);
        let low = rng.gen_range(bottom.max(-1.0) + 0.01..0.4);
        let high = rng.gen_range(0.6..(top - 0.01).clamp(0.61, 2.0));
        if !(high < top && low > bottom) {
            continue;
        }
        let dist = if rng.gen_bool(0.5) {
            uniform(low, high)
        } else {
            linear_density(low, high, rng.gen_range(-0.8..0.8))
        };
        let report = check_assumptions(&dist, &e);
        if report.a1_ok && report.a2_ok {
            return (e, dist);
        }
    }
}

pub fn random_of_class(
    rng: &mut ChaCha8Rng,
    class: Classification,
) -> (Environment, TypeDistribution) {
    loop {
        let (e, d) = random_instance(rng);
        if e.classification() == class {
            return (e, d);
        }
    }
}
