use serde::{Deserialize, Serialize};

use super::{coercion_menu, first_best, optimal_menu, Menu, Segment};
use crate::distribution::TypeDistribution;
use crate::error::{Error, Result};
use crate::model::{
    bundle_to_experiment, receiver_value, Action, Atom, Environment, Experiment, InfluenceBundle,
};
use crate::tolerance;

/// Which test implements the equalizing bundle `(1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualizingTest {
    /// The receiver's favourite test among those inducing `(1/2, 1/2)`.
    #[default]
    ReceiverOptimal,
    /// The same construction as every other bundle.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareMode {
    Screening,
    Unmediated,
    Coercive,
}

/// Equalizing test that is best for the receiver: posteriors straddle the
/// prior symmetrically, pushed to the nearest certain state.
pub fn receiver_optimal_equalizing_test(env: &Environment) -> Result<Experiment> {
    if !env.classification().solves_as_balanced() {
        return Err(Error::Scope(format!(
            "the equalizing bundle (1/2, 1/2) is not implementable in a {} environment",
            env.classification()
        )));
    }
    if !(env.mu_low() < 0.5 && 0.5 < env.mu_high()) {
        return Err(Error::Scope(
            "the receiver-optimal equalizing test needs mu_low < 1/2 < mu_high".into(),
        ));
    }
    let p = env.mu_prior();
    let (left, right) = if p <= 0.5 {
        (0.0, 2.0 * p)
    } else {
        (2.0 * p - 1.0, 1.0)
    };
    Experiment::new(
        env,
        vec![
            Atom::new(left, 0.5, Action::L),
            Atom::new(right, 0.5, Action::R),
        ],
    )
}

/// Test the receiver faces when a sender buys `segment`.
pub fn segment_experiment(
    env: &Environment,
    segment: &Segment,
    equalizing: EqualizingTest,
) -> Result<Experiment> {
    let is_equalizing =
        segment.bundle.distance(&InfluenceBundle::EQUALIZING) <= tolerance::GEOMETRY;
    if is_equalizing && equalizing == EqualizingTest::ReceiverOptimal {
        receiver_optimal_equalizing_test(env)
    } else {
        bundle_to_experiment(env, &segment.bundle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentWelfare {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub label: String,
    pub mass: f64,
    pub receiver_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub mode: WelfareMode,
    pub welfare: f64,
    pub segments: Vec<SegmentWelfare>,
}

fn menu_for(env: &Environment, dist: &TypeDistribution, mode: WelfareMode) -> Result<Menu> {
    match mode {
        WelfareMode::Screening => optimal_menu(env, dist),
        WelfareMode::Unmediated => first_best(env, dist),
        WelfareMode::Coercive => Ok(coercion_menu(env, dist)?.menu),
    }
}

/// Receiver's expected payoff when every type runs the test it buys.
pub fn receiver_welfare(
    env: &Environment,
    dist: &TypeDistribution,
    mode: WelfareMode,
    equalizing: EqualizingTest,
) -> Result<WelfareReport> {
    let menu = menu_for(env, dist, mode)?;
    let segments = menu
        .segments
        .iter()
        .map(|s| {
            let e = segment_experiment(env, s, equalizing)?;
            Ok(SegmentWelfare {
                theta_lo: s.theta_lo,
                theta_hi: s.theta_hi,
                label: s.label.clone(),
                mass: dist.mass(s.theta_lo, s.theta_hi),
                receiver_value: receiver_value(env, &e)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WelfareReport {
        mode,
        welfare: segments.iter().map(|s| s.mass * s.receiver_value).sum(),
        segments,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareComparison {
    pub screening: WelfareReport,
    pub unmediated: WelfareReport,
    pub coercive: WelfareReport,
    /// Screening minus unmediated welfare.
    pub screening_advantage: f64,
}

pub fn welfare_comparison(
    env: &Environment,
    dist: &TypeDistribution,
    equalizing: EqualizingTest,
) -> Result<WelfareComparison> {
    let screening = receiver_welfare(env, dist, WelfareMode::Screening, equalizing)?;
    let unmediated = receiver_welfare(env, dist, WelfareMode::Unmediated, equalizing)?;
    let coercive = receiver_welfare(env, dist, WelfareMode::Coercive, equalizing)?;
    Ok(WelfareComparison {
        screening_advantage: screening.welfare - unmediated.welfare,
        screening,
        unmediated,
        coercive,
    })
}
