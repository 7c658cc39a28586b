//! Receiver environment, implementable influence bundles and experiments.

mod environment;
mod experiment;
mod garbling;

pub use environment::{
    contains, geometry, Classification, Environment, ExtremePoints, InfluenceBundle, Membership,
    PolytopeGeometry,
};
pub use experiment::{
    bundle_to_experiment, receiver_value, sender_value, Action, Atom, Experiment,
};
pub use garbling::{is_garbling, GarblingVerdict};

use crate::distribution::TypeDistribution;

/// Relabels the whole problem: states, actions and types are flipped
/// (`theta -> 1 - theta`). Applying it twice gives back the input.
pub fn mirror(env: &Environment, dist: &TypeDistribution) -> (Environment, TypeDistribution) {
    (env.mirrored(), dist.mirrored())
}
