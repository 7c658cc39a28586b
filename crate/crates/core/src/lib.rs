//! Optimal menus of statistical tests sold by a monopolist intermediary to a
//! privately informed sender who wants to sway a three-action receiver.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the receiver's environment, the polygon of implementable
//!   influence bundles, the bundle/experiment conversion and Blackwell
//!   garbling certificates.
//! * [`distribution`] holds sender-type distributions, virtual types, the
//!   regularity checks and the screening cutoffs.
//! * [`menu`] builds first-best, screening, extended, coercive and access-price
//!   solutions in closed form, plus comparative statics and receiver welfare.
//! * [`verify`] certifies menus on a grid and re-derives optimal revenue with a
//!   discrete-type linear program solved by [`lp`].
//!
//! Everything is a pure function of immutable inputs.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod distribution;
pub mod error;
pub mod lp;
pub mod menu;
pub mod model;
pub mod root;
pub mod tolerance;
pub mod verify;

pub use distribution::{
    check_assumptions, solve_thresholds, AssumptionReport, Thresholds, TypeDistribution,
};
pub use error::{Error, Result};
pub use menu::{
    access_pricing, coercion_menu, comparative_statics, extended_menu, first_best, optimal_menu,
    receiver_optimal_equalizing_test, receiver_welfare, welfare_comparison, AccessSolution,
    CoercionSolution, CoercionStatus, EqualizingTest, Menu, MenuKind, Price, Segment,
    StaticsReport, WelfareComparison, WelfareMode, WelfareReport,
};
pub use model::{
    bundle_to_experiment, contains, geometry, is_garbling, mirror, receiver_value, sender_value,
    Action, Atom, Classification, Environment, Experiment, InfluenceBundle, Membership,
    PolytopeGeometry,
};
pub use verify::{
    compare_to_oracle, discretize, lp_oracle, verify_menu, DiscreteInstance, OracleComparison,
    OracleSolution, ViolationReport,
};
