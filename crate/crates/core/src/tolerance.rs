//! Numerical tolerances shared by every module.

/// Slack allowed when testing membership in the implementable set and the
/// invariants of an [`Experiment`](crate::model::Experiment).
pub const GEOMETRY: f64 = 1e-12;

/// Target accuracy of every bisection.
pub const ROOT: f64 = 1e-12;

/// Feasibility slack for linear programs (garbling certificates, oracle).
pub const FEASIBILITY: f64 = 1e-9;

/// Slack for incentive-compatibility and participation checks.
pub const INCENTIVE: f64 = 1e-9;

/// Grid used to check the monotone-virtual-type assumption.
pub const ASSUMPTION_GRID: usize = 2000;

/// Accuracy of adaptive quadrature for user-supplied densities.
pub const QUADRATURE: f64 = 1e-10;
