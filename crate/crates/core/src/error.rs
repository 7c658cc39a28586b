use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The receiver thresholds and prior are not strictly ordered.
    #[error("invalid environment: {0} violated")]
    InvalidEnvironment(&'static str),

    /// A bundle lies outside the implementable set.
    #[error("bundle ({q_l}, {q_r}) is not implementable: {constraint}")]
    NotImplementable {
        q_l: f64,
        q_r: f64,
        constraint: &'static str,
    },

    /// An experiment breaks probability, Bayes plausibility or obedience.
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    /// A type distribution is malformed or cannot be evaluated.
    #[error("distribution error: {0}")]
    Distribution(String),

    /// Virtual types are not strictly increasing, which would need ironing.
    #[error("virtual type {which} is not strictly increasing near {at}; ironing is unsupported")]
    IroningUnsupported { which: &'static str, at: f64 },

    /// The type-bound assumption fails.
    #[error("type bounds violated: {0}")]
    TypeBounds(String),

    /// The operation is outside the environments it is defined for.
    #[error("out of scope: {0}")]
    Scope(String),

    #[error("not implemented: {0}")]
    NotImplemented(&'static str),

    #[error("degenerate prior {0}: state kernels are undefined")]
    DegeneratePrior(f64),

    /// A type query outside the support.
    #[error("type {theta} outside support [{low}, {high}]")]
    OutsideSupport { theta: f64, low: f64, high: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
}

impl Error {
    /// True for errors raised because the instance falls outside the
    /// model's assumptions or an operation's scope.
    pub fn is_scope(&self) -> bool {
        matches!(
            self,
            Error::IroningUnsupported { .. }
                | Error::TypeBounds(_)
                | Error::Scope(_)
                | Error::NotImplemented(_)
        )
    }
}
