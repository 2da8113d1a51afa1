use std::fmt;

/// Errors surfaced by the computation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Speed ordering or sign pattern fails somewhere on [0, 1].
    SpeedOrderViolation(String),
    /// Matrix or vector dimensions are inconsistent with (m, p).
    DimensionMismatch(String),
    /// m = 0 or p = 0.
    EmptySide,
    /// Jet division by a series with zero constant term.
    DivisionByZeroConstantTerm,
    /// Jet composition with an inner series whose constant term is nonzero.
    CompositionConstantTermNonzero,
    /// Jet exponential of a series with nonzero constant term.
    ExpConstantTermNonzero,
    /// Adaptive quadrature could not reach the requested tolerance.
    QuadratureFailure(String),
    /// Two speeds that must differ are equal.
    DegenerateSpeeds,
    /// A derivative order beyond the regularity cap r + 1 was requested.
    OrderExceeded { requested: usize, cap: usize },
    /// A derivative step was requested on a row whose jet order is spent.
    BudgetExhausted,
    /// The pivot list does not cover rows 1..nmin.
    IncompletePivots,
    /// A closed-form result does not apply to the given system.
    NotApplicable(&'static str),
    /// The oracle grid cannot resolve the characteristics.
    GridTooCoarse(String),
    /// Characteristic tracing step size underflowed.
    StepSizeUnderflow,
    /// The residual scan shows no controllability transition in range.
    NoTransition,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SpeedOrderViolation(d) => write!(f, "speed ordering violated: {d}"),
            Error::DimensionMismatch(d) => write!(f, "dimension mismatch: {d}"),
            Error::EmptySide => write!(f, "system must have at least one negative and one positive speed"),
            Error::DivisionByZeroConstantTerm => write!(f, "jet division by zero constant term"),
            Error::CompositionConstantTermNonzero => {
                write!(f, "jet composition requires inner constant term zero")
            }
            Error::ExpConstantTermNonzero => write!(f, "jet exponential requires constant term zero"),
            Error::QuadratureFailure(d) => write!(f, "quadrature failure: {d}"),
            Error::DegenerateSpeeds => write!(f, "speeds must be distinct"),
            Error::OrderExceeded { requested, cap } => {
                write!(f, "derivative order {requested} exceeds cap {cap}")
            }
            Error::BudgetExhausted => write!(f, "derivative budget exhausted"),
            Error::IncompletePivots => write!(f, "pivots do not cover the first min(p, m) rows"),
            Error::NotApplicable(d) => write!(f, "not applicable: {d}"),
            Error::GridTooCoarse(d) => write!(f, "grid too coarse: {d}"),
            Error::StepSizeUnderflow => write!(f, "characteristic step size underflow"),
            Error::NoTransition => write!(f, "no controllability transition found in scan range"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
