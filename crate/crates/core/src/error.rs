use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes of operands do not fit together (block layout, arity, lengths).
    #[error("structural error: {0}")]
    Structure(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A mathematical guarantee did not hold on the computed data.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("unmet hypotheses: {}", join(.0))]
    Preconditions(Vec<Hypothesis>),
}

/// Individual hypotheses of the trace product lower bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    NotPositive,
    NormAboveOne { norm: f64 },
    NonPositiveTrace { value: f64 },
    EpsilonNotPositive,
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    FactorCount { expected: usize, found: usize },
    FactorNormAboveOne { index: usize, norm: f64 },
    FactorTooFar { index: usize, distance: f64 },
    ShapeMismatch { index: usize },
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::NotPositive => write!(f, "b is not positive"),
            Hypothesis::NormAboveOne { norm } => write!(f, "||b|| = {norm} > 1"),
            Hypothesis::NonPositiveTrace { value } => write!(f, "omega(b) = {value} <= 0"),
            Hypothesis::EpsilonNotPositive => write!(f, "epsilon <= 0"),
            Hypothesis::EpsilonTooLarge { epsilon, limit } => {
                write!(f, "epsilon = {epsilon} >= omega(b^(k+1))/(k+1) = {limit}")
            }
            Hypothesis::FactorCount { expected, found } => {
                write!(f, "expected {expected} factors, found {found}")
            }
            Hypothesis::FactorNormAboveOne { index, norm } => {
                write!(f, "||c_{index}|| = {norm} > 1")
            }
            Hypothesis::FactorTooFar { index, distance } => {
                write!(f, "||c_{index} - b||_omega = {distance} >= epsilon")
            }
            Hypothesis::ShapeMismatch { index } => write!(f, "c_{index} has the wrong shape"),
        }
    }
}

fn join(items: &[Hypothesis]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
