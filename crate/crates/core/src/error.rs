use thiserror::Error;

use crate::fock::Statistics;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("statistics mismatch: expected {expected:?}, found {found:?}")]
    StatisticsMismatch { expected: Statistics, found: Statistics },
    #[error("particle count mismatch: {left} vs {right}")]
    ParticleCountMismatch { left: usize, right: usize },
    #[error("Pauli exclusion violated: {0} is occupied more than once")]
    PauliViolation(String),
    #[error("product term must contain at least one slot")]
    EmptyTerm,
    #[error("q-labels must be present on every fermionic slot and absent on every bosonic slot (slot {0})")]
    LabelConvention(usize),
    #[error("invalid occupancies: {0}")]
    InvalidCounts(String),
    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("cannot parse product term {0:?}")]
    ParseTerm(String),
    #[error("scattering requires constant coefficients; term {0} carries S_A/S_B dependence")]
    NonConstantCoefficients(String),
    #[error("permutation of length {got} does not match {n} particles")]
    InvalidPermutation { n: usize, got: usize },
}
