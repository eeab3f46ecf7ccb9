use thiserror::Error;

use crate::comb::ModeLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid comb: {0}")]
    InvalidComb(String),

    #[error("invalid pump configuration: {0}")]
    InvalidPumps(String),

    #[error("mode {0} is not part of the state")]
    UnknownMode(ModeLabel),

    #[error("duplicate mode label {0}")]
    DuplicateMode(ModeLabel),

    #[error("modes {0} and {1} must be distinct")]
    SameMode(ModeLabel, ModeLabel),

    #[error("beam splitter across frequencies {0} and {1} requires an explicit override")]
    FrequencyMismatch(i64, i64),

    #[error("frequency index {0} is outside the comb range [{1}, {2}]")]
    OutOfRange(i64, i64, i64),

    #[error("pair ({0}, {1}) satisfies a phasematching condition; it is a nullifier, not a wrong-frequency check")]
    PhaseMatched(i64, i64),

    #[error("quadrature combination must have at least one nonzero coefficient")]
    EmptyCombination,

    #[error("coefficient vectors have mismatched lengths ({0} vs {1})")]
    MismatchedCoefficients(usize, usize),

    #[error("observable is not a pure {0} quadrature combination")]
    NotPureQuadrature(&'static str),

    #[error("invalid ratio {0}: {1}")]
    InvalidRatio(f64, &'static str),

    #[error("invalid homodyne configuration: {0}")]
    InvalidBhd(String),

    #[error("LO sidebands fall between comb modes; nothing to measure")]
    EmptySelection,

    #[error("invalid imbalance: {0}")]
    InvalidImbalance(String),

    #[error("dense storage requested for {modes} modes (threshold {threshold}) without override")]
    DenseRefused { modes: usize, threshold: usize },

    #[error("operation needs dense storage but the state has {0} modes")]
    TooLargeForDense(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidComb(_) => "invalid_comb",
            Error::InvalidPumps(_) => "invalid_pumps",
            Error::UnknownMode(_) => "unknown_mode",
            Error::DuplicateMode(_) => "duplicate_mode",
            Error::SameMode(..) => "same_mode",
            Error::FrequencyMismatch(..) => "frequency_mismatch",
            Error::OutOfRange(..) => "out_of_range",
            Error::PhaseMatched(..) => "phase_matched",
            Error::EmptyCombination => "empty_combination",
            Error::MismatchedCoefficients(..) => "mismatched_coefficients",
            Error::NotPureQuadrature(_) => "not_pure_quadrature",
            Error::InvalidRatio(..) => "invalid_ratio",
            Error::InvalidBhd(_) => "invalid_bhd",
            Error::EmptySelection => "empty_selection",
            Error::InvalidImbalance(_) => "invalid_imbalance",
            Error::DenseRefused { .. } => "dense_refused",
            Error::TooLargeForDense(_) => "too_large_for_dense",
            Error::Invariant(_) => "invariant",
        }
    }

    /// Whether the error stems from invalid user-supplied parameters rather
    /// than from a violated runtime invariant.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidComb(_)
                | Error::InvalidPumps(_)
                | Error::InvalidBhd(_)
                | Error::InvalidImbalance(_)
                | Error::DenseRefused { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
