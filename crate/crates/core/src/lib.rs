//! Gaussian simulation of dual-rail quantum wires in the optical frequency
//! comb of a bimodally pumped OPO.
//!
//! The pipeline is: choose a comb window and two pump indices
//! ([`comb`]), build the covariance matrix of the two-mode-squeezed comb
//! after the polarization beam splitter ([`gaussian`]), and evaluate
//! nullifiers ([`nullifier`]), inseparability witnesses
//! ([`entanglement`]), balanced-homodyne observables ([`homodyne`]) and
//! the effect of unequal squeezing ([`imperfect`]).

pub mod comb;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod homodyne;
pub mod imperfect;
pub mod nullifier;
pub mod tolerance;

pub use comb::{CombSpec, ModeLabel, Pol, PumpConfig};
pub use error::{Error, Result};
pub use gaussian::{build_comb_state, build_graph_state, GaussianState, QuadratureCombination, Term};
pub use tolerance::Tolerances;

/// `10·log10(ratio)`.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Inverse of [`to_db`].
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Squeezing parameter whose nullifier variance sits `db` below shot noise
/// (`db` negative), i.e. `e^{-2r} = 10^{db/10}`.
pub fn r_from_db(db: f64) -> f64 {
    -db / 10.0 * std::f64::consts::LN_10 / 2.0
}

/// Nine significant digits in scientific notation.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}
