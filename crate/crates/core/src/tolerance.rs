//! Numerical tolerances for invariant checks.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative asymmetry allowed in a covariance matrix.
    pub symmetry: f64,
    /// max |S Ω Sᵀ - Ω| for an accepted map.
    pub symplectic: f64,
    /// Deviation of symplectic eigenvalues from the vacuum level.
    pub purity: f64,
    /// Entries treated as zero when checking block structure.
    pub block_zero: f64,
    /// Spread allowed when a quantity should not depend on a phase.
    pub theta_independence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            symplectic: 1e-12,
            purity: 1e-9,
            block_zero: 1e-12,
            theta_independence: 1e-9,
        }
    }
}
