//! Local symplectic maps and symplectic-spectrum utilities.
//!
//! All matrices use block quadrature order: for `k` modes the vector is
//! `(Q_1, …, Q_k, P_1, …, P_k)` and the symplectic form is
//! `Ω = [[0, I], [-I, 0]]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Heisenberg-picture linear map on the quadratures of `k` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    /// Wraps a `2k × 2k` matrix. Symplecticity is checked on application.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::Invariant(format!(
                "symplectic map must be square with even dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// Two-mode squeezer: `Q_a - Q_b` and `P_a + P_b` shrink by `e^{-r}`,
    /// `Q_a + Q_b` and `P_a - P_b` grow by `e^{r}`.
    pub fn two_mode_squeeze(r: f64) -> Self {
        let (c, s) = (r.cosh(), r.sinh());
        #[rustfmt::skip]
        let matrix = DMatrix::from_row_slice(4, 4, &[
            c,  s,  0.0, 0.0,
            s,  c,  0.0, 0.0,
            0.0, 0.0, c, -s,
            0.0, 0.0, -s, c,
        ]);
        Self { matrix }
    }

    /// Balanced beam splitter `(a, b) → ((a + b)/√2, (a - b)/√2)`, acting
    /// identically on the Q and P blocks.
    pub fn beam_splitter() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let matrix = DMatrix::from_row_slice(4, 4, &[
            h,  h,  0.0, 0.0,
            h, -h,  0.0, 0.0,
            0.0, 0.0, h,  h,
            0.0, 0.0, h, -h,
        ]);
        Self { matrix }
    }

    /// Phase rotation `Q → Q cos φ - P sin φ`, `P → Q sin φ + P cos φ`.
    pub fn phase_shift(phi: f64) -> Self {
        let (s, c) = phase_sin_cos(phi);
        let matrix = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mode_count(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// max |S Ω Sᵀ - Ω|.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.mode_count());
        let lhs = &self.matrix * &omega * self.matrix.transpose();
        (lhs - omega).amax()
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.symplectic_residual() <= tol
    }
}

/// sin/cos that are exact at multiples of π/2, so that Fourier shifts do
/// not leave 1e-17 residue in otherwise block-diagonal states.
pub(crate) fn phase_sin_cos(phi: f64) -> (f64, f64) {
    let quarter = phi / std::f64::consts::FRAC_PI_2;
    if quarter.fract() == 0.0 && quarter.abs() < 1e15 {
        match (quarter as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        phi.sin_cos()
    }
}

/// `Ω = [[0, I], [-I, 0]]` for `k` modes.
pub fn symplectic_form(k: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        omega[(i, k + i)] = 1.0;
        omega[(k + i, i)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues of a covariance matrix, ascending, one per mode.
///
/// Computed as the singular values of `σ^{1/2} Ω σ^{1/2}`, which is real
/// antisymmetric with spectrum `±i ν_k`; every `ν_k` appears twice.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = cov.nrows();
    if dim % 2 != 0 || dim != cov.ncols() {
        return Err(Error::Invariant(format!(
            "covariance must be square with even dimension, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let eig = cov.clone().symmetric_eigen();
    if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
        if min <= 0.0 {
            return Err(Error::Invariant(format!(
                "covariance is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
    }
    let sqrt_vals = eig.eigenvalues.map(f64::sqrt);
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let antisym = &root * symplectic_form(dim / 2) * &root;
    let mut sv: Vec<f64> = antisym.singular_values().iter().cloned().collect();
    sv.sort_by(f64::total_cmp);
    Ok(sv.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}
