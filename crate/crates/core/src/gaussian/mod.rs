//! Covariance-matrix engine for zero-mean Gaussian states.
//!
//! Quadratures follow `Q = (a + a†)/√2`, `P = i(a† - a)/√2`, so the vacuum
//! variance of a single quadrature is `v0 = 1/2`. Squeezing figures are
//! always ratios to the shot noise of the same combination and therefore
//! do not depend on this choice.
//!
//! Gaussian unitaries are applied in the Heisenberg picture: a map `S`
//! acting on the quadrature vector updates the covariance as `S σ Sᵀ`.

mod observable;
mod storage;
pub mod symplectic;

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::comb::{epr_pairs, CombSpec, ModeLabel, Parity, Pol, PumpConfig};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub use observable::{QuadratureCombination, Term};
use storage::Storage;
pub use symplectic::{symplectic_eigenvalues, symplectic_form, SymplecticMap};

/// Single-quadrature vacuum variance.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Largest mode count kept in dense storage by default.
pub const DENSE_MODE_THRESHOLD: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StoragePolicy {
    /// Dense up to the threshold, block-sparse above it.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    pub policy: StoragePolicy,
    pub dense_threshold: usize,
    /// Permit `StoragePolicy::Dense` above the threshold.
    pub allow_large_dense: bool,
    pub tolerances: Tolerances,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            policy: StoragePolicy::Auto,
            dense_threshold: DENSE_MODE_THRESHOLD,
            allow_large_dense: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl BuildOptions {
    pub fn with_policy(policy: StoragePolicy) -> Self {
        Self { policy, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct GaussianState {
    modes: Vec<ModeLabel>,
    index: HashMap<ModeLabel, usize>,
    vac_var: f64,
    storage: Storage,
    tolerances: Tolerances,
}

impl GaussianState {
    /// Vacuum over `modes`, with storage picked by the default policy.
    pub fn vacuum(modes: Vec<ModeLabel>) -> Result<Self> {
        Self::vacuum_with(modes, &BuildOptions::default())
    }

    pub fn vacuum_with(modes: Vec<ModeLabel>, opts: &BuildOptions) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Invariant("a state needs at least one mode".into()));
        }
        let mut index = HashMap::with_capacity(modes.len());
        for (i, &m) in modes.iter().enumerate() {
            if index.insert(m, i).is_some() {
                return Err(Error::DuplicateMode(m));
            }
        }
        let count = modes.len();
        let dense = match opts.policy {
            StoragePolicy::Auto => count <= opts.dense_threshold,
            StoragePolicy::Sparse => false,
            StoragePolicy::Dense => {
                if count > opts.dense_threshold && !opts.allow_large_dense {
                    return Err(Error::DenseRefused {
                        modes: count,
                        threshold: opts.dense_threshold,
                    });
                }
                true
            }
        };
        let storage = if dense {
            Storage::dense_vacuum(count, VACUUM_VARIANCE)
        } else {
            Storage::sparse_vacuum(count, VACUUM_VARIANCE)
        };
        Ok(Self {
            modes,
            index,
            vac_var: VACUUM_VARIANCE,
            storage,
            tolerances: opts.tolerances,
        })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn vacuum_variance(&self) -> f64 {
        self.vac_var
    }

    pub fn contains(&self, mode: ModeLabel) -> bool {
        self.index.contains_key(&mode)
    }

    pub fn is_dense(&self) -> bool {
        self.storage.is_dense()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Bytes held by the covariance data.
    pub fn storage_bytes(&self) -> usize {
        self.storage.bytes()
    }

    /// Bytes a dense `2M × 2M` matrix would need for this state.
    pub fn dense_bytes(&self) -> usize {
        let dim = 2 * self.modes.len();
        dim * dim * std::mem::size_of::<f64>()
    }

    fn idx(&self, mode: ModeLabel) -> Result<usize> {
        self.index.get(&mode).copied().ok_or(Error::UnknownMode(mode))
    }

    /// Applies a symplectic map to the listed modes after checking
    /// `S Ω Sᵀ = Ω` on the active block.
    pub fn apply(&mut self, modes: &[ModeLabel], map: &SymplecticMap) -> Result<()> {
        if map.mode_count() != modes.len() {
            return Err(Error::Invariant(format!(
                "map acts on {} modes but {} were given",
                map.mode_count(),
                modes.len()
            )));
        }
        let residual = map.symplectic_residual();
        if residual > self.tolerances.symplectic {
            return Err(Error::Invariant(format!(
                "map is not symplectic (residual {residual:e})"
            )));
        }
        let det = map.determinant();
        if (det - 1.0).abs() > 1e3 * self.tolerances.symplectic {
            return Err(Error::Invariant(format!("map has determinant {det}")));
        }
        let idx = modes
            .iter()
            .map(|&m| self.idx(m))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in idx.iter().enumerate() {
            if idx[i + 1..].contains(a) {
                return Err(Error::SameMode(modes[i], modes[i]));
            }
        }
        self.storage.apply(self.modes.len(), &idx, map.matrix());
        Ok(())
    }

    pub fn two_mode_squeeze(&mut self, a: ModeLabel, b: ModeLabel, r: f64) -> Result<()> {
        if a == b {
            return Err(Error::SameMode(a, b));
        }
        self.apply(&[a, b], &SymplecticMap::two_mode_squeeze(r))
    }

    /// Polarization beam splitter between two modes of the same frequency.
    pub fn beam_splitter(&mut self, a: ModeLabel, b: ModeLabel) -> Result<()> {
        if a.n != b.n {
            return Err(Error::FrequencyMismatch(a.n, b.n));
        }
        self.beam_splitter_any(a, b)
    }

    /// Beam splitter without the same-frequency check.
    pub fn beam_splitter_any(&mut self, a: ModeLabel, b: ModeLabel) -> Result<()> {
        if a == b {
            return Err(Error::SameMode(a, b));
        }
        self.apply(&[a, b], &SymplecticMap::beam_splitter())
    }

    pub fn phase_shift(&mut self, a: ModeLabel, phi: f64) -> Result<()> {
        self.apply(&[a], &SymplecticMap::phase_shift(phi))
    }

    /// Quarter-turn phase shift on both polarizations of every frequency in
    /// `class`.
    pub fn fourier_shift(&mut self, class: Parity) -> Result<()> {
        let targets: Vec<ModeLabel> = self
            .modes
            .iter()
            .copied()
            .filter(|m| class.contains(m.n))
            .collect();
        for m in targets {
            self.phase_shift(m, FRAC_PI_2)?;
        }
        Ok(())
    }

    /// `Cov(x_a, x_b)` for the chosen quadratures.
    pub fn covariance(&self, a: ModeLabel, qa: Quadrature, b: ModeLabel, qb: Quadrature) -> Result<f64> {
        let (i, j) = (self.idx(a)?, self.idx(b)?);
        let block = self.storage.block(self.modes.len(), i, j);
        let row = match qa {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        };
        let col = match qb {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        };
        Ok(block[row][col])
    }

    /// Largest |covariance| between the quadratures of two modes.
    pub fn max_cross_covariance(&self, a: ModeLabel, b: ModeLabel) -> Result<f64> {
        let (i, j) = (self.idx(a)?, self.idx(b)?);
        let block = self.storage.block(self.modes.len(), i, j);
        Ok(block.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    /// `cᵀ σ c` for the expanded coefficient vector of `obs`.
    pub fn variance(&self, obs: &QuadratureCombination) -> Result<f64> {
        let coeffs = obs
            .expanded()
            .into_iter()
            .map(|(m, q, p)| Ok((self.idx(m)?, [q, p])))
            .collect::<Result<Vec<_>>>()?;
        let total = self.modes.len();
        let mut var = 0.0;
        for &(i, ci) in &coeffs {
            for &(j, cj) in &coeffs {
                let b = self.storage.block(total, i, j);
                for alpha in 0..2 {
                    for beta in 0..2 {
                        var += ci[alpha] * b[alpha][beta] * cj[beta];
                    }
                }
            }
        }
        Ok(var)
    }

    /// Vacuum variance of `obs` with this state's convention.
    pub fn shot_noise(&self, obs: &QuadratureCombination) -> f64 {
        obs.shot_noise(self.vac_var)
    }

    /// Variance relative to shot noise.
    pub fn noise_ratio(&self, obs: &QuadratureCombination) -> Result<f64> {
        Ok(self.variance(obs)? / self.shot_noise(obs))
    }

    /// Full covariance matrix in block order (all Q, then all P).
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        self.storage.to_dense(self.modes.len())
    }

    /// Same state with the other storage backend.
    pub fn converted(&self, policy: StoragePolicy) -> Self {
        let total = self.modes.len();
        let storage = match policy {
            StoragePolicy::Dense => Storage::Dense(self.storage.to_dense(total)),
            StoragePolicy::Sparse | StoragePolicy::Auto => {
                if let Storage::Sparse(_) = self.storage {
                    self.storage.clone()
                } else {
                    let mut out = Storage::sparse_vacuum(total, 0.0);
                    // rebuild blocks from the dense matrix, skipping exact zeros
                    if let (Storage::Sparse(bs), Storage::Dense(cov)) = (&mut out, &self.storage) {
                        *bs = storage_from_dense(cov, total);
                    }
                    out
                }
            }
        };
        Self { storage, ..self.clone() }
    }

    /// max |σ - σᵀ| relative to max |σ|.
    pub fn symmetry_residual(&self) -> f64 {
        match &self.storage {
            Storage::Dense(cov) => {
                let scale = cov.amax().max(f64::MIN_POSITIVE);
                (cov - cov.transpose()).amax() / scale
            }
            // the sparse store writes each block and its transpose together
            Storage::Sparse(_) => 0.0,
        }
    }

    pub fn check_symmetry(&self) -> Result<()> {
        let r = self.symmetry_residual();
        if r > self.tolerances.symmetry {
            return Err(Error::Invariant(format!("covariance asymmetry {r:e}")));
        }
        Ok(())
    }

    /// Symplectic spectrum, ascending. Needs a dense copy, so it refuses
    /// states above the dense threshold.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.modes.len() > DENSE_MODE_THRESHOLD {
            return Err(Error::TooLargeForDense(self.modes.len()));
        }
        symplectic_eigenvalues(&self.covariance_matrix())
    }

    /// All symplectic eigenvalues ≥ v0 (uncertainty principle).
    pub fn check_physical(&self) -> Result<()> {
        let nu = self.symplectic_eigenvalues()?;
        let tol = self.tolerances.purity;
        if let Some(&min) = nu.first() {
            if min < self.vac_var - tol {
                return Err(Error::Invariant(format!(
                    "symplectic eigenvalue {min} below vacuum level {}",
                    self.vac_var
                )));
            }
        }
        Ok(())
    }

    /// All symplectic eigenvalues equal v0.
    pub fn check_pure(&self) -> Result<()> {
        let nu = self.symplectic_eigenvalues()?;
        let tol = self.tolerances.purity;
        let worst = nu
            .iter()
            .map(|v| (v - self.vac_var).abs())
            .fold(0.0_f64, f64::max);
        if worst > tol {
            return Err(Error::Invariant(format!(
                "state is not pure: symplectic eigenvalue deviates by {worst:e}"
            )));
        }
        Ok(())
    }

    /// max |(Ωσ)² + v0² I|, zero for a pure state. Works on sparse storage
    /// without densifying.
    pub fn purity_residual(&self) -> f64 {
        let total = self.modes.len();
        let omega_block = |b: [[f64; 2]; 2]| [[b[1][0], b[1][1]], [-b[0][0], -b[0][1]]];
        let v0sq = self.vac_var * self.vac_var;
        let mut worst = 0.0_f64;
        for i in 0..total {
            let partners_i = self.partner_indices(i);
            let mut targets: Vec<usize> = partners_i
                .iter()
                .flat_map(|&k| self.partner_indices(k))
                .collect();
            targets.sort_unstable();
            targets.dedup();
            for j in targets {
                let mut acc = [[0.0; 2]; 2];
                for &k in &partners_i {
                    let a = omega_block(self.storage.block(total, i, k));
                    let b = omega_block(self.storage.block(total, k, j));
                    for r in 0..2 {
                        for c in 0..2 {
                            acc[r][c] += a[r][0] * b[0][c] + a[r][1] * b[1][c];
                        }
                    }
                }
                if i == j {
                    acc[0][0] += v0sq;
                    acc[1][1] += v0sq;
                }
                for v in acc.iter().flatten() {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    fn partner_indices(&self, i: usize) -> Vec<usize> {
        match &self.storage {
            Storage::Sparse(bs) => bs.partners(i).collect(),
            Storage::Dense(_) => {
                let total = self.modes.len();
                (0..total)
                    .filter(|&j| {
                        self.storage
                            .block(total, i, j)
                            .iter()
                            .flatten()
                            .any(|v| *v != 0.0)
                    })
                    .collect()
            }
        }
    }

    /// Writes the full symmetric covariance as CSV, row-major, 9 significant
    /// digits. Rows are streamed so sparse states never densify.
    pub fn write_covariance_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let total = self.modes.len();
        let dim = 2 * total;
        let mut line = String::new();
        for row in 0..dim {
            line.clear();
            let (i, alpha) = (row % total, row / total);
            for col in 0..dim {
                let (j, beta) = (col % total, col / total);
                let v = self.storage.block(total, i, j)[alpha][beta];
                if col > 0 {
                    line.push(',');
                }
                line.push_str(&crate::format_sig9(v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// `{"M": .., "modes": [..], "v0": ..}`
    pub fn covariance_metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            #[serde(rename = "M")]
            m: usize,
            modes: &'a [ModeLabel],
            v0: f64,
            ordering: &'static str,
        }
        serde_json::to_string_pretty(&Meta {
            m: self.modes.len(),
            modes: &self.modes,
            v0: self.vac_var,
            ordering: "Q_1..Q_M,P_1..P_M",
        })
        .expect("metadata is plain data")
    }
}

fn storage_from_dense(cov: &DMatrix<f64>, total: usize) -> storage::BlockSparse {
    let mut bs = storage::BlockSparse::vacuum(total, 0.0);
    let dense = Storage::Dense(cov.clone());
    for i in 0..total {
        for j in i..total {
            let b = dense.block(total, i, j);
            if i == j || b.iter().flatten().any(|v| *v != 0.0) {
                bs.set(i, j, b);
            }
        }
    }
    bs
}

/// The comb state: vacuum on every `(n, z)` and `(n, y)` in the window,
/// z-polarized EPR pairs of `p_z` squeezed by `r_z`, y-polarized pairs of
/// `p_y` by `r_y`, then a polarization beam splitter at every frequency.
pub fn build_comb_state(pumps: &PumpConfig, comb: &CombSpec) -> Result<GaussianState> {
    build_comb_state_with(pumps, comb, &BuildOptions::default())
}

pub fn build_comb_state_with(
    pumps: &PumpConfig,
    comb: &CombSpec,
    opts: &BuildOptions,
) -> Result<GaussianState> {
    build_opo_output_with(pumps, comb, opts).and_then(|mut state| {
        for n in comb.indices() {
            state.beam_splitter(ModeLabel::z(n), ModeLabel::y(n))?;
        }
        Ok(state)
    })
}

/// EPR pairs straight out of the OPO, before the beam splitter.
pub fn build_opo_output(pumps: &PumpConfig, comb: &CombSpec) -> Result<GaussianState> {
    build_opo_output_with(pumps, comb, &BuildOptions::default())
}

pub fn build_opo_output_with(
    pumps: &PumpConfig,
    comb: &CombSpec,
    opts: &BuildOptions,
) -> Result<GaussianState> {
    pumps.validate()?;
    comb.validate()?;
    let mut state = GaussianState::vacuum_with(comb.modes(), opts)?;
    for pol in [Pol::Z, Pol::Y] {
        let r = pumps.squeezing(pol);
        for (a, b) in epr_pairs(pumps.pump(pol), comb) {
            state.two_mode_squeeze(ModeLabel::new(a, pol), ModeLabel::new(b, pol), r)?;
        }
    }
    Ok(state)
}

/// Comb state with the quarter-turn phase shift on the parity class that
/// turns it into the canonical dual-rail graph state.
pub fn build_graph_state(pumps: &PumpConfig, comb: &CombSpec) -> Result<GaussianState> {
    build_graph_state_with(pumps, comb, &BuildOptions::default())
}

pub fn build_graph_state_with(
    pumps: &PumpConfig,
    comb: &CombSpec,
    opts: &BuildOptions,
) -> Result<GaussianState> {
    crate::comb::require_odd_pumps(pumps)?;
    let mut state = build_comb_state_with(pumps, comb, opts)?;
    state.fourier_shift(crate::comb::shifted_parity(pumps))?;
    Ok(state)
}
