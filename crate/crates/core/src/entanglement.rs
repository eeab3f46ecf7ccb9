//! van Loock-Furusawa inseparability tests on the 4-mode unit cells of a
//! wire.
//!
//! A unit cell is the pair `(n3, n4)` phasematched by one pump, taken on
//! both rails: `{(n3,z), (n4,z), (n3,y), (n4,y)}`. For a state separable
//! across a bipartition `A|B`, any `u = Σ h_j Q_j`, `v = Σ g_j P_j` obey
//!
//! ```text
//! Var(u) + Var(v) ≥ ½ (|Σ_{j∈A} h_j g_j| + |Σ_{j∈B} h_j g_j|)
//! ```
//!
//! with a single-quadrature vacuum variance of 1/4. Engine variances use
//! 1/2 and are rescaled before comparison.

use serde::Serialize;

use crate::comb::{ceil_half, extract_wires, CombSpec, ModeLabel, Pol, PumpConfig};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, QuadratureCombination};
use crate::nullifier::{bs_nullifier, Phase};

/// Single-quadrature vacuum variance in the units of the bounds.
pub const VLF_VACUUM_VARIANCE: f64 = 0.25;

/// Nullifier ratio below which every bound is violated (-3.0103 dB).
pub const SUFFICIENT_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UnitCell {
    pub center: Pol,
    pub n3: i64,
    pub n4: i64,
}

impl UnitCell {
    /// `(n3,z), (n4,z), (n3,y), (n4,y)`.
    pub fn modes(&self) -> [ModeLabel; 4] {
        [
            ModeLabel::z(self.n3),
            ModeLabel::z(self.n4),
            ModeLabel::y(self.n3),
            ModeLabel::y(self.n4),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub side_a: Vec<ModeLabel>,
    pub side_b: Vec<ModeLabel>,
}

impl Bipartition {
    pub fn label(&self) -> String {
        let join = |s: &[ModeLabel]| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        format!("{}|{}", join(&self.side_a), join(&self.side_b))
    }

    fn in_a(&self, mode: &ModeLabel) -> bool {
        self.side_a.contains(mode)
    }
}

/// The seven bipartitions of a cell: each single mode against the rest,
/// then the three two-against-two splits.
pub fn cell_bipartitions(cell: &UnitCell) -> Vec<Bipartition> {
    let m = cell.modes();
    let (z3, z4, y3, y4) = (m[0], m[1], m[2], m[3]);
    let split = |a: &[ModeLabel]| Bipartition {
        side_a: a.to_vec(),
        side_b: m.iter().copied().filter(|x| !a.contains(x)).collect(),
    };
    vec![
        split(&[z3]),
        split(&[z4]),
        split(&[y3]),
        split(&[y4]),
        split(&[z3, y3]),
        split(&[z3, z4]),
        split(&[z3, y4]),
    ]
}

/// `½(|Σ_A h_j g_j| + |Σ_B h_j g_j|)` over modes indexed alike in `h`,
/// `g` and `in_a`.
pub fn vlf_bound(h: &[f64], g: &[f64], in_a: &[bool]) -> Result<f64> {
    if h.len() != g.len() {
        return Err(Error::MismatchedCoefficients(h.len(), g.len()));
    }
    if h.len() != in_a.len() {
        return Err(Error::MismatchedCoefficients(h.len(), in_a.len()));
    }
    let (mut a, mut b) = (0.0, 0.0);
    for ((hj, gj), side) in h.iter().zip(g).zip(in_a) {
        if *side {
            a += hj * gj;
        } else {
            b += hj * gj;
        }
    }
    Ok(0.5 * (a.abs() + b.abs()))
}

/// A Q-type and a P-type observable used together in one inequality.
#[derive(Clone, Debug)]
struct TestPair {
    label: &'static str,
    u: QuadratureCombination,
    v: QuadratureCombination,
}

fn coefficients_on(obs: &[(ModeLabel, f64)], modes: &[ModeLabel]) -> Vec<f64> {
    modes
        .iter()
        .map(|m| obs.iter().filter(|(k, _)| k == m).map(|(_, c)| c).sum())
        .collect()
}

fn pair_bound(pair: &TestPair, cell: &UnitCell, part: &Bipartition, tol: f64) -> Result<f64> {
    // modes outside the cell carry no Q coefficient, so their products vanish
    let mut modes: Vec<ModeLabel> = cell.modes().to_vec();
    for m in pair.u.modes().into_iter().chain(pair.v.modes()) {
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    let h = coefficients_on(&pair.u.pure_q(tol)?, &modes);
    let g = coefficients_on(&pair.v.pure_p(tol)?, &modes);
    let in_a: Vec<bool> = modes.iter().map(|m| part.in_a(m)).collect();
    vlf_bound(&h, &g, &in_a)
}

fn candidate_pairs(pumps: &PumpConfig, comb: &CombSpec, cell: &UnitCell) -> Result<Vec<TestPair>> {
    let u = bs_nullifier(pumps, comb, cell.center, cell.n3, Phase::Q)?;
    let v = bs_nullifier(pumps, comb, cell.center, cell.n3, Phase::P)?;
    let mut pairs = vec![TestPair { label: "cell", u: u.clone(), v }];
    let other = cell.center.other();
    for (label, n) in [("companion_n3", cell.n3), ("companion_n4", cell.n4)] {
        match bs_nullifier(pumps, comb, other, n, Phase::P) {
            Ok(v) => pairs.push(TestPair { label, u: u.clone(), v }),
            Err(Error::OutOfRange(..)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(pairs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartitionResult {
    pub bipartition: String,
    pub observables: [String; 2],
    pub pairing: &'static str,
    pub sum: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub cell: UnitCell,
    pub bipartitions: Vec<BipartitionResult>,
    pub inseparable: bool,
}

/// Evaluates all seven bipartition inequalities of `cell`. For each one the
/// observable pair with the largest bound is used (ties: in-cell pair
/// first, then the companion at `n3`, then at `n4`).
pub fn check_unit_cell(
    state: &GaussianState,
    pumps: &PumpConfig,
    comb: &CombSpec,
    cell: &UnitCell,
) -> Result<CellReport> {
    let tol = state.tolerances().block_zero;
    let scale = VLF_VACUUM_VARIANCE / state.vacuum_variance();
    let candidates = candidate_pairs(pumps, comb, cell)?;
    let mut bipartitions = Vec::with_capacity(7);
    for part in cell_bipartitions(cell) {
        let mut best: Option<(&TestPair, f64)> = None;
        for pair in &candidates {
            let bound = pair_bound(pair, cell, &part, tol)?;
            if best.map_or(true, |(_, b)| bound > b) {
                best = Some((pair, bound));
            }
        }
        let (pair, bound) = best.expect("the in-cell pair always exists");
        if bound <= 0.0 {
            return Err(Error::OutOfRange(cell.n3, comb.n_min, comb.n_max));
        }
        let sum = scale * (state.variance(&pair.u)? + state.variance(&pair.v)?);
        bipartitions.push(BipartitionResult {
            bipartition: part.label(),
            observables: [pair.u.to_string(), pair.v.to_string()],
            pairing: pair.label,
            sum,
            bound,
            violated: sum < bound,
        });
    }
    let inseparable = bipartitions.iter().all(|b| b.violated);
    Ok(CellReport { cell: *cell, bipartitions, inseparable })
}

/// Unit cells along a wire: consecutive frequencies of the sequence, with
/// `n3` the member at or above half the pump index.
pub fn wire_cells(pumps: &PumpConfig, sequence: &[i64]) -> Vec<UnitCell> {
    sequence
        .windows(2)
        .filter_map(|w| {
            let center = pumps.matching_pump(w[0], w[1])?;
            let p = pumps.pump(center);
            let n3 = if w[0] >= ceil_half(p) { w[0] } else { w[1] };
            Some(UnitCell { center, n3, n4: p - n3 })
        })
        .collect()
}

/// Every beam-splitter nullifier of the wire (both centrings, Q and P) is
/// squeezed strictly below half its shot noise.
pub fn sufficient_condition(
    state: &GaussianState,
    pumps: &PumpConfig,
    comb: &CombSpec,
    sequence: &[i64],
) -> Result<bool> {
    let mut any = false;
    for cell in wire_cells(pumps, sequence) {
        for phase in [Phase::Q, Phase::P] {
            let obs = bs_nullifier(pumps, comb, cell.center, cell.n3, phase)?;
            any = true;
            if state.noise_ratio(&obs)? >= SUFFICIENT_RATIO {
                return Ok(false);
            }
        }
    }
    Ok(any)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WireReport {
    pub sequence: Vec<i64>,
    pub cells: Vec<CellReport>,
    /// Cells skipped because a needed companion mode is outside the comb.
    pub truncated: Vec<UnitCell>,
    pub sufficient_condition: bool,
    pub inseparable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VlfReport {
    pub r_z: f64,
    pub r_y: f64,
    pub wires: Vec<WireReport>,
}

impl VlfReport {
    pub fn all_inseparable(&self) -> bool {
        !self.wires.is_empty() && self.wires.iter().all(|w| w.inseparable)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

/// Runs every cell of one wire. The wire is inseparable when it has at
/// least two overlapping cells and all of them are.
pub fn full_wire_inseparability(
    state: &GaussianState,
    pumps: &PumpConfig,
    comb: &CombSpec,
    sequence: &[i64],
) -> Result<WireReport> {
    let mut cells = Vec::new();
    let mut truncated = Vec::new();
    for cell in wire_cells(pumps, sequence) {
        match check_unit_cell(state, pumps, comb, &cell) {
            Ok(report) => cells.push(report),
            Err(Error::OutOfRange(..)) => truncated.push(cell),
            Err(e) => return Err(e),
        }
    }
    let inseparable = cells.len() >= 2 && cells.iter().all(|c| c.inseparable);
    Ok(WireReport {
        sequence: sequence.to_vec(),
        cells,
        truncated,
        sufficient_condition: sufficient_condition(state, pumps, comb, sequence)?,
        inseparable,
    })
}

/// One report per wire of the comb.
pub fn vlf_report(state: &GaussianState, pumps: &PumpConfig, comb: &CombSpec) -> Result<VlfReport> {
    let wires = extract_wires(pumps, comb)
        .iter()
        .map(|seq| full_wire_inseparability(state, pumps, comb, seq))
        .collect::<Result<Vec<_>>>()?;
    Ok(VlfReport { r_z: pumps.r_z, r_y: pumps.r_y, wires })
}
