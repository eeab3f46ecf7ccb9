//! Nullifier families of the comb and their squeezing.
//!
//! All combinations are unnormalized (integer or half-integer
//! coefficients); squeezing is always the variance relative to the shot
//! noise of the same combination.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::Serialize;

use crate::comb::{epr_pairs, graph_neighbors, require_odd_pumps, CombSpec, ModeLabel, Parity, Pol, PumpConfig};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quadrature, QuadratureCombination, Term};
use crate::{format_sig9, to_db};

/// Quadrature choice for beam-splitter nullifiers: the printed Q or P form,
/// or the generalized form at angle θ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    Quad(Quadrature),
    Angle(f64),
}

impl Phase {
    pub const Q: Phase = Phase::Quad(Quadrature::Q);
    pub const P: Phase = Phase::Quad(Quadrature::P);

    pub fn theta(self) -> f64 {
        match self {
            Phase::Quad(Quadrature::Q) => 0.0,
            Phase::Quad(Quadrature::P) => FRAC_PI_2,
            Phase::Angle(t) => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullifierKind {
    EprQ,
    EprP,
    BsQ,
    BsP,
    GraphZ,
    GraphY,
    Generalized,
}

impl NullifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NullifierKind::EprQ => "epr_q",
            NullifierKind::EprP => "epr_p",
            NullifierKind::BsQ => "bs_q",
            NullifierKind::BsP => "bs_p",
            NullifierKind::GraphZ => "graph_z",
            NullifierKind::GraphY => "graph_y",
            NullifierKind::Generalized => "generalized",
        }
    }
}

fn check_pair(comb: &CombSpec, a: i64, b: i64) -> Result<()> {
    comb.check(a)?;
    comb.check(b)?;
    if a == b {
        return Err(Error::SameMode(ModeLabel::z(a), ModeLabel::z(b)));
    }
    Ok(())
}

/// Relative sign between the polarizations in the template centred on
/// `center`: `+` for z, `-` for y.
fn rail_sign(center: Pol) -> f64 {
    match center {
        Pol::Z => 1.0,
        Pol::Y => -1.0,
    }
}

/// `[A^z_a(θ_a) ± A^y_a(θ_a)] - [A^z_b(θ_b) ± A^y_b(θ_b)]`, with `+` for a
/// z-centred and `-` for a y-centred template.
pub fn two_tone_template(center: Pol, a: i64, b: i64, theta_a: f64, theta_b: f64) -> QuadratureCombination {
    let s = rail_sign(center);
    QuadratureCombination::new(vec![
        Term::new(ModeLabel::z(a), theta_a, 1.0),
        Term::new(ModeLabel::y(a), theta_a, s),
        Term::new(ModeLabel::z(b), theta_b, -1.0),
        Term::new(ModeLabel::y(b), theta_b, -s),
    ])
    .expect("template has nonzero coefficients")
}

/// `Q^{(j)}_n - Q^{(j)}_{p_j-n}` or `P^{(j)}_n + P^{(j)}_{p_j-n}` on the
/// OPO output, before the beam splitter.
pub fn epr_nullifier(
    pumps: &PumpConfig,
    comb: &CombSpec,
    pump: Pol,
    n: i64,
    quad: Quadrature,
) -> Result<QuadratureCombination> {
    let partner = pumps.pump(pump) - n;
    check_pair(comb, n, partner)?;
    let (a, b) = (ModeLabel::new(n, pump), ModeLabel::new(partner, pump));
    let terms = match quad {
        Quadrature::Q => vec![Term::q(a, 1.0), Term::q(b, -1.0)],
        Quadrature::P => vec![Term::p(a, 1.0), Term::p(b, 1.0)],
    };
    QuadratureCombination::new(terms)
}

/// Beam-splitter basis nullifier of the pair `(n, p - n)` of the pump
/// `center`.
///
/// The printed forms are
///
/// ```text
/// z, Q: [Q^z_n + Q^y_n] - [Q^z_{p-n} + Q^y_{p-n}]
/// z, P: [P^z_n + P^y_n] + [P^z_{p-n} + P^y_{p-n}]
/// y, Q: [Q^z_{p-n} - Q^y_{p-n}] - [Q^z_n - Q^y_n]
/// y, P: [P^z_{p-n} - P^y_{p-n}] + [P^z_n - P^y_n]
/// ```
///
/// and `Phase::Angle(θ)` gives the generalized form with angle θ on mode
/// `n` and -θ on mode `p - n`.
pub fn bs_nullifier(
    pumps: &PumpConfig,
    comb: &CombSpec,
    center: Pol,
    n: i64,
    phase: Phase,
) -> Result<QuadratureCombination> {
    let partner = pumps.pump(center) - n;
    check_pair(comb, n, partner)?;
    let s = rail_sign(center);
    let (zn, yn, zp, yp) = (
        ModeLabel::z(n),
        ModeLabel::y(n),
        ModeLabel::z(partner),
        ModeLabel::y(partner),
    );
    let comb = match (center, phase) {
        (_, Phase::Angle(theta)) => return Ok(two_tone_template(center, n, partner, theta, -theta)),
        (Pol::Z, Phase::Quad(Quadrature::Q)) => vec![
            Term::q(zn, 1.0),
            Term::q(yn, 1.0),
            Term::q(zp, -1.0),
            Term::q(yp, -1.0),
        ],
        (Pol::Y, Phase::Quad(Quadrature::Q)) => vec![
            Term::q(zp, 1.0),
            Term::q(yp, -1.0),
            Term::q(zn, -1.0),
            Term::q(yn, 1.0),
        ],
        (_, Phase::Quad(Quadrature::P)) => vec![
            Term::p(zp, 1.0),
            Term::p(yp, s),
            Term::p(zn, 1.0),
            Term::p(yn, s),
        ],
    };
    QuadratureCombination::new(comb)
}

fn graph_terms(pumps: &PumpConfig, node: ModeLabel, keep: impl Fn(i64) -> bool) -> (Vec<Term>, bool) {
    let mut terms = vec![Term::p(node, 1.0)];
    let mut truncated = false;
    for (other, w) in graph_neighbors(node, pumps) {
        if keep(other.n) {
            terms.push(Term::q(other, -w.value()));
        } else {
            truncated = true;
        }
    }
    (terms, truncated)
}

/// Canonical graph nullifier of node `(n, rail)` on the Fourier-shifted
/// state:
///
/// ```text
/// z: P^z_n - ½(Q^y_{p_z-n} + Q^z_{p_z-n} + Q^z_{p_y-n} - Q^y_{p_y-n})
/// y: P^y_n - ½(Q^y_{p_z-n} + Q^z_{p_z-n} - Q^z_{p_y-n} + Q^y_{p_y-n})
/// ```
///
/// Every neighbour must be inside the comb.
pub fn graph_nullifier(pumps: &PumpConfig, comb: &CombSpec, rail: Pol, n: i64) -> Result<QuadratureCombination> {
    require_odd_pumps(pumps)?;
    comb.check(n)?;
    comb.check(pumps.p_z - n)?;
    comb.check(pumps.p_y - n)?;
    let (terms, _) = graph_terms(pumps, ModeLabel::new(n, rail), |_| true);
    QuadratureCombination::new(terms)
}

/// Graph nullifier with out-of-range neighbours dropped. The flag is set
/// when at least one neighbour was missing.
pub fn truncated_graph_nullifier(
    pumps: &PumpConfig,
    comb: &CombSpec,
    rail: Pol,
    n: i64,
) -> Result<(QuadratureCombination, bool)> {
    require_odd_pumps(pumps)?;
    comb.check(n)?;
    let (terms, truncated) = graph_terms(pumps, ModeLabel::new(n, rail), |k| comb.contains(k));
    Ok((QuadratureCombination::new(terms)?, truncated))
}

/// The graph nullifier of `(n, rail)` rebuilt from beam-splitter
/// nullifiers, to be evaluated on the unshifted comb state.
///
/// Nodes in the shifted class come from the Q forms, `(z ∓ y)/2` for rail
/// z / y; the others from the P forms, `(z ± y)/2`.
pub fn graph_derivation(pumps: &PumpConfig, comb: &CombSpec, rail: Pol, n: i64) -> Result<QuadratureCombination> {
    require_odd_pumps(pumps)?;
    comb.check(pumps.p_z - n)?;
    comb.check(pumps.p_y - n)?;
    let shifted = crate::comb::shifted_parity(pumps).contains(n);
    let (phase, sign) = match (shifted, rail) {
        (true, Pol::Z) => (Phase::Q, -1.0),
        (true, Pol::Y) => (Phase::Q, 1.0),
        (false, Pol::Z) => (Phase::P, 1.0),
        (false, Pol::Y) => (Phase::P, -1.0),
    };
    let z = bs_nullifier(pumps, comb, Pol::Z, n, phase)?;
    let y = bs_nullifier(pumps, comb, Pol::Y, n, phase)?;
    z.combine(0.5, &y, 0.5 * sign)
}

/// Expresses an observable on the Fourier-shifted state as the equivalent
/// observable on the unshifted state.
pub fn fourier_pullback(obs: &QuadratureCombination, class: Parity) -> QuadratureCombination {
    let terms = obs
        .terms()
        .iter()
        .map(|t| {
            if class.contains(t.mode.n) {
                Term { angle: t.angle - FRAC_PI_2, ..*t }
            } else {
                *t
            }
        })
        .collect();
    QuadratureCombination::new(terms).expect("pullback keeps coefficients")
}

/// Beam-splitter template over a pair that no pump phasematches.
pub fn wrong_frequency_combination(
    pumps: &PumpConfig,
    comb: &CombSpec,
    center: Pol,
    n_i: i64,
    n_ii: i64,
    theta: f64,
) -> Result<QuadratureCombination> {
    check_pair(comb, n_i, n_ii)?;
    if n_i + n_ii == pumps.p_z || n_i + n_ii == pumps.p_y {
        return Err(Error::PhaseMatched(n_i, n_ii));
    }
    Ok(two_tone_template(center, n_i, n_ii, theta, -theta))
}

/// `10·log10(Var / shot noise)`.
pub fn squeezing_db(state: &GaussianState, obs: &QuadratureCombination) -> Result<f64> {
    Ok(to_db(state.noise_ratio(obs)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullifierRow {
    pub kind: NullifierKind,
    pub pump_center: Pol,
    pub n: i64,
    pub theta: f64,
    pub variance: f64,
    pub shot_noise: f64,
    #[serde(rename = "dB")]
    pub db: f64,
}

impl NullifierRow {
    pub fn evaluate(
        state: &GaussianState,
        kind: NullifierKind,
        pump_center: Pol,
        n: i64,
        theta: f64,
        obs: &QuadratureCombination,
    ) -> Result<Self> {
        let variance = state.variance(obs)?;
        let shot_noise = state.shot_noise(obs);
        Ok(Self {
            kind,
            pump_center,
            n,
            theta,
            variance,
            shot_noise,
            db: to_db(variance / shot_noise),
        })
    }
}

/// Every beam-splitter nullifier (both centrings, Q and P) whose pair lies
/// in the comb, optionally restricted to the frequencies of one wire.
/// Rows are ordered by centring (z first), then `n`, then Q before P.
pub fn nullifier_table(
    state: &GaussianState,
    pumps: &PumpConfig,
    comb: &CombSpec,
    wire: Option<&[i64]>,
) -> Result<Vec<NullifierRow>> {
    let mut rows = Vec::new();
    for center in [Pol::Z, Pol::Y] {
        for (n, partner) in epr_pairs(pumps.pump(center), comb) {
            if let Some(freqs) = wire {
                if !freqs.contains(&n) || !freqs.contains(&partner) {
                    continue;
                }
            }
            for (kind, phase) in [(NullifierKind::BsQ, Phase::Q), (NullifierKind::BsP, Phase::P)] {
                let obs = bs_nullifier(pumps, comb, center, n, phase)?;
                rows.push(NullifierRow::evaluate(state, kind, center, n, phase.theta(), &obs)?);
            }
        }
    }
    Ok(rows)
}

/// Canonical graph nullifiers of every node whose neighbours are all in
/// range, evaluated on a Fourier-shifted state.
pub fn graph_table(state: &GaussianState, pumps: &PumpConfig, comb: &CombSpec) -> Result<Vec<NullifierRow>> {
    let mut rows = Vec::new();
    for (rail, kind) in [(Pol::Z, NullifierKind::GraphZ), (Pol::Y, NullifierKind::GraphY)] {
        for n in comb.indices() {
            if !comb.contains(pumps.p_z - n) || !comb.contains(pumps.p_y - n) {
                continue;
            }
            let obs = graph_nullifier(pumps, comb, rail, n)?;
            rows.push(NullifierRow::evaluate(state, kind, rail, n, FRAC_PI_2, &obs)?);
        }
    }
    Ok(rows)
}

pub fn write_table_csv<W: Write>(rows: &[NullifierRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "kind,pump_center,n,theta,variance,shot_noise,dB")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.kind.as_str(),
            r.pump_center,
            r.n,
            format_sig9(r.theta),
            format_sig9(r.variance),
            format_sig9(r.shot_noise),
            format_sig9(r.db)
        )?;
    }
    Ok(())
}
