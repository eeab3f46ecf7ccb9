use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::Serialize;

use crate::comb::ModeLabel;
use crate::error::{Error, Result};
use crate::gaussian::symplectic::phase_sin_cos;

/// `coeff · A_mode(angle)` with `A(θ) = (a e^{-iθ} + a† e^{iθ})/√2`, so that
/// `A(0) = Q` and `A(π/2) = P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub mode: ModeLabel,
    pub angle: f64,
    pub coeff: f64,
}

impl Term {
    pub fn new(mode: ModeLabel, angle: f64, coeff: f64) -> Self {
        Self { mode, angle, coeff }
    }

    pub fn q(mode: ModeLabel, coeff: f64) -> Self {
        Self::new(mode, 0.0, coeff)
    }

    pub fn p(mode: ModeLabel, coeff: f64) -> Self {
        Self::new(mode, FRAC_PI_2, coeff)
    }

    /// `(Q, P)` coefficients of this term.
    pub fn expand(&self) -> (f64, f64) {
        let (s, c) = phase_sin_cos(self.angle);
        (self.coeff * c, self.coeff * s)
    }
}

/// A real linear combination of generalized quadratures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureCombination {
    terms: Vec<Term>,
}

impl QuadratureCombination {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.iter().all(|t| t.coeff == 0.0) {
            return Err(Error::EmptyCombination);
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn modes(&self) -> Vec<ModeLabel> {
        let mut modes: Vec<ModeLabel> = self.terms.iter().map(|t| t.mode).collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    /// Per-mode `(Q, P)` coefficients, merged over repeated modes, in label
    /// order.
    pub fn expanded(&self) -> Vec<(ModeLabel, f64, f64)> {
        let mut acc: BTreeMap<ModeLabel, (f64, f64)> = BTreeMap::new();
        for t in &self.terms {
            let (q, p) = t.expand();
            let e = acc.entry(t.mode).or_insert((0.0, 0.0));
            e.0 += q;
            e.1 += p;
        }
        acc.into_iter().map(|(m, (q, p))| (m, q, p)).collect()
    }

    /// Variance of the combination on the vacuum with single-quadrature
    /// variance `v0`.
    pub fn shot_noise(&self, v0: f64) -> f64 {
        v0 * self
            .expanded()
            .iter()
            .map(|(_, q, p)| q * q + p * p)
            .sum::<f64>()
    }

    /// Every term advanced by `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term { angle: t.angle + phi, ..*t })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: t.coeff * factor, ..*t })
                .collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        let terms = self
            .scaled(a)
            .terms
            .into_iter()
            .chain(other.scaled(b).terms)
            .collect();
        Self::new(terms)
    }

    /// Coefficients of a combination built only from Q quadratures.
    pub fn pure_q(&self, tol: f64) -> Result<Vec<(ModeLabel, f64)>> {
        self.expanded()
            .into_iter()
            .map(|(m, q, p)| {
                if p.abs() > tol {
                    Err(Error::NotPureQuadrature("Q"))
                } else {
                    Ok((m, q))
                }
            })
            .collect()
    }

    /// Coefficients of a combination built only from P quadratures.
    pub fn pure_p(&self, tol: f64) -> Result<Vec<(ModeLabel, f64)>> {
        self.expanded()
            .into_iter()
            .map(|(m, q, p)| {
                if q.abs() > tol {
                    Err(Error::NotPureQuadrature("P"))
                } else {
                    Ok((m, p))
                }
            })
            .collect()
    }

    /// True if both combinations expand to the same Q/P coefficients.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let mut acc: BTreeMap<ModeLabel, (f64, f64)> = BTreeMap::new();
        for (m, q, p) in self.expanded() {
            acc.insert(m, (q, p));
        }
        for (m, q, p) in other.expanded() {
            let e = acc.entry(m).or_insert((0.0, 0.0));
            e.0 -= q;
            e.1 -= p;
        }
        acc.values().all(|(q, p)| q.abs() <= tol && p.abs() <= tol)
    }
}

impl fmt::Display for QuadratureCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coeff < 0.0 { '-' } else { '+' };
            if i > 0 || t.coeff < 0.0 {
                write!(f, "{sign}")?;
            }
            let mag = t.coeff.abs();
            if mag != 1.0 {
                write!(f, "{mag}")?;
            }
            let (s, c) = phase_sin_cos(t.angle);
            if s == 0.0 && c == 1.0 {
                write!(f, "Q{}", t.mode)?;
            } else if s == 1.0 && c == 0.0 {
                write!(f, "P{}", t.mode)?;
            } else {
                write!(f, "A{}[{:.4}]", t.mode, t.angle)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_zero_is_q_and_quarter_turn_is_p() {
        let m = ModeLabel::z(0);
        assert_eq!(Term::q(m, 1.0).expand(), (1.0, 0.0));
        assert_eq!(Term::p(m, 1.0).expand(), (0.0, 1.0));
    }

    #[test]
    fn all_zero_rejected() {
        let m = ModeLabel::z(0);
        assert_eq!(
            QuadratureCombination::new(vec![Term::q(m, 0.0)]),
            Err(Error::EmptyCombination)
        );
        assert_eq!(QuadratureCombination::new(vec![]), Err(Error::EmptyCombination));
    }

    #[test]
    fn repeated_modes_merge() {
        let m = ModeLabel::y(2);
        let c = QuadratureCombination::new(vec![Term::q(m, 1.0), Term::q(m, 1.0)]).unwrap();
        assert_eq!(c.expanded(), vec![(m, 2.0, 0.0)]);
        assert!((c.shot_noise(0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_by_quarter_turn_maps_q_to_p() {
        let m = ModeLabel::z(1);
        let c = QuadratureCombination::new(vec![Term::q(m, 1.0)]).unwrap();
        let r = c.rotated(FRAC_PI_2);
        assert!(r.approx_eq(&QuadratureCombination::new(vec![Term::p(m, 1.0)]).unwrap(), 0.0));
    }

    #[test]
    fn display_is_readable() {
        let c = QuadratureCombination::new(vec![
            Term::q(ModeLabel::z(1), 1.0),
            Term::q(ModeLabel::z(0), -1.0),
            Term::p(ModeLabel::y(0), 0.5),
        ])
        .unwrap();
        assert_eq!(c.to_string(), "Q(1,z)-Q(0,z)+0.5P(0,y)");
    }
}
