//! Unequal pump squeezing, `r_z = r + ε`, `r_y = r - ε`.
//!
//! To first order in ε the canonical nullifiers around `n = 0` of the
//! `p_z = 1`, `p_y = -1` wire pick up ε-weighted corrections and the two
//! rails of mode 0 become correlated.

use serde::Serialize;

use crate::comb::{CombSpec, ModeLabel, Pol, PumpConfig};
use crate::error::{Error, Result};
use crate::gaussian::{build_graph_state, GaussianState, Quadrature, QuadratureCombination, Term};
use crate::nullifier::graph_nullifier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImbalanceSpec {
    pub r: f64,
    pub epsilon: f64,
}

impl ImbalanceSpec {
    pub fn new(r: f64, epsilon: f64) -> Result<Self> {
        let spec = Self { r, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || !self.epsilon.is_finite() {
            return Err(Error::InvalidImbalance(format!(
                "r and epsilon must be finite, got r = {}, epsilon = {}",
                self.r, self.epsilon
            )));
        }
        if self.epsilon.abs() >= self.r {
            return Err(Error::InvalidImbalance(format!(
                "|epsilon| must be smaller than r, got r = {}, epsilon = {}",
                self.r, self.epsilon
            )));
        }
        Ok(())
    }

    /// Canonical single-wire pumps with `r_z = r + ε`, `r_y = r - ε`.
    pub fn pumps(&self) -> Result<PumpConfig> {
        PumpConfig::new(1, -1, self.r + self.epsilon, self.r - self.epsilon)
    }
}

fn require_canonical(pumps: &PumpConfig, comb: &CombSpec) -> Result<()> {
    if (pumps.p_z, pumps.p_y) != (1, -1) {
        return Err(Error::InvalidImbalance(format!(
            "first-order forms exist only for p_z = 1, p_y = -1, got ({}, {})",
            pumps.p_z, pumps.p_y
        )));
    }
    for n in [-1, 0, 1] {
        comb.check(n)?;
    }
    Ok(())
}

/// First-order nullifier of node `(0, rail)`:
///
/// ```text
/// z: P^z_0 - εP^y_0 - ½[(1-ε)(Q^y_1 + Q^z_1) + (1+ε)(Q^z_{-1} - Q^y_{-1})]
/// y: P^y_0 - εP^z_0 - ½[(1-ε)(Q^y_1 + Q^z_1) - (1+ε)(Q^z_{-1} - Q^y_{-1})]
/// ```
pub fn first_order_nullifier(
    pumps: &PumpConfig,
    comb: &CombSpec,
    rail: Pol,
    epsilon: f64,
) -> Result<QuadratureCombination> {
    require_canonical(pumps, comb)?;
    let (lo, hi) = (-0.5 * (1.0 - epsilon), -0.5 * (1.0 + epsilon));
    let s = match rail {
        Pol::Z => 1.0,
        Pol::Y => -1.0,
    };
    QuadratureCombination::new(vec![
        Term::p(ModeLabel::new(0, rail), 1.0),
        Term::p(ModeLabel::new(0, rail.other()), -epsilon),
        Term::q(ModeLabel::y(1), lo),
        Term::q(ModeLabel::z(1), lo),
        Term::q(ModeLabel::z(-1), s * hi),
        Term::q(ModeLabel::y(-1), -s * hi),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImbalanceReport {
    pub r: f64,
    pub epsilon: f64,
    /// Ratio predicted to first order, `e^{-2r}`.
    pub first_order_variance: f64,
    /// Exact ratio of the rail-z first-order nullifier.
    pub exact_variance: f64,
    pub residual: f64,
    /// Exact ratio of the rail-y first-order nullifier.
    pub exact_variance_y: f64,
    /// `Cov(Q^z_0, Q^y_0)`.
    pub zy_correlation: f64,
    /// Excess ratio of the balanced rail-z graph nullifier on this state.
    pub degradation: f64,
}

/// Evaluates the first-order forms on the exact imbalanced graph state.
pub fn imbalance_report(spec: &ImbalanceSpec, comb: &CombSpec) -> Result<ImbalanceReport> {
    spec.validate()?;
    let pumps = spec.pumps()?;
    let state = build_graph_state(&pumps, comb)?;
    report_on(&state, spec, &pumps, comb)
}

fn report_on(
    state: &GaussianState,
    spec: &ImbalanceSpec,
    pumps: &PumpConfig,
    comb: &CombSpec,
) -> Result<ImbalanceReport> {
    let predicted = (-2.0 * spec.r).exp();
    let exact = state.noise_ratio(&first_order_nullifier(pumps, comb, Pol::Z, spec.epsilon)?)?;
    let exact_y = state.noise_ratio(&first_order_nullifier(pumps, comb, Pol::Y, spec.epsilon)?)?;
    let balanced = state.noise_ratio(&graph_nullifier(pumps, comb, Pol::Z, 0)?)?;
    Ok(ImbalanceReport {
        r: spec.r,
        epsilon: spec.epsilon,
        first_order_variance: predicted,
        exact_variance: exact,
        residual: exact - predicted,
        exact_variance_y: exact_y,
        zy_correlation: state.covariance(ModeLabel::z(0), Quadrature::Q, ModeLabel::y(0), Quadrature::Q)?,
        degradation: balanced - predicted,
    })
}

/// One report per ε at fixed `r`.
pub fn imbalance_sweep(r: f64, epsilons: &[f64], comb: &CombSpec) -> Result<Vec<ImbalanceReport>> {
    epsilons
        .iter()
        .map(|&epsilon| imbalance_report(&ImbalanceSpec::new(r, epsilon)?, comb))
        .collect()
}

/// Least-squares slope of `ln|y|` against `ln|x|`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::MismatchedCoefficients(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidImbalance("a slope needs at least two points".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb() -> CombSpec {
        CombSpec::with_range(-6, 6).unwrap()
    }

    fn coeff(obs: &QuadratureCombination, mode: ModeLabel) -> (f64, f64) {
        obs.expanded()
            .into_iter()
            .find(|(m, _, _)| *m == mode)
            .map(|(_, q, p)| (q, p))
            .unwrap_or((0.0, 0.0))
    }

    #[test]
    fn imbalance_validation() {
        assert!(ImbalanceSpec::new(0.4, -0.1).is_ok());
        assert!(ImbalanceSpec::new(0.4, 0.4).is_err());
        assert!(ImbalanceSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn coefficients_at_one_percent() {
        let pumps = ImbalanceSpec::new(0.4, 0.01).unwrap().pumps().unwrap();
        let z = first_order_nullifier(&pumps, &comb(), Pol::Z, 0.01).unwrap();
        assert_eq!(coeff(&z, ModeLabel::z(0)), (0.0, 1.0));
        assert!((coeff(&z, ModeLabel::y(0)).1 + 0.01).abs() < 1e-15);
        assert!((coeff(&z, ModeLabel::y(1)).0 + 0.495).abs() < 1e-15);
        assert!((coeff(&z, ModeLabel::z(1)).0 + 0.495).abs() < 1e-15);
        assert!((coeff(&z, ModeLabel::z(-1)).0 + 0.505).abs() < 1e-15);
        assert!((coeff(&z, ModeLabel::y(-1)).0 - 0.505).abs() < 1e-15);

        let y = first_order_nullifier(&pumps, &comb(), Pol::Y, 0.01).unwrap();
        assert_eq!(coeff(&y, ModeLabel::y(0)), (0.0, 1.0));
        assert!((coeff(&y, ModeLabel::z(0)).1 + 0.01).abs() < 1e-15);
        assert!((coeff(&y, ModeLabel::z(-1)).0 - 0.505).abs() < 1e-15);
        assert!((coeff(&y, ModeLabel::y(-1)).0 + 0.505).abs() < 1e-15);
    }

    #[test]
    fn zero_epsilon_is_the_graph_nullifier() {
        let pumps = PumpConfig::balanced(1, -1, 0.4).unwrap();
        for rail in [Pol::Z, Pol::Y] {
            let f = first_order_nullifier(&pumps, &comb(), rail, 0.0).unwrap();
            let g = graph_nullifier(&pumps, &comb(), rail, 0).unwrap();
            assert!(f.approx_eq(&g, 0.0));
        }
    }

    #[test]
    fn non_canonical_pumps_rejected() {
        let pumps = PumpConfig::balanced(3, -1, 0.4).unwrap();
        assert!(matches!(
            first_order_nullifier(&pumps, &comb(), Pol::Z, 0.01),
            Err(Error::InvalidImbalance(_))
        ));
    }

    #[test]
    fn balanced_report() {
        let report = imbalance_report(&ImbalanceSpec::new(0.4, 0.0).unwrap(), &comb()).unwrap();
        assert_eq!(report.zy_correlation, 0.0);
        assert!(report.degradation.abs() < 1e-12);
        assert!(report.residual.abs() < 1e-12);
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [0.1, 0.2, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&xs, &ys[..2]).is_err());
    }
}
