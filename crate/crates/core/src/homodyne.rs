//! Two-tone balanced homodyne detection.
//!
//! The LO sits at `ω_LO = ω_0 + (p/2 + offset)·Δω` for the chosen pump and
//! carries sidebands at `ω_LO ± (n + ½)·Δω`. When both sidebands land on
//! comb lines the detector measures the generalized two-mode quadrature of
//! that pair; otherwise it sees vacuum.
//!
//! The EOM phase `θ_o` sets the relative angle of the two sidebands
//! (`+θ_o` upper, `-θ_o` lower) and the LO phase `θ_LO` rotates both
//! together. Electronic (dark) noise adds a phase-independent floor to
//! both the signal and the shot-noise reference.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::comb::{CombSpec, Pol, PumpConfig};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, QuadratureCombination};
use crate::nullifier::two_tone_template;
use crate::{format_sig9, to_db};

/// Modulator bandwidth limiting the sideband frequency.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 14e9;

/// Dark noise of the detector relative to shot noise, in dB.
pub const DEFAULT_DARK_DB: f64 = -13.0;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BhdConfig {
    pub lo_center: Pol,
    /// LO detuning from half the pump frequency, in units of Δω. Integer
    /// values probe comb pairs; half-integer values put both sidebands
    /// between comb lines.
    pub lo_offset: f64,
    pub sideband_n: i64,
    pub theta_lo: f64,
    pub theta_o: f64,
    /// `V_en / V_sn`.
    pub dark_to_shot: f64,
    pub bandwidth_hz: f64,
}

impl Default for BhdConfig {
    fn default() -> Self {
        Self {
            lo_center: Pol::Y,
            lo_offset: 0.0,
            sideband_n: 0,
            theta_lo: 0.0,
            theta_o: 0.0,
            dark_to_shot: 0.0,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
        }
    }
}

impl BhdConfig {
    /// Sideband frequency `(n + ½)·Δω`.
    pub fn sideband_hz(&self, comb: &CombSpec) -> f64 {
        (self.sideband_n as f64 + 0.5) * comb.delta_omega
    }

    /// Largest sideband index the modulator can reach.
    pub fn max_sideband(&self, comb: &CombSpec) -> i64 {
        (self.bandwidth_hz / comb.delta_omega - 0.5).floor() as i64
    }

    pub fn validate(&self, comb: &CombSpec) -> Result<()> {
        if self.sideband_n < 0 {
            return Err(Error::InvalidBhd(format!(
                "sideband_n must be non-negative, got {}",
                self.sideband_n
            )));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::InvalidBhd(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if self.sideband_hz(comb) > self.bandwidth_hz {
            return Err(Error::InvalidBhd(format!(
                "sideband n = {} needs {:.4e} Hz, beyond the {:.4e} Hz modulator bandwidth (n_max = {})",
                self.sideband_n,
                self.sideband_hz(comb),
                self.bandwidth_hz,
                self.max_sideband(comb)
            )));
        }
        if !(self.dark_to_shot >= 0.0) || !self.dark_to_shot.is_finite() {
            return Err(Error::InvalidBhd(format!(
                "dark_to_shot must be a finite non-negative ratio, got {}",
                self.dark_to_shot
            )));
        }
        for (name, v) in [
            ("lo_offset", self.lo_offset),
            ("theta_lo", self.theta_lo),
            ("theta_o", self.theta_o),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidBhd(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Comb lines hit by the two LO sidebands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Selection {
    Pair { upper: i64, lower: i64 },
    Empty,
}

fn as_index(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < 1e-9).then_some(r as i64)
}

pub fn selected_modes(cfg: &BhdConfig, pumps: &PumpConfig, comb: &CombSpec) -> Result<Selection> {
    cfg.validate(comb)?;
    let lo = pumps.pump(cfg.lo_center) as f64 / 2.0 + cfg.lo_offset;
    let omega = cfg.sideband_n as f64 + 0.5;
    match (as_index(lo + omega), as_index(lo - omega)) {
        (Some(upper), Some(lower)) => {
            comb.check(upper)?;
            comb.check(lower)?;
            Ok(Selection::Pair { upper, lower })
        }
        _ => Ok(Selection::Empty),
    }
}

/// The two-tone quadrature seen by the detector: the generalized template
/// of the LO's pump with angles `θ_LO + θ_o` on the upper and
/// `θ_LO - θ_o` on the lower sideband.
pub fn measured_observable(cfg: &BhdConfig, pumps: &PumpConfig, comb: &CombSpec) -> Result<QuadratureCombination> {
    match selected_modes(cfg, pumps, comb)? {
        Selection::Pair { upper, lower } => Ok(two_tone_template(
            cfg.lo_center,
            upper,
            lower,
            cfg.theta_lo + cfg.theta_o,
            cfg.theta_lo - cfg.theta_o,
        )),
        Selection::Empty => Err(Error::EmptySelection),
    }
}

fn check_ratio(x: f64, what: &'static str) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidRatio(x, what));
    }
    Ok(())
}

fn check_dark(d: f64) -> Result<()> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidRatio(d, "dark-to-shot ratio must be non-negative"));
    }
    Ok(())
}

/// Ratio seen with dark noise `d = V_en/V_sn` added to both the signal and
/// the reference: `(η + d) / (1 + d)`.
pub fn contaminate(eta_act: f64, dark_to_shot: f64) -> Result<f64> {
    check_ratio(eta_act, "noise ratio must be positive")?;
    check_dark(dark_to_shot)?;
    Ok((eta_act + dark_to_shot) / (1.0 + dark_to_shot))
}

/// Inverse of [`contaminate`]: `η_act = (η_exp - 1)·d + η_exp`.
pub fn correct_electronic_noise(eta_exp: f64, dark_to_shot: f64) -> Result<f64> {
    check_ratio(eta_exp, "measured ratio must be positive")?;
    check_dark(dark_to_shot)?;
    let eta = (eta_exp - 1.0) * dark_to_shot + eta_exp;
    if eta <= 0.0 {
        return Err(Error::InvalidRatio(eta, "corrected ratio is not positive"));
    }
    Ok(eta)
}

/// Phase picked up by a sideband `(n + ½)·fsr` in a coax cable of length
/// `length_m` with propagation speed 2c/3.
pub fn cable_phase(length_m: f64, sideband_n: i64, fsr_hz: f64) -> f64 {
    2.0 * PI * (sideband_n as f64 + 0.5) * fsr_hz * length_m / (2.0 * SPEED_OF_LIGHT / 3.0)
}

/// `count` equally spaced points on `[start, stop)`.
pub fn uniform_grid(count: usize, start: f64, stop: f64) -> Vec<f64> {
    (0..count)
        .map(|k| start + (stop - start) * k as f64 / count as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub theta_lo: f64,
    pub variance_db_raw: f64,
    pub variance_db_corrected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTrace {
    pub config: BhdConfig,
    pub selection: Selection,
    /// Display form of the observable at `θ_LO = 0`, if any.
    pub observable: Option<String>,
    /// Lowest ratio reachable by rotating the LO phase, before dark noise.
    pub floor_ratio: f64,
    pub points: Vec<ScanPoint>,
}

impl ScanTrace {
    pub fn min_corrected_db(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.variance_db_corrected)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_corrected_db(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.variance_db_corrected)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta_lo_rad,variance_db_raw,variance_db_corrected")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{}",
                format_sig9(p.theta_lo),
                format_sig9(p.variance_db_raw),
                format_sig9(p.variance_db_corrected)
            )?;
        }
        Ok(())
    }
}

/// Smallest noise ratio of `obs` under a common rotation of all its terms.
///
/// The variance is `a + b cos 2φ + c sin 2φ` in the rotation angle, so
/// three samples fix it.
pub fn rotation_floor(state: &GaussianState, obs: &QuadratureCombination) -> Result<f64> {
    let v0 = state.variance(obs)?;
    let v45 = state.variance(&obs.rotated(PI / 4.0))?;
    let v90 = state.variance(&obs.rotated(PI / 2.0))?;
    let a = 0.5 * (v0 + v90);
    let b = 0.5 * (v0 - v90);
    let c = v45 - a;
    Ok((a - b.hypot(c)) / state.shot_noise(obs))
}

/// Noise ratio of the measured observable at every LO phase in `grid`,
/// with and without dark noise.
pub fn phase_scan(
    state: &GaussianState,
    cfg: &BhdConfig,
    pumps: &PumpConfig,
    comb: &CombSpec,
    grid: &[f64],
) -> Result<ScanTrace> {
    if grid.is_empty() {
        return Err(Error::InvalidBhd("phase grid is empty".into()));
    }
    let selection = selected_modes(cfg, pumps, comb)?;
    let base = match selection {
        Selection::Pair { .. } => {
            let at_zero = BhdConfig { theta_lo: 0.0, ..*cfg };
            Some(measured_observable(&at_zero, pumps, comb)?)
        }
        Selection::Empty => None,
    };
    let floor_ratio = match &base {
        Some(obs) => rotation_floor(state, obs)?,
        None => 1.0,
    };
    let tol = state.tolerances().theta_independence;
    let mut points = Vec::with_capacity(grid.len());
    for &theta_lo in grid {
        let ratio = match &base {
            Some(obs) => state.noise_ratio(&obs.rotated(theta_lo))?,
            None => 1.0,
        };
        if ratio < floor_ratio - tol {
            return Err(Error::Invariant(format!(
                "scan point {ratio} below the rotation floor {floor_ratio}"
            )));
        }
        let raw = contaminate(ratio, cfg.dark_to_shot)?;
        let corrected = correct_electronic_noise(raw, cfg.dark_to_shot)?;
        points.push(ScanPoint {
            theta_lo,
            variance_db_raw: to_db(raw),
            variance_db_corrected: to_db(corrected),
        });
    }
    Ok(ScanTrace {
        config: *cfg,
        selection,
        observable: base.map(|o| o.to_string()),
        floor_ratio,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::DEFAULT_FSR_HZ;
    use crate::gaussian::build_comb_state;
    use crate::nullifier::{bs_nullifier, Phase};
    use std::f64::consts::FRAC_PI_2;

    fn setup(r: f64) -> (PumpConfig, CombSpec) {
        (PumpConfig::balanced(1, -1, r).unwrap(), CombSpec::with_range(-15, 14).unwrap())
    }

    #[test]
    fn default_bandwidth_reaches_fourteen() {
        let (_, comb) = setup(0.0);
        let cfg = BhdConfig::default();
        assert_eq!(cfg.max_sideband(&comb), 14);
        assert!(BhdConfig { sideband_n: 14, ..cfg }.validate(&comb).is_ok());
        assert!(matches!(
            BhdConfig { sideband_n: 15, ..cfg }.validate(&comb),
            Err(Error::InvalidBhd(_))
        ));
        assert!(BhdConfig { sideband_n: -1, ..cfg }.validate(&comb).is_err());
    }

    #[test]
    fn selection_arithmetic() {
        let (pumps, comb) = setup(0.0);
        let cfg = BhdConfig { sideband_n: 3, ..BhdConfig::default() };
        assert_eq!(
            selected_modes(&cfg, &pumps, &comb).unwrap(),
            Selection::Pair { upper: 3, lower: -4 }
        );
        let off = BhdConfig { lo_offset: 1.0, ..cfg };
        let Selection::Pair { upper, lower } = selected_modes(&off, &pumps, &comb).unwrap() else {
            panic!("expected a pair");
        };
        assert_eq!(upper + lower, pumps.p_y + 2);
        let between = BhdConfig { lo_offset: 0.5, ..cfg };
        assert_eq!(selected_modes(&between, &pumps, &comb).unwrap(), Selection::Empty);
        assert_eq!(
            measured_observable(&between, &pumps, &comb).unwrap_err(),
            Error::EmptySelection
        );
    }

    #[test]
    fn eom_phase_switches_between_q_and_p_forms() {
        let (pumps, comb) = setup(0.0);
        let cfg = BhdConfig { lo_center: Pol::Z, sideband_n: 2, ..BhdConfig::default() };
        let q = measured_observable(&cfg, &pumps, &comb).unwrap();
        assert!(q.approx_eq(&bs_nullifier(&pumps, &comb, Pol::Z, 3, Phase::Q).unwrap(), 0.0));
        let cfg = BhdConfig { theta_o: FRAC_PI_2, ..cfg };
        let p = measured_observable(&cfg, &pumps, &comb).unwrap();
        assert!(p.approx_eq(&bs_nullifier(&pumps, &comb, Pol::Z, 3, Phase::P).unwrap(), 0.0));
    }

    #[test]
    fn contamination_examples() {
        let d = 10f64.powf(-1.3);
        assert!((contaminate(0.45250, 0.050119).unwrap() - 0.47863).abs() < 1e-5);
        assert_eq!(contaminate(0.3, 0.0).unwrap(), 0.3);
        assert!((contaminate(1.0, d).unwrap() - 1.0).abs() < 1e-15);
        assert!((correct_electronic_noise(1.0, d).unwrap() - 1.0).abs() < 1e-15);
        assert!(contaminate(0.0, d).is_err());
        assert!(contaminate(0.5, -0.1).is_err());
        assert!(matches!(
            correct_electronic_noise(0.01, 1.0),
            Err(Error::InvalidRatio(..))
        ));
    }

    #[test]
    fn one_foot_of_cable_is_a_quarter_turn() {
        let phi = cable_phase(0.3048, 0, 1e9);
        let wrapped = (phi + PI).rem_euclid(2.0 * PI) - PI;
        assert!((wrapped.abs() - FRAC_PI_2).abs() < 0.1, "{wrapped}");
        assert!(cable_phase(0.3, 1, DEFAULT_FSR_HZ) > cable_phase(0.3, 0, DEFAULT_FSR_HZ));
    }

    #[test]
    fn scan_is_pi_periodic_with_minimum_at_zero() {
        let r = 0.5;
        let (pumps, comb) = setup(r);
        let state = build_comb_state(&pumps, &comb).unwrap();
        let cfg = BhdConfig { sideband_n: 4, theta_o: 0.3, ..BhdConfig::default() };
        let grid = uniform_grid(64, 0.0, 2.0 * PI);
        let trace = phase_scan(&state, &cfg, &pumps, &comb, &grid).unwrap();
        for k in 0..32 {
            let (a, b) = (trace.points[k], trace.points[k + 32]);
            assert!((a.variance_db_corrected - b.variance_db_corrected).abs() < 1e-9);
        }
        assert!((trace.points[0].variance_db_corrected - to_db((-2.0 * r).exp())).abs() < 1e-9);
        assert!((trace.min_corrected_db() - to_db((-2.0 * r).exp())).abs() < 1e-9);
        assert!((trace.floor_ratio - (-2.0 * r).exp()).abs() < 1e-12);
        assert!((trace.max_corrected_db() - to_db((2.0 * r).exp())).abs() < 1e-9);
    }

    #[test]
    fn empty_selection_scan_is_flat_shot_noise() {
        let (pumps, comb) = setup(0.5);
        let state = build_comb_state(&pumps, &comb).unwrap();
        let cfg = BhdConfig { lo_offset: 0.5, dark_to_shot: 0.05, ..BhdConfig::default() };
        let trace = phase_scan(&state, &cfg, &pumps, &comb, &uniform_grid(8, 0.0, PI)).unwrap();
        assert!(trace.points.iter().all(|p| p.variance_db_raw == 0.0 && p.variance_db_corrected == 0.0));
        assert!(phase_scan(&state, &cfg, &pumps, &comb, &[]).is_err());
    }

    #[test]
    fn csv_header() {
        let (pumps, comb) = setup(0.1);
        let state = build_comb_state(&pumps, &comb).unwrap();
        let trace = phase_scan(&state, &BhdConfig::default(), &pumps, &comb, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("theta_lo_rad,variance_db_raw,variance_db_corrected"));
        assert_eq!(text.lines().count(), 3);
    }
}
