use std::f64::consts::PI;

use proptest::prelude::*;
use qofc::gaussian::build_comb_state;
use qofc::homodyne::{
    contaminate, correct_electronic_noise, measured_observable, phase_scan, uniform_grid, BhdConfig, Selection,
};
use qofc::nullifier::{bs_nullifier, squeezing_db, Phase};
use qofc::{from_db, to_db, CombSpec, Pol, PumpConfig};

proptest! {
    #[test]
    fn contaminate_and_correct_are_inverse(eta in 1e-3f64..20.0, d in 0.0f64..5.0) {
        let back = correct_electronic_noise(contaminate(eta, d).unwrap(), d).unwrap();
        prop_assert!((back - eta).abs() <= 1e-12 * eta.max(1.0));
    }

    #[test]
    fn dark_noise_pulls_toward_shot_noise(eta in 1e-3f64..20.0, d in 0.0f64..5.0) {
        let exp = contaminate(eta, d).unwrap();
        prop_assert!(to_db(exp).abs() <= to_db(eta).abs() + 1e-12);
    }

    #[test]
    fn scan_minimum_is_independent_of_eom_phase(theta_o in 0.0f64..PI, n in 0i64..=10, dark_db in -20.0f64..-8.0) {
        let r = 0.4;
        let pumps = PumpConfig::balanced(1, -1, r).unwrap();
        let comb = CombSpec::with_range(-15, 14).unwrap();
        let state = build_comb_state(&pumps, &comb).unwrap();
        let cfg = BhdConfig { sideband_n: n, theta_o, dark_to_shot: from_db(dark_db), ..BhdConfig::default() };
        let trace = phase_scan(&state, &cfg, &pumps, &comb, &uniform_grid(64, 0.0, PI)).unwrap();
        prop_assert!((trace.min_corrected_db() - to_db((-2.0 * r).exp())).abs() < 1e-9);
        prop_assert!((trace.points[0].variance_db_corrected - to_db((-2.0 * r).exp())).abs() < 1e-9);
    }
}

#[test]
fn scan_minimum_equals_nullifier() {
    let r = 0.55;
    let pumps = PumpConfig::balanced(1, -1, r).unwrap();
    let comb = CombSpec::with_range(-15, 14).unwrap();
    let state = build_comb_state(&pumps, &comb).unwrap();
    for center in [Pol::Z, Pol::Y] {
        for n in 0..=13 {
            let cfg = BhdConfig { lo_center: center, sideband_n: n, dark_to_shot: from_db(-13.0), ..BhdConfig::default() };
            let Selection::Pair { upper, .. } = qofc::homodyne::selected_modes(&cfg, &pumps, &comb).unwrap() else {
                panic!("interior selection");
            };
            let trace = phase_scan(&state, &cfg, &pumps, &comb, &uniform_grid(32, 0.0, 2.0 * PI)).unwrap();
            for phase in [Phase::Q, Phase::P] {
                let null = bs_nullifier(&pumps, &comb, center, upper, phase).unwrap();
                assert!((trace.min_corrected_db() - squeezing_db(&state, &null).unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn observable_at_zero_lo_phase_is_the_printed_nullifier() {
    let pumps = PumpConfig::balanced(1, -1, 0.0).unwrap();
    let comb = CombSpec::with_range(-15, 14).unwrap();
    let cfg = BhdConfig { lo_center: Pol::Y, sideband_n: 5, ..BhdConfig::default() };
    let obs = measured_observable(&cfg, &pumps, &comb).unwrap();
    let q = bs_nullifier(&pumps, &comb, Pol::Y, 5, Phase::Q).unwrap();
    assert!(obs.approx_eq(&q.scaled(-1.0), 0.0));
    let cfg = BhdConfig { theta_o: PI / 2.0, ..cfg };
    let p = bs_nullifier(&pumps, &comb, Pol::Y, 5, Phase::P).unwrap();
    assert!(measured_observable(&cfg, &pumps, &comb).unwrap().approx_eq(&p, 1e-15));
}

#[test]
fn offset_lo_gives_flat_antisqueezing() {
    let r = 0.5;
    let pumps = PumpConfig::balanced(1, -1, r).unwrap();
    let comb = CombSpec::with_range(-15, 14).unwrap();
    let state = build_comb_state(&pumps, &comb).unwrap();
    let cfg = BhdConfig { sideband_n: 2, lo_offset: -1.0, theta_o: 0.3, ..BhdConfig::default() };
    let trace = phase_scan(&state, &cfg, &pumps, &comb, &uniform_grid(64, 0.0, 2.0 * PI)).unwrap();
    for p in &trace.points {
        assert!((p.variance_db_corrected - to_db((2.0 * r).cosh())).abs() < 1e-9);
    }
}
