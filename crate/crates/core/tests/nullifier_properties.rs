mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use qofc::comb::{epr_pairs, shifted_parity};
use qofc::gaussian::{build_comb_state, build_graph_state};
use qofc::nullifier::{
    bs_nullifier, graph_derivation, graph_nullifier, nullifier_table, squeezing_db, wrong_frequency_combination,
    Phase,
};
use qofc::{CombSpec, Pol, PumpConfig, QuadratureCombination};

fn oracle_coeffs(obs: &QuadratureCombination) -> common::Coeffs {
    obs.expanded()
        .into_iter()
        .map(|(m, q, p)| ((m.n, if m.pol == Pol::Z { 'z' } else { 'y' }), q, p))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn squeezing_is_independent_of_theta(r in 0.05f64..1.2, n in 1i64..=5, center_z in any::<bool>()) {
        let pumps = PumpConfig::balanced(1, -1, r).unwrap();
        let comb = CombSpec::with_range(-8, 8).unwrap();
        let state = build_comb_state(&pumps, &comb).unwrap();
        let center = if center_z { Pol::Z } else { Pol::Y };
        let expected = 10.0 * (-2.0 * r).exp().log10();
        for k in 0..64 {
            let theta = 2.0 * PI * k as f64 / 64.0;
            let obs = bs_nullifier(&pumps, &comb, center, n, Phase::Angle(theta)).unwrap();
            prop_assert!((squeezing_db(&state, &obs).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn q_and_p_forms_squeeze_alike(r in 0.0f64..1.5, n in 0i64..=6) {
        let pumps = PumpConfig::balanced(1, -1, r).unwrap();
        let comb = CombSpec::with_range(-8, 8).unwrap();
        let state = build_comb_state(&pumps, &comb).unwrap();
        for center in [Pol::Z, Pol::Y] {
            let q = bs_nullifier(&pumps, &comb, center, n, Phase::Q).unwrap();
            let p = bs_nullifier(&pumps, &comb, center, n, Phase::P).unwrap();
            let (dq, dp) = (squeezing_db(&state, &q).unwrap(), squeezing_db(&state, &p).unwrap());
            prop_assert!((dq - dp).abs() < 1e-9);
        }
    }

    #[test]
    fn graph_nullifiers_squeeze_by_exp_minus_2r(r in 0.0f64..1.5, pumps_idx in 0usize..3) {
        let (pz, py) = [(1, -1), (3, -1), (1, 5)][pumps_idx];
        let pumps = PumpConfig::balanced(pz, py, r).unwrap();
        let comb = CombSpec::with_range(-9, 9).unwrap();
        let state = build_graph_state(&pumps, &comb).unwrap();
        let unshifted = build_comb_state(&pumps, &comb).unwrap();
        for n in comb.indices() {
            if !comb.contains(pz - n) || !comb.contains(py - n) {
                continue;
            }
            for rail in [Pol::Z, Pol::Y] {
                let g = graph_nullifier(&pumps, &comb, rail, n).unwrap();
                let ratio = state.noise_ratio(&g).unwrap();
                prop_assert!((ratio - (-2.0 * r).exp()).abs() < 1e-9);
                let d = graph_derivation(&pumps, &comb, rail, n).unwrap();
                prop_assert!((unshifted.variance(&d).unwrap() - state.variance(&g).unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn graph_nullifier_against_closed_form_oracle() {
    let r = 0.6;
    let pumps = PumpConfig::balanced(1, -1, r).unwrap();
    let comb = CombSpec::with_range(-6, 6).unwrap();
    let cov = common::shifted(&common::comb_covariance(1, -1, r, r, -6, 6), -6, 6, shifted_parity(&pumps) == qofc::comb::Parity::Odd);
    for n in -4..=4 {
        for rail in [Pol::Z, Pol::Y] {
            let c = oracle_coeffs(&graph_nullifier(&pumps, &comb, rail, n).unwrap());
            let ratio = common::variance(&cov, -6, 6, &c) / common::shot_noise(&c);
            assert!((ratio - (-2.0 * r).exp()).abs() < 1e-12, "({n},{rail}) {ratio}");
        }
    }
}

#[test]
fn bs_nullifiers_against_closed_form_oracle() {
    let (r_z, r_y) = (0.5, 0.8);
    let pumps = PumpConfig::new(1, -1, r_z, r_y).unwrap();
    let comb = CombSpec::with_range(-6, 6).unwrap();
    let cov = common::comb_covariance(1, -1, r_z, r_y, -6, 6);
    for (center, r) in [(Pol::Z, r_z), (Pol::Y, r_y)] {
        for (n, _) in epr_pairs(pumps.pump(center), &comb) {
            for phase in [Phase::Q, Phase::P, Phase::Angle(0.9)] {
                let c = oracle_coeffs(&bs_nullifier(&pumps, &comb, center, n, phase).unwrap());
                let ratio = common::variance(&cov, -6, 6, &c) / common::shot_noise(&c);
                assert!((ratio - (-2.0 * r).exp()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn interior_nullifiers_are_uniform() {
    let pumps = PumpConfig::balanced(1, -1, 0.45).unwrap();
    let comb = CombSpec::with_range(-15, 14).unwrap();
    let state = build_comb_state(&pumps, &comb).unwrap();
    let rows = nullifier_table(&state, &pumps, &comb, None).unwrap();
    assert!(!rows.is_empty());
    let first = rows[0].db;
    assert!(rows.iter().all(|r| (r.db - first).abs() < 1e-9));
}

#[test]
fn wrong_frequency_is_flat_cosh() {
    let r = 0.5;
    let pumps = PumpConfig::balanced(1, -1, r).unwrap();
    let comb = CombSpec::with_range(-10, 10).unwrap();
    let state = build_comb_state(&pumps, &comb).unwrap();
    // modes with a partner for the template's pump inside the window
    let interior = |n: i64, p: i64| comb.contains(p - n);
    let mut checked = 0;
    for center in [Pol::Z, Pol::Y] {
        let p = pumps.pump(center);
        for a in comb.indices() {
            for b in comb.indices() {
                if a >= b || !interior(a, p) || !interior(b, p) || a + b == pumps.p_z || a + b == pumps.p_y {
                    continue;
                }
                for theta in [0.0, 0.7, PI / 2.0] {
                    let obs = wrong_frequency_combination(&pumps, &comb, center, a, b, theta).unwrap();
                    assert!((state.noise_ratio(&obs).unwrap() - (2.0 * r).cosh()).abs() < 1e-12);
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn zero_squeezing_gives_unit_ratios() {
    let pumps = PumpConfig::balanced(1, -1, 0.0).unwrap();
    let comb = CombSpec::with_range(-5, 5).unwrap();
    let state = build_graph_state(&pumps, &comb).unwrap();
    for n in -3..=3 {
        let g = graph_nullifier(&pumps, &comb, Pol::Y, n).unwrap();
        assert!((state.noise_ratio(&g).unwrap() - 1.0).abs() < 1e-15);
    }
}
