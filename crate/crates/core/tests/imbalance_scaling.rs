use qofc::gaussian::build_graph_state;
use qofc::imperfect::{imbalance_report, imbalance_sweep, loglog_slope, ImbalanceSpec};
use qofc::nullifier::graph_nullifier;
use qofc::{CombSpec, Pol, PumpConfig};

fn comb() -> CombSpec {
    CombSpec::with_range(-6, 6).unwrap()
}

fn decade() -> Vec<f64> {
    (0..=10).map(|k| 0.005 * 10f64.powf(k as f64 / 10.0)).collect()
}

#[test]
fn residual_is_quadratic() {
    let eps = decade();
    let reports = imbalance_sweep(0.4, &eps, &comb()).unwrap();
    let residuals: Vec<f64> = reports.iter().map(|r| r.residual).collect();
    let slope = loglog_slope(&eps, &residuals).unwrap();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    let pair = imbalance_sweep(0.4, &[0.01, 0.02], &comb()).unwrap();
    assert!((pair[1].residual / pair[0].residual - 4.0).abs() < 0.1);
}

#[test]
fn correlation_is_linear_and_matches_closed_form() {
    let eps = decade();
    let reports = imbalance_sweep(0.4, &eps, &comb()).unwrap();
    let corr: Vec<f64> = reports.iter().map(|r| r.zy_correlation).collect();
    let slope = loglog_slope(&eps, &corr).unwrap();
    assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    for (e, c) in eps.iter().zip(&corr) {
        let closed = 0.25 * ((2.0 * (0.4 + e)).cosh() - (2.0 * (0.4 - e)).cosh());
        assert!((c - closed).abs() < 1e-12);
    }
}

#[test]
fn negative_epsilon_flips_correlation() {
    let plus = imbalance_report(&ImbalanceSpec::new(0.4, 0.02).unwrap(), &comb()).unwrap();
    let minus = imbalance_report(&ImbalanceSpec::new(0.4, -0.02).unwrap(), &comb()).unwrap();
    assert!((plus.zy_correlation + minus.zy_correlation).abs() < 1e-12);
    assert!((plus.residual - minus.residual).abs() < 1e-12);
}

#[test]
fn zero_epsilon_matches_balanced_pipeline() {
    let r = 0.4;
    let report = imbalance_report(&ImbalanceSpec::new(r, 0.0).unwrap(), &comb()).unwrap();
    let pumps = PumpConfig::balanced(1, -1, r).unwrap();
    let state = build_graph_state(&pumps, &comb()).unwrap();
    let z = state.noise_ratio(&graph_nullifier(&pumps, &comb(), Pol::Z, 0).unwrap()).unwrap();
    let y = state.noise_ratio(&graph_nullifier(&pumps, &comb(), Pol::Y, 0).unwrap()).unwrap();
    assert!((report.exact_variance - z).abs() < 1e-12);
    assert!((report.exact_variance_y - y).abs() < 1e-12);
    assert_eq!(report.zy_correlation, 0.0);
}

#[test]
fn degradation_closed_form() {
    let r = 0.4;
    for e in [0.01, 0.03, 0.1] {
        let report = imbalance_report(&ImbalanceSpec::new(r, e).unwrap(), &comb()).unwrap();
        let closed = (-2.0 * r).exp() * ((2.0 * e).cosh() - 1.0);
        assert!((report.degradation - closed).abs() < 1e-12, "{} vs {closed}", report.degradation);
    }
}
