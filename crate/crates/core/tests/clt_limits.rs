use convineq::clt::{run_experiment, ExperimentConfig, WKind};
use statrs::function::erf::erf;

/// `int min(1, |x|) gamma` for the standard normal: `2[(gamma(0) - gamma(1)) + P(X > 1)]`.
fn gaussian_phi() -> f64 {
    let gamma = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    2.0 * ((gamma(0.0) - gamma(1.0)) + 0.5 * (1.0 - erf(1.0 / 2f64.sqrt())))
}

#[test]
fn finite_variance_phi_tends_to_gaussian_value() {
    let cfg = ExperimentConfig::new(WKind::FiniteVariance, vec![16, 64, 256], 0, 1);
    let r = run_experiment(&cfg, 1.0).unwrap();
    let c = gaussian_phi();
    assert!((c - 0.63125).abs() < 1e-5);
    assert!((r.phi_values[2] - c).abs() < 2e-3, "{:?}", r.phi_values);
    // the ball mass approaches its Gaussian target monotonically from n = 16
    let target = r.gaussian_target.unwrap();
    let gaps: Vec<f64> = r.p_values.iter().map(|p| (p - target).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn infinite_variance_mass_escapes_the_unit_ball() {
    let cfg = ExperimentConfig::new(WKind::InfiniteVariance, vec![4, 16, 64, 256], 0, 1);
    let r = run_experiment(&cfg, 1.0).unwrap();
    assert!(
        r.phi_values.windows(2).all(|w| w[1] > w[0]),
        "{:?}",
        r.phi_values
    );
    assert!(
        r.p_values.windows(2).all(|w| w[1] < w[0]),
        "{:?}",
        r.p_values
    );
    assert!(r.masses.iter().all(|m| (m - 1.0).abs() <= 0.02));
    assert!(r.warnings.is_empty());
}
