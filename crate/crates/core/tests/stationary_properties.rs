use necrostrip_core::{
    eval_p_s, eval_sigma_s, existence_threshold, flat_stationary, threshold_function,
    verify_stationary_residual, Error, TumorParams,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn threshold_is_a_root(sigma_hat in 0.1..5.0_f64, ratio in 1.05..6.0_f64) {
        let sigma_tilde = ratio * sigma_hat;
        let star = existence_threshold(sigma_hat, sigma_tilde).unwrap();
        prop_assert!(star > sigma_tilde);
        let f = threshold_function(ratio, star / sigma_hat);
        prop_assert!(f.abs() <= 1e-11, "f = {}", f);
    }

    #[test]
    fn dichotomy_around_threshold(sigma_hat in 0.1..5.0_f64, ratio in 1.05..6.0_f64) {
        let sigma_tilde = ratio * sigma_hat;
        let star = existence_threshold(sigma_hat, sigma_tilde).unwrap();
        let below = TumorParams::new(sigma_hat, sigma_tilde, 0.999 * star, 1.0, 1.0, 1.0).unwrap();
        let above = TumorParams::new(sigma_hat, sigma_tilde, 1.001 * star, 1.0, 1.0, 1.0).unwrap();
        let is_no_flat = matches!(flat_stationary(&below), Err(Error::NoFlatStationary { .. }));
        prop_assert!(is_no_flat);
        let fs = flat_stationary(&above).unwrap();
        prop_assert!(fs.eta_s > 0.0 && fs.rho_s > fs.eta_s);
    }

    #[test]
    fn closed_forms_satisfy_the_layer_problem(
        sigma_hat in 0.5..2.0_f64,
        ratio in 1.2..3.0_f64,
        excess in 1.05..3.0_f64,
        mu in 0.2..3.0_f64,
        nu in 0.2..3.0_f64,
    ) {
        let sigma_tilde = ratio * sigma_hat;
        let star = existence_threshold(sigma_hat, sigma_tilde).unwrap();
        let p = TumorParams::new(sigma_hat, sigma_tilde, excess * star, mu, nu, 1.0).unwrap();
        let fs = flat_stationary(&p).unwrap();
        let identity = (fs.rho_s - fs.eta_s).cosh() / (p.sigma_bar / p.sigma_hat) - 1.0;
        prop_assert!(identity.abs() <= 1e-12);
        let scale = p.sigma_bar.max(p.mu * p.sigma_bar * fs.rho_s * fs.rho_s);
        let report = verify_stationary_residual(&fs, &p, 64);
        prop_assert!(report.max_abs <= 1e-6 * scale, "{:?}", report);
        prop_assert!((eval_sigma_s(&fs, &p, fs.rho_s).unwrap() - p.sigma_bar).abs() <= 1e-12 * p.sigma_bar);
        prop_assert!((eval_sigma_s(&fs, &p, 0.5 * fs.eta_s).unwrap() - p.sigma_hat).abs() <= 1e-15);
        prop_assert!(eval_p_s(&fs, &p, fs.rho_s).unwrap().abs() <= 1e-12 * scale);
    }

    #[test]
    fn ordering_is_enforced(a in 0.1..5.0_f64, b in 0.1..5.0_f64, c in 0.1..5.0_f64) {
        let ok = a < b && b < c;
        prop_assert_eq!(TumorParams::new(a, b, c, 1.0, 1.0, 1.0).is_ok(), ok);
    }
}

#[test]
fn reference_state() {
    let p = TumorParams::new(1.0, 2.0, 6.0, 1.0, 1.0, 1.0).unwrap();
    let fs = flat_stationary(&p).unwrap();
    assert!((fs.eta_s - 0.9603023225226659).abs() < 1e-13);
    assert!((fs.rho_s - 3.438191052811141).abs() < 1e-13);
    assert!(verify_stationary_residual(&fs, &p, 200).max_abs <= 1e-7);
    let star = existence_threshold(1.0, 2.0).unwrap();
    assert!((star - 4.468).abs() < 1e-3);
    match flat_stationary(&p.with_sigma_bar(4.0).unwrap()) {
        Err(Error::NoFlatStationary { sigma_star, .. }) => assert_eq!(sigma_star, star),
        other => panic!("expected NoFlatStationary, got {other:?}"),
    }
}
