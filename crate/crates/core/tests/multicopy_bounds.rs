use std::f64::consts::FRAC_PI_6;

use distill_lab::edgestate::EdgeParams;
use distill_lab::harness::{sample_ensemble, EnsembleSpec, Filter};
use distill_lab::multicopy::{
    analytic_bound, eps_threshold_for_n, extremal_rank2_tensor_power,
    operator_bound_min_eigenvalue, werner_projector,
};
use distill_lab::qcore::{numeric_rank_kernel_range, tensor_power_bipartite};
use distill_lab::witness::min_rank2_expectation;
use distill_lab::{BipartiteDims, ToleranceConfig};

#[test]
fn two_copy_werner_extremes() {
    let cfg = ToleranceConfig::default();
    let r = extremal_rank2_tensor_power(2, &cfg).unwrap();
    assert!((r.max_value - 1.0 / 64.0).abs() < 1e-6);
    assert!((r.product_maximizer_value - 1.0 / 64.0).abs() < 1e-15);
    assert!(r.min_value >= 1.0 / 576.0 - 1e-8 && r.min_value <= 1.0 / 64.0);
    assert_eq!(r.conjecture_value, 1.0 / 288.0);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["min_witness"]["dimA"], 9);
}

#[test]
fn werner_square_is_a_normalized_rank_64_projector() {
    let cfg = ToleranceConfig::default();
    let rs = werner_projector();
    let (x, _) = tensor_power_bipartite(rs.matrix(), rs.dims(), 2, &cfg).unwrap();
    assert_eq!(numeric_rank_kernel_range(&x, cfg.rank_rel_tol).rank, 64);
    assert!(((&x * &x) * distill_lab::C64::from(64.0) - &x).camax() < 1e-15);
}

#[test]
fn thresholds_shrink_with_copies() {
    let cfg = ToleranceConfig::default();
    for (b, th) in distill_lab::edgestate::default_grid() {
        let p = EdgeParams::new(b, th, 0.0).unwrap();
        let t1 = eps_threshold_for_n(&p, 1, &cfg).unwrap();
        let t2 = eps_threshold_for_n(&p, 2, &cfg).unwrap();
        assert!(t2.eps > 0.0 && t2.eps <= t1.eps);
        assert!(analytic_bound(t2.p1, t2.sigma_gamma_norm, t2.eps, 2) > 0.0);
    }
}

#[test]
fn operator_bound_holds_for_two_copies() {
    let cfg = ToleranceConfig::default();
    let p = EdgeParams::new(1.0, FRAC_PI_6, 0.0).unwrap();
    assert!(operator_bound_min_eigenvalue(&p, 2, &cfg).unwrap() >= -1e-9);
}

#[test]
fn rank4_npt_state_has_negative_single_copy_minimum() {
    let cfg = ToleranceConfig::default();
    let spec = EnsembleSpec::new(BipartiteDims::qutrits(), 4, 1, Filter::Npt, 9).unwrap();
    let (_, rho) = sample_ensemble(&spec, &cfg).unwrap().states.remove(0);
    assert!(
        min_rank2_expectation(&rho.partial_transpose(), rho.dims(), &cfg)
            .unwrap()
            .value
            < 0.0
    );
}
