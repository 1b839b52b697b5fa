mod common;

use common::{fig1, int_i_oracle};
use guardzone_core::correlation::{chi_hat, chi_star, f1, f2, ln_rho, rho};
use guardzone_core::single_obs::{
    abc_terms, evidence_success, posterior, posterior_limit_large, posterior_limit_small,
    prior_success,
};
use guardzone_core::{Model, ModelParams};
use std::f64::consts::PI;

#[test]
fn exponents_at_fifty() {
    let m = fig1();
    let t = abc_terms(&m, 50.0);
    assert!((t.b - PI / 2.0).abs() < 1e-13);
    let c = 2e-4 * PI * 5000f64.powf(2.0 / 3.0) * int_i_oracle(25.0, 2.0 / 3.0);
    assert!((t.c - c).abs() < 1e-10);
    assert!(t.b >= t.c);
    let a0 = abc_terms(&m, 1.0).a;
    for &r in &[0.1, 10.0, 1e3] {
        assert_eq!(abc_terms(&m, r).a, a0);
    }
    let tiny = abc_terms(&m, 1e-9);
    assert!(tiny.b < 1e-18 && tiny.c < 1e-18);
}

#[test]
fn posterior_monotone_and_bounded() {
    let m = fig1();
    let mut prev = 0.0;
    let mut r = 0.05;
    while r < 5e3 {
        let t = posterior(&m, r).unwrap();
        assert!(t.p_h1_d1 >= prev);
        for v in [t.p_h1_d1, t.p_h1_d0, t.p_h0_d1, t.p_h0_d0] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((t.p_h1_d1 + t.p_h0_d1 - 1.0).abs() < 1e-15);
        assert!((t.p_h1_d0 + t.p_h0_d0 - 1.0).abs() < 1e-15);
        let pd = evidence_success(&m, r);
        let ltp = t.p_h1_d1 * pd + t.p_h1_d0 * (1.0 - pd) - prior_success(&m);
        assert!(ltp.abs() < 1e-12);
        prev = t.p_h1_d1;
        r *= 1.25;
    }
}

#[test]
fn posterior_limits_where_the_tail_is_short() {
    // delta = 1/4 makes the far-field tail decay like chi^(-3/4)
    let m = Model::new(ModelParams {
        n: 1,
        lambda: 1e-5,
        alpha: 4.0,
        beta: 5.0,
        r_t: 10.0,
        eta: 1e-6,
    })
    .unwrap();
    let lo = posterior(&m, 1e-2).unwrap().p_h1_d1;
    let hi = posterior(&m, 1e4).unwrap().p_h1_d1;
    assert!((lo - posterior_limit_small(&m)).abs() < 1e-6);
    assert!((hi - posterior_limit_large(&m)).abs() < 1e-6);
}

#[test]
fn extreme_noise_and_sparse_network() {
    let mut p = fig1().params;
    p.eta = 1.0;
    assert!(prior_success(&Model::new(p).unwrap()) < 1e-300);
    p.eta = 0.0;
    p.lambda = 1e-15;
    assert!((prior_success(&Model::new(p).unwrap()) - 1.0).abs() < 1e-10);
}

#[test]
fn correlation_peak_is_stationary_and_global() {
    let m = fig1();
    let s = chi_star(&m).unwrap();
    assert!((s.chi - 2.08).abs() < 0.005);
    let h = 1e-4 * s.chi;
    assert!(s.rho >= rho(&m, s.chi + h).unwrap());
    assert!(s.rho >= rho(&m, s.chi - h).unwrap());
    let e = 1e-5 * s.chi;
    let deriv = (rho(&m, s.chi + e).unwrap() - rho(&m, s.chi - e).unwrap()) / (2.0 * e);
    assert!(deriv.abs() < 1e-6 * s.rho, "rho' = {deriv}");
    let hat = chi_hat(&m).unwrap();
    assert!(f1(&m, 1.0) > f2(&m, 1.0) && f1(&m, hat) < f2(&m, hat));
    // brute-force grid confirms the global maximum
    let mut best = (0.0, 0.0);
    let mut x = 1e-3;
    while x < 1e4 {
        let r = rho(&m, x).unwrap();
        if r > best.0 {
            best = (r, x);
        }
        x *= 1.001;
    }
    assert!((best.1 - s.chi).abs() < 0.002 * s.chi);
}

#[test]
fn peak_exceeds_one_across_sweep() {
    for &(n, alpha) in &[(1u32, 2.5), (2, 2.5), (2, 3.0), (2, 4.0), (3, 3.5), (3, 6.0)] {
        for &lambda in &[1e-7, 1e-5, 1e-4, 1e-3] {
            for &beta in &[0.5, 5.0] {
                let m = Model::new(ModelParams {
                    n,
                    lambda,
                    alpha,
                    beta,
                    r_t: 10.0,
                    eta: 0.0,
                })
                .unwrap();
                let s = chi_star(&m).unwrap();
                assert!(s.chi > 1.0, "n={n} alpha={alpha} lambda={lambda}");
                assert!(s.residual.abs() < 1e-10 * (1.0 + m.load()).exp(), "{s:?}");
            }
        }
    }
}

#[test]
fn correlation_vanishes_at_both_ends() {
    let m = fig1();
    assert!(rho(&m, 1e-9).unwrap() < 1e-3);
    assert!(rho(&m, 1e8).unwrap() < 0.01);
    let mut x = 1e-3;
    while x <= 1e6 {
        assert!(ln_rho(&m, x).unwrap().is_finite());
        x *= 1.1;
    }
}
