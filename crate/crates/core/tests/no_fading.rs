mod common;

use common::{fig1, fig4, tanh_sinh};
use guardzone_core::correlation::rho;
use guardzone_core::nofading::{
    j_transform, levy_prior, lt_nofade, posterior_nofade, rho_nofade, roc_nofade, IltConfig,
};
use guardzone_core::risk::{roc_curve, CostMatrix, SingleObsRule};
use guardzone_core::single_obs::lt_interference_given_void;
use guardzone_core::{Model, ModelParams};
use num_complex::Complex64;

fn half_scenarios() -> Vec<Model> {
    vec![
        fig4(),
        Model::new(ModelParams { n: 1, lambda: 0.01, alpha: 2.0, beta: 2.0, r_t: 5.0, eta: 0.0 })
            .unwrap(),
        Model::new(ModelParams { n: 3, lambda: 1e-4, alpha: 6.0, beta: 1.0, r_t: 3.0, eta: 1e-4 })
            .unwrap(),
    ]
}

#[test]
fn tiny_void_reproduces_levy_prior() {
    let cfg = IltConfig::default();
    for m in half_scenarios() {
        let prior = levy_prior(&m).unwrap();
        let post = posterior_nofade(&m, 1e-3 * m.params.r_t, &cfg).unwrap();
        assert!((post.value - prior).abs() < 1e-4, "{} vs {prior}", post.value);
        assert!(post.error_estimate <= cfg.precision_target);
    }
}

#[test]
fn j_matches_its_integral() {
    for &(s, u) in &[(0.3f64, 2.0f64), (1.0, 1.0), (5.0, 0.01), (0.01, 50.0)] {
        let w_max: f64 = u.sqrt();
        let q = tanh_sinh(|w| -(-s * w * w).exp_m1() / (w * w), 0.0, w_max);
        let j = j_transform(Complex64::new(s, 0.0), u);
        assert!((j.re - q).abs() < 1e-9 && j.im.abs() < 1e-15, "s={s} u={u}");
    }
}

#[test]
fn posterior_grows_with_the_void() {
    let m = fig4();
    let cfg = IltConfig::default();
    let mut prev = 0.0;
    for i in 0..60 {
        let r = 0.5 * 1.08f64.powi(i);
        let p = posterior_nofade(&m, r, &cfg).unwrap().value;
        assert!(p >= prev - 1e-8, "r={r}");
        prev = p;
    }
}

#[test]
fn posterior_is_a_cdf_in_the_threshold() {
    let cfg = IltConfig::default();
    let mut prev = 0.0;
    for beta in [20.0, 10.0, 5.0, 2.0, 1.0, 0.5] {
        let m = Model::new(ModelParams { beta, ..fig4().params }).unwrap();
        let p = posterior_nofade(&m, 12.0, &cfg).unwrap().value;
        assert!(p >= prev - 1e-8);
        prev = p;
    }
}

#[test]
fn transforms_share_scaling_but_not_values() {
    let m = fig4();
    let doubled = m.with_density(2.0 * m.params.lambda).unwrap();
    for &s in &[1e-3, 1e2, 1e5] {
        let a = lt_nofade(&m, 15.0, Complex64::new(s, 0.0)).re;
        let b = lt_nofade(&doubled, 15.0, Complex64::new(s, 0.0)).re;
        assert!((b.ln() - 2.0 * a.ln()).abs() < 1e-14 + 1e-12 * a.ln().abs());
        let ra = lt_interference_given_void(&m, 15.0, s);
        let rb = lt_interference_given_void(&doubled, 15.0, s);
        assert!((rb.ln() - 2.0 * ra.ln()).abs() < 1e-14 + 1e-12 * ra.ln().abs());
    }
    let s = 1e-12;
    assert!((lt_nofade(&m, 15.0, Complex64::new(s, 0.0)).re - 1.0).abs() < 1e-6);
    assert!((lt_interference_given_void(&m, 15.0, s) - 1.0).abs() < 1e-6);
    let s = 1e4;
    let gap = lt_nofade(&m, 15.0, Complex64::new(s, 0.0)).re - lt_interference_given_void(&m, 15.0, s);
    assert!(gap.abs() > 1e-6);
}

#[test]
fn levy_prior_structure() {
    let m = fig4();
    let tiny = m.with_density(1e-12).unwrap();
    assert!((levy_prior(&tiny).unwrap() - 1.0).abs() < 1e-8);
    assert!((levy_prior(&m).unwrap() - 0.078).abs() < 5e-4);
    assert!(levy_prior(&fig1()).is_err());
    let mut p = fig4().params;
    p.eta = 1.0;
    assert!(levy_prior(&Model::new(p).unwrap()).is_err());
}

fn peak<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=400 {
        let r = 1.0 + 99.0 * i as f64 / 400.0;
        let v = f(r);
        if v > best.0 {
            best = (v, r);
        }
    }
    best
}

#[test]
fn fading_halves_the_peak_correlation() {
    let m = fig4();
    let cfg = IltConfig::default();
    let (nf, _) = peak(|r| rho_nofade(&m, r, &cfg).unwrap());
    let (ray, _) = peak(|r| rho(&m, m.chi_of_radius(r)).unwrap());
    assert!((nf - 0.8).abs() < 0.05, "no fading peak {nf}");
    assert!((ray - 0.4).abs() < 0.05, "Rayleigh peak {ray}");
    assert!(rho_nofade(&m, 0.01, &cfg).unwrap().abs() < 1e-3);
}

#[test]
fn no_fading_roc_dominates() {
    let m = fig4();
    let grid: Vec<f64> = (0..300).map(|i| 2.0 * 1.012f64.powi(i)).collect();
    let nf = roc_nofade(&m, &grid, &IltConfig::default()).unwrap();
    let dense: Vec<f64> = (0..4000).map(|i| 0.5 * 1.003f64.powi(i)).collect();
    let ray = roc_curve(&m, &dense, SingleObsRule::IDENTITY, &CostMatrix::UNIFORM).unwrap();
    let mut best_ratio: f64 = 0.0;
    for pt in nf.iter().filter(|p| p.p_i > 1e-3 && p.p_i < 0.5) {
        // Rayleigh p_I decreases with r_O; find the bracketing pair
        if let Some(w) = ray.windows(2).find(|w| w[0].p_i >= pt.p_i && w[1].p_i <= pt.p_i) {
            let t = (w[0].p_i - pt.p_i) / (w[0].p_i - w[1].p_i);
            let p_ii = w[0].p_ii + t * (w[1].p_ii - w[0].p_ii);
            if pt.p_ii > 0.0 {
                best_ratio = best_ratio.max(p_ii / pt.p_ii);
            }
        }
    }
    assert!(best_ratio >= 3.0, "best ratio {best_ratio}");
}
