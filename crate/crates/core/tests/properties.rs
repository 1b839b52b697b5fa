use guardzone_core::multi_obs::f_d;
use guardzone_core::single_obs::posterior;
use guardzone_core::specfn::int_i;
use guardzone_core::{Model, ModelParams};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = Model> {
    (1u32..=3, -5.0f64..-1.0, 0.5f64..1.9, 0.5f64..10.0, 1.0f64..20.0, prop_oneof![Just(0.0), 1e-8f64..1e-4])
        .prop_filter_map("alpha > n", |(n, ll, ratio, beta, r_t, eta)| {
            let alpha = n as f64 / (ratio / 2.0).min(0.95);
            Model::new(ModelParams { n, lambda: 10f64.powf(ll), alpha, beta, r_t, eta }).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chi_radius_round_trip(m in model_strategy(), lr in -2.0f64..3.0) {
        let r = 10f64.powf(lr);
        let back = m.radius_of_chi(m.chi_of_radius(r));
        prop_assert!((back - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn int_i_is_increasing(delta in 0.05f64..0.95, lu in -4.0f64..6.0, step in 1e-3f64..1.0) {
        let u = 10f64.powf(lu);
        prop_assert!(int_i(u * (1.0 + step), delta) > int_i(u, delta));
    }

    #[test]
    fn posterior_table_is_a_distribution(m in model_strategy(), lr in -1.0f64..2.5) {
        let r = 10f64.powf(lr);
        let t = posterior(&m, r).unwrap();
        for p in [t.p_h1_d1, t.p_h1_d0, t.p_h0_d1, t.p_h0_d0] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
        prop_assert!((t.p_h1_d1 + t.p_h0_d1 - 1.0).abs() < 1e-12);
        prop_assert!((t.p_h1_d0 + t.p_h0_d0 - 1.0).abs() < 1e-12);
        prop_assert!(t.p_h1_d1 >= t.p_h1_d0 - 1e-12);
    }

    #[test]
    fn f_d_is_a_probability(nu in 0.0f64..300.0, a in 0.0f64..1.0, k in 0u32..12, l in 0u32..30) {
        let v = f_d(nu, a, k, l);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v), "{v}");
    }
}
