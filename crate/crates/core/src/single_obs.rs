//! Prior, evidence and posterior of physical-model success given one
//! protocol-model observation, under Rayleigh fading.

use crate::specfn::{int_i, int_i_gap, int_i_tail};
use crate::{Error, Model, Result};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Exponents with `p_H(1) = e^-A`, `p_D(1) = e^-B` and
/// `p_{H|D}(1|1) = e^(-A+B-C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `B - C`, computed without cancellation.
    pub gap: f64,
}

/// Conditional law of `H` given `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorTable {
    pub p_h1_d1: f64,
    pub p_h1_d0: f64,
    pub p_h0_d1: f64,
    pub p_h0_d0: f64,
}

/// `A = lambda c_n kappa sigma^delta + sigma eta`
pub fn exponent_a(model: &Model) -> f64 {
    model.load() * model.kappa() + model.noise_term()
}

/// `p_H(1)`: the link meets its SINR target.
pub fn prior_success(model: &Model) -> f64 {
    (-exponent_a(model)).exp()
}

/// `p_D(1)`: no interferer within `r_o`.
pub fn evidence_success(model: &Model, r_o: f64) -> f64 {
    (-model.ball_mass(r_o)).exp()
}

pub fn abc_terms(model: &Model, r_o: f64) -> AbcTerms {
    abc_terms_chi(model, model.chi_of_radius(r_o))
}

pub(crate) fn abc_terms_chi(model: &Model, chi: f64) -> AbcTerms {
    let d = model.delta();
    let load = model.load();
    AbcTerms {
        a: exponent_a(model),
        b: load * chi.powf(d),
        c: load * int_i(chi, d),
        gap: load * int_i_gap(chi, d),
    }
}

/// `log p_{H|D}(1|1)` as a function of `chi`.
pub(crate) fn log_posterior_chi(model: &Model, chi: f64) -> f64 {
    -model.load() * int_i_tail(chi, model.delta()) - model.noise_term()
}

fn check_radius(r_o: f64) -> Result<()> {
    if !(r_o.is_finite() && r_o > 0.0) {
        return Err(Error::OutOfDomain {
            what: "r_O",
            value: r_o,
        });
    }
    Ok(())
}

/// All four values of `p_{H|D}(h|d)`. `r_o` must be positive and finite;
/// the two limits are [`posterior_limit_small`] and
/// [`posterior_limit_large`].
pub fn posterior(model: &Model, r_o: f64) -> Result<PosteriorTable> {
    check_radius(r_o)?;
    Ok(posterior_chi(model, model.chi_of_radius(r_o)))
}

pub(crate) fn posterior_chi(model: &Model, chi: f64) -> PosteriorTable {
    let t = abc_terms_chi(model, chi);
    let p11 = log_posterior_chi(model, chi).exp();
    // (p_H - p11 p_D) / (1 - p_D) = e^-A (1 - e^-C) / (1 - e^-B)
    let p10 = if t.b > 0.0 {
        (-t.a).exp() * (-t.c).exp_m1() / (-t.b).exp_m1()
    } else {
        (-t.a).exp()
    };
    PosteriorTable {
        p_h1_d1: p11,
        p_h1_d0: p10,
        p_h0_d1: 1.0 - p11,
        p_h0_d0: 1.0 - p10,
    }
}

/// `p_{H|D}(1|1)` as `r_O -> 0`: the prior.
pub fn posterior_limit_small(model: &Model) -> f64 {
    prior_success(model)
}

/// `p_{H|D}(1|1)` as `r_O -> inf`: only noise remains, `e^(-sigma eta)`.
pub fn posterior_limit_large(model: &Model) -> f64 {
    (-model.noise_term()).exp()
}

/// Laplace transform of the interference at the origin given an empty
/// ball of radius `r_o`, at real `s >= 0`.
pub fn lt_interference_given_void(model: &Model, r_o: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let p = &model.params;
    let d = model.delta();
    let u = r_o.powf(p.alpha) / s;
    (-p.lambda * model.derived.c_n * s.powf(d) * int_i_tail(u, d)).exp()
}
