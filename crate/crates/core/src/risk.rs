//! Bayes risk of guard-zone decision rules, the risk-optimal radius and its
//! sensitivities, Type I/II errors, ROC curves and named operating points.

use crate::correlation;
use crate::roots::{bisect, brent};
use crate::single_obs::{abc_terms_chi, log_posterior_chi};
use crate::specfn::int_i_tail;
use crate::{Error, Model, Result};
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Decision costs: `cij` is the cost of deciding `i` when the truth is `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostMatrix {
    pub c00: f64,
    pub c01: f64,
    pub c10: f64,
    pub c11: f64,
}

impl CostMatrix {
    /// 0/1 loss: the risk is the average error probability.
    pub const UNIFORM: CostMatrix = CostMatrix {
        c00: 0.0,
        c01: 1.0,
        c10: 1.0,
        c11: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.c00, self.c01, self.c10, self.c11];
        if all.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter("costs must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Costs under which an interior optimum can exist.
    pub fn validate_for_optimization(&self) -> Result<()> {
        self.validate()?;
        if !(self.c10 > self.c00 && self.c01 > self.c11) {
            return Err(Error::InvalidParameter(
                "optimization needs c10 > c00 and c01 > c11",
            ));
        }
        Ok(())
    }

    /// `c10 - c00`
    pub fn gamma(&self) -> f64 {
        self.c10 - self.c00
    }

    /// `c01 - c11`
    pub fn nu(&self) -> f64 {
        self.c01 - self.c11
    }
}

/// A map from the protocol observation `d` to a prediction of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SingleObsRule {
    pub g0: bool,
    pub g1: bool,
}

impl SingleObsRule {
    pub const IDENTITY: Self = Self { g0: false, g1: true };
    pub const COMPLEMENT: Self = Self { g0: true, g1: false };
    pub const ALWAYS_0: Self = Self { g0: false, g1: false };
    pub const ALWAYS_1: Self = Self { g0: true, g1: true };

    pub fn all() -> [Self; 4] {
        [Self::ALWAYS_0, Self::IDENTITY, Self::COMPLEMENT, Self::ALWAYS_1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    pub r_o: f64,
    pub p_i: f64,
    pub p_ii: f64,
    pub risk: f64,
}

/// Joint law of `(H, D)` at `chi`, each cell computed without cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Joint {
    pub p_h1: f64,
    pub h1d1: f64,
    pub h1d0: f64,
    pub h0d1: f64,
    pub h0d0: f64,
}

pub(crate) fn joint(model: &Model, chi: f64) -> Joint {
    let t = abc_terms_chi(model, chi);
    let lp = log_posterior_chi(model, chi);
    let e_b = (-t.b).exp();
    let e_a = (-t.a).exp();
    let h1d1 = (lp - t.b).exp();
    let h0d1 = -e_b * lp.exp_m1();
    let h1d0 = -e_a * (-t.c).exp_m1();
    let h0d0 = -(-t.b).exp_m1() - h1d0;
    Joint {
        p_h1: e_a,
        h1d1,
        h1d0,
        h0d1,
        h0d0: h0d0.max(0.0),
    }
}

fn errors_from_joint(j: &Joint, rule: SingleObsRule) -> (f64, f64) {
    let p_h0 = 1.0 - j.p_h1;
    let mut num_i = 0.0;
    let mut num_ii = 0.0;
    if rule.g1 {
        num_i += j.h0d1;
    } else {
        num_ii += j.h1d1;
    }
    if rule.g0 {
        num_i += j.h0d0;
    } else {
        num_ii += j.h1d0;
    }
    let p_i = if p_h0 > 0.0 { num_i / p_h0 } else { 0.0 };
    let p_ii = if j.p_h1 > 0.0 { num_ii / j.p_h1 } else { 0.0 };
    (p_i.clamp(0.0, 1.0), p_ii.clamp(0.0, 1.0))
}

/// Type I (predict success, link fails) and Type II (predict failure, link
/// succeeds) error probabilities of a single-observation rule.
pub fn type_errors(model: &Model, r_o: f64, rule: SingleObsRule) -> (f64, f64) {
    errors_from_joint(&joint(model, model.chi_of_radius(r_o)), rule)
}

/// Expected cost given error probabilities and the prior `p_H(1)`.
pub fn risk_from_errors(cost: &CostMatrix, p_i: f64, p_ii: f64, p_h1: f64) -> f64 {
    (cost.c10 * p_i + cost.c00 * (1.0 - p_i)) * (1.0 - p_h1)
        + (cost.c11 * (1.0 - p_ii) + cost.c01 * p_ii) * p_h1
}

/// Bayes risk of any single-observation rule.
pub fn rule_risk(model: &Model, cost: &CostMatrix, r_o: f64, rule: SingleObsRule) -> f64 {
    let j = joint(model, model.chi_of_radius(r_o));
    let (p_i, p_ii) = errors_from_joint(&j, rule);
    risk_from_errors(cost, p_i, p_ii, j.p_h1)
}

/// Bayes risk of the identity rule `g(d) = d`.
pub fn bayes_risk(model: &Model, cost: &CostMatrix, r_o: f64) -> f64 {
    let t = abc_terms_chi(model, model.chi_of_radius(r_o));
    cost.c00 + (cost.c01 - cost.c00) * (-t.a).exp() + cost.gamma() * (-t.b).exp()
        - (cost.nu() + cost.gamma()) * (-t.a - t.c).exp()
}

/// `f_L = ln(1 + 1/chi) - ln(1 + nu/gamma)`, decreasing in `r_O`.
pub fn f_left(model: &Model, cost: &CostMatrix, r_o: f64) -> f64 {
    let chi = model.chi_of_radius(r_o);
    (1.0 / chi).ln_1p() - (cost.nu() / cost.gamma()).ln_1p()
}

/// `f_R = -A + B - C`, increasing in `r_O`.
pub fn f_right(model: &Model, r_o: f64) -> f64 {
    log_posterior_chi(model, model.chi_of_radius(r_o))
}

/// Outcome of minimizing the identity-rule risk over `r_O`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimalRadius {
    Interior {
        r_o: f64,
        chi: f64,
        risk: f64,
        /// Residual of the first-order condition at `r_o`.
        residual: f64,
    },
    /// `ln(1 + nu/gamma) <= sigma eta`: the risk keeps falling as the
    /// guard zone grows; `risk` is its limit.
    NoInteriorOptimum { risk: f64 },
}

pub fn optimal_radius(model: &Model, cost: &CostMatrix) -> Result<OptimalRadius> {
    cost.validate_for_optimization()?;
    let ratio = cost.nu() / cost.gamma();
    let a = abc_terms_chi(model, 1.0).a;
    if ratio.ln_1p() <= model.noise_term() {
        return Ok(OptimalRadius::NoInteriorOptimum {
            risk: cost.c00 + (cost.c01 - cost.c00) * (-a).exp(),
        });
    }
    let d = model.delta();
    let load = model.load();
    let noise = model.noise_term();
    // f_L - f_R in x = ln chi; strictly decreasing
    let phi = |x: f64| {
        let chi = x.exp();
        (-x).exp().ln_1p() - ratio.ln_1p() + load * int_i_tail(chi, d) + noise
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut steps = 0;
    while phi(lo) <= 0.0 && steps < 200 {
        lo -= 2.0 * (steps as f64 + 1.0);
        steps += 1;
    }
    while phi(hi) > 0.0 && steps < 400 {
        hi += 2.0 * (steps as f64 + 1.0);
        steps += 1;
    }
    let x = brent(phi, lo, hi, 1e-15, "optimal_radius")?;
    let chi = x.exp();
    let t = abc_terms_chi(model, chi);
    let lhs = (1.0 + 1.0 / chi) / (1.0 + ratio);
    let residual = lhs - log_posterior_chi(model, chi).exp();
    let risk = cost.c00 + (cost.c01 - cost.c00) * (-t.a).exp() - cost.gamma() * (-t.b).exp() / chi;
    Ok(OptimalRadius::Interior {
        r_o: model.radius_of_chi(chi),
        chi,
        risk,
        residual,
    })
}

/// Derivatives of the optimal radius with respect to density and `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivities {
    pub r_o: f64,
    pub d_lambda: f64,
    pub d_sigma: f64,
}

/// Sensitivities of the optimal radius for a noise-free scenario.
pub fn sensitivities(model: &Model, cost: &CostMatrix) -> Result<Sensitivities> {
    if model.params.eta != 0.0 {
        return Err(Error::InvalidParameter("sensitivities require eta = 0"));
    }
    let (r, chi) = match optimal_radius(model, cost)? {
        OptimalRadius::Interior { r_o, chi, .. } => (r_o, chi),
        OptimalRadius::NoInteriorOptimum { .. } => {
            return Err(Error::Degenerate("no interior optimum"));
        }
    };
    let p = &model.params;
    let d = model.delta();
    let c_n = model.derived.c_n;
    let sigma = model.sigma();
    let sd = sigma.powf(d);
    let tail = int_i_tail(chi, d);
    let denom = p.alpha * (1.0 + d * model.ball_mass(r));
    let d_lambda = c_n * sd * r * (1.0 + chi) * tail / denom;
    let d_sigma = r * (1.0 + p.lambda * c_n * d * sd * ((1.0 + chi) * tail + chi.powf(d)))
        / (sigma * denom);
    Ok(Sensitivities {
        r_o: r,
        d_lambda,
        d_sigma,
    })
}

/// Named guard-zone radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoints {
    /// Smallest radius excluding any single dominant interferer; `None`
    /// when noise alone defeats the link (`1/sigma <= eta`).
    pub r_di: Option<f64>,
    /// Radius at which `p_D(1) = p_H(1)`.
    pub r_mm: f64,
    /// Radius of equal Type I and Type II error.
    pub r_ee: f64,
}

pub fn dominant_interferer_radius(model: &Model) -> Option<f64> {
    let slack = 1.0 / model.sigma() - model.params.eta;
    (slack > 0.0).then(|| slack.powf(-1.0 / model.params.alpha))
}

pub fn mean_matched_radius(model: &Model) -> f64 {
    let p = &model.params;
    let sd = model.sigma().powf(model.delta());
    (model.kappa() * sd + model.noise_term() / (p.lambda * model.derived.c_n)).powf(1.0 / p.n as f64)
}

pub fn equal_error_radius(model: &Model) -> Result<f64> {
    let f = |x: f64| {
        let (pi, pii) = type_errors(model, x.exp(), SingleObsRule::IDENTITY);
        pi - pii
    };
    let start = mean_matched_radius(model).ln();
    let (mut lo, mut hi) = (start - 1.0, start + 1.0);
    let mut steps = 0;
    while f(lo) <= 0.0 && steps < 100 {
        lo -= 2.0;
        steps += 1;
    }
    while f(hi) >= 0.0 && steps < 200 {
        hi += 2.0;
        steps += 1;
    }
    let x = bisect(f, lo, hi, 1e-15, "equal_error_radius")?;
    Ok(x.exp())
}

pub fn operating_points(model: &Model) -> Result<OperatingPoints> {
    Ok(OperatingPoints {
        r_di: dominant_interferer_radius(model),
        r_mm: mean_matched_radius(model),
        r_ee: equal_error_radius(model)?,
    })
}

/// Radius at which the correlation of `H` and `D` peaks.
pub fn max_correlation_radius(model: &Model) -> Result<f64> {
    Ok(model.radius_of_chi(correlation::chi_star(model)?.chi))
}

pub fn roc_curve(
    model: &Model,
    r_o_grid: &[f64],
    rule: SingleObsRule,
    cost: &CostMatrix,
) -> Result<Vec<RocPoint>> {
    if r_o_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("r_O grid must be positive and finite"));
    }
    if r_o_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("r_O grid must be strictly increasing"));
    }
    Ok(r_o_grid
        .iter()
        .map(|&r| {
            let j = joint(model, model.chi_of_radius(r));
            let (p_i, p_ii) = errors_from_joint(&j, rule);
            RocPoint {
                r_o: r,
                p_i,
                p_ii,
                risk: risk_from_errors(cost, p_i, p_ii, j.p_h1),
            }
        })
        .collect())
}
