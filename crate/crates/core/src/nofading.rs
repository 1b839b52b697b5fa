//! The no-fading contrast at `delta = 1/2`: Levy-distributed interference,
//! a void-conditioned transform inverted numerically, and the resulting
//! correlation and ROC.

use crate::ilt;
use crate::risk::RocPoint;
use crate::specfn::{erf_complex, gauss_q};
use crate::{Error, Model, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum IltMethod {
    /// Euler summation on a vertical line in the right half plane.
    Euler,
    /// Fixed Talbot contour. Unsuitable once a void is imposed: the
    /// transform grows double-exponentially left of the imaginary axis.
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IltConfig {
    pub method: IltMethod,
    /// Transform evaluations (Euler uses `2m + 1` of them).
    pub terms: usize,
    pub precision_target: f64,
}

impl Default for IltConfig {
    fn default() -> Self {
        IltConfig {
            method: IltMethod::Euler,
            terms: 41,
            precision_target: 1e-7,
        }
    }
}

impl IltConfig {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 8 {
            return Err(Error::InvalidParameter("ILT needs at least 8 terms"));
        }
        if !(self.precision_target > 0.0) {
            return Err(Error::InvalidParameter("precision target must be positive"));
        }
        Ok(())
    }
}

/// An inverted probability with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    pub error_estimate: f64,
}

fn check_half(model: &Model) -> Result<()> {
    let p = &model.params;
    if (p.alpha - 2.0 * p.n as f64).abs() > 1e-12 * p.alpha {
        return Err(Error::InvalidParameter(
            "no-fading results need delta = 1/2 (alpha = 2n)",
        ));
    }
    Ok(())
}

fn threshold(model: &Model) -> Result<f64> {
    let t = 1.0 / model.sigma() - model.params.eta;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(
            "1/sigma <= eta: target unreachable even without interference",
        ));
    }
    Ok(t)
}

/// Success probability without fading: `2 Q(c_n lambda sqrt((pi/2)/(1/sigma - eta)))`.
pub fn levy_prior(model: &Model) -> Result<f64> {
    check_half(model)?;
    let t = threshold(model)?;
    let z = model.derived.c_n * model.params.lambda * (0.5 * PI / t).sqrt();
    Ok(2.0 * gauss_q(z))
}

/// `J(s, u) = sqrt(pi s) erf(sqrt(s u)) - (1 - e^(-s u)) / sqrt(u)`, using
/// the principal square root. `u = inf` gives `sqrt(pi s)`.
pub fn j_transform(s: Complex64, u: f64) -> Complex64 {
    let root = (s * PI).sqrt();
    if u == f64::INFINITY {
        return root;
    }
    let su = s * u;
    let decay = -(su.exp_m1_c()) / u.sqrt();
    root * erf_complex(su.sqrt()) - decay
}

trait ExpM1 {
    fn exp_m1_c(self) -> Complex64;
}

impl ExpM1 for Complex64 {
    /// `e^(-z) - 1` for the decay term, accurate near zero.
    fn exp_m1_c(self) -> Complex64 {
        let z = -self;
        if z.norm() < 1e-3 {
            // z + z^2/2 + z^3/6 + z^4/24
            z * (Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)))
        } else {
            z.exp() - 1.0
        }
    }
}

/// Transform of the interference given no transmitter within `r_o`.
pub fn lt_nofade(model: &Model, r_o: f64, s: Complex64) -> Complex64 {
    let u = r_o.powf(-model.params.alpha);
    (-j_transform(s, u) * (model.params.lambda * model.derived.c_n)).exp()
}

/// Largest Euler order tried when the requested one misses the target;
/// beyond it roundoff (amplified by `10^(m/3)`) dominates.
const MAX_EULER_ORDER: usize = 26;

fn invert_cdf(model: &Model, r_o: f64, t: f64, cfg: &IltConfig) -> Result<Inversion> {
    let f = |s: Complex64| lt_nofade(model, r_o, s) / s;
    let (raw, error_estimate) = match cfg.method {
        IltMethod::Euler => {
            // raise the order in steps of two until successive values agree
            let mut m = (cfg.terms - 1) / 2;
            let mut prev = ilt::euler(f, t, m - 2);
            let mut best = (f64::NAN, f64::INFINITY);
            loop {
                let v = ilt::euler(f, t, m);
                let e = (v - prev).abs();
                if e < best.1 {
                    best = (v, e);
                }
                if e <= cfg.precision_target || m + 2 > MAX_EULER_ORDER.max((cfg.terms - 1) / 2) {
                    break;
                }
                prev = v;
                m += 2;
            }
            best
        }
        IltMethod::Talbot => {
            let v = ilt::talbot(f, t, cfg.terms);
            (v, (v - ilt::talbot(f, t, cfg.terms / 2)).abs())
        }
    };
    if !raw.is_finite() || !(error_estimate <= cfg.precision_target) {
        return Err(Error::NoConvergence {
            what: "posterior_nofade",
            error_estimate: if raw.is_finite() { error_estimate } else { f64::INFINITY },
        });
    }
    Ok(Inversion {
        value: raw.clamp(0.0, 1.0),
        raw,
        error_estimate,
    })
}

/// `p(H = 1 | D = 1)` without fading, by inverting the void-conditioned
/// transform at `1/sigma - eta`.
pub fn posterior_nofade(model: &Model, r_o: f64, cfg: &IltConfig) -> Result<Inversion> {
    check_half(model)?;
    cfg.validate()?;
    if !(r_o > 0.0 && r_o.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "r_O",
            value: r_o,
        });
    }
    let t = threshold(model)?;
    invert_cdf(model, r_o, t, cfg)
}

/// Correlation of `H` and `D` without fading.
pub fn rho_nofade(model: &Model, r_o: f64, cfg: &IltConfig) -> Result<f64> {
    let prior = levy_prior(model)?;
    let post = posterior_nofade(model, r_o, cfg)?.value;
    let b = model.ball_mass(r_o);
    let p_d = (-b).exp();
    let odds = p_d / -(-b).exp_m1();
    Ok((post / prior - 1.0) * (prior / (1.0 - prior) * odds).sqrt())
}

/// Identity-rule ROC without fading, with uniform-cost risk.
pub fn roc_nofade(model: &Model, r_o_grid: &[f64], cfg: &IltConfig) -> Result<Vec<RocPoint>> {
    let prior = levy_prior(model)?;
    r_o_grid
        .iter()
        .map(|&r| {
            let post = posterior_nofade(model, r, cfg)?.value;
            let p_d = (-model.ball_mass(r)).exp();
            let p_i = (p_d * (1.0 - post) / (1.0 - prior)).clamp(0.0, 1.0);
            let p_ii = ((prior - post * p_d) / prior).clamp(0.0, 1.0);
            Ok(RocPoint {
                r_o: r,
                p_i,
                p_ii,
                risk: p_i * (1.0 - prior) + p_ii * prior,
            })
        })
        .collect()
}
