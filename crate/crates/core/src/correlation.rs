//! Correlation of the protocol- and physical-model success indicators,
//! and the guard-zone size that maximizes it.

use crate::roots::{brent, expand_upper};
use crate::single_obs::abc_terms_chi;
use crate::specfn::int_i_gap;
use crate::{Error, Model, Result};
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// `ln(e^x - 1)` for `x >= 0`, without overflow.
pub(crate) fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Offset above 1 below which `chi_hat` and `chi_star` are not resolved.
pub const CHI_FLOOR: f64 = 1e-12;

/// Sampled correlation curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub chi_grid: Vec<f64>,
    pub rho_values: Vec<f64>,
}

/// Location and value of the correlation peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiStar {
    pub chi: f64,
    pub rho: f64,
    /// Residual of `(1 - chi) e^B + (1 + chi) e^C - 2` at `chi`.
    pub residual: f64,
    /// Number of stationary points found by the grid scan.
    pub stationary_points: usize,
}

/// Pearson correlation of `H` and `D` at `chi`.
pub fn rho(model: &Model, chi: f64) -> Result<f64> {
    Ok(ln_rho(model, chi)?.exp())
}

/// Natural log of [`rho`]. Stays finite where `rho` itself underflows
/// (large `chi`, where `rho ~ e^(-B/2)`).
pub fn ln_rho(model: &Model, chi: f64) -> Result<f64> {
    if !(chi > 0.0) || chi.is_nan() {
        return Err(Error::OutOfDomain {
            what: "chi",
            value: chi,
        });
    }
    let t = abc_terms_chi(model, chi);
    if !(t.a > 0.0) {
        return Err(Error::Degenerate("A = 0: H is almost surely 1"));
    }
    if chi == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_expm1(t.gap) - 0.5 * ln_expm1(t.a) - 0.5 * ln_expm1(t.b))
}

pub fn curve(model: &Model, chi_grid: &[f64]) -> Result<CorrelationCurve> {
    let rho_values = chi_grid
        .iter()
        .map(|&c| rho(model, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationCurve {
        chi_grid: chi_grid.to_vec(),
        rho_values,
    })
}

/// `f1(chi) = (1 - chi) e^B`
pub fn f1(model: &Model, chi: f64) -> f64 {
    let t = abc_terms_chi(model, chi);
    (1.0 - chi) * t.b.exp()
}

/// `f2(chi) = 2 - (1 + chi) e^C`; stationary points of `rho` solve `f1 = f2`.
pub fn f2(model: &Model, chi: f64) -> f64 {
    let t = abc_terms_chi(model, chi);
    2.0 - (1.0 + chi) * t.c.exp()
}

/// `(f1 - f2) e^-C`, which has the sign of `rho'` and stays bounded.
pub fn stationarity(model: &Model, chi: f64) -> f64 {
    let t = abc_terms_chi(model, chi);
    let lead = if chi == 1.0 { 0.0 } else { (1.0 - chi) * t.gap.exp_m1() };
    lead - 2.0 * (-t.c).exp_m1()
}

/// The point `chi_hat > 1` where `B - C = ln((1 + chi)/(chi - 1))`. The
/// stationarity function is positive at 1 and negative here.
///
/// Under heavy load `chi_hat - 1` is of order `e^{-(B - C)}` and falls below
/// double resolution; the lower end `1 + CHI_FLOOR` is returned then.
pub fn chi_hat(model: &Model) -> Result<f64> {
    let h = |chi: f64| {
        abc_terms_chi(model, chi).gap - ((chi + 1.0) / (chi - 1.0)).ln()
    };
    let lo = 1.0 + CHI_FLOOR;
    if h(lo) >= 0.0 {
        return Ok(lo);
    }
    let (a, b) = expand_upper(h, lo, 2.0, 2.0, 200, "chi_hat")?;
    brent(h, a, b, 1e-14 * b, "chi_hat")
}

/// Global maximizer of `rho`. The root bracketed by `[1, chi_hat]` is
/// refined, then a log grid beyond 1 is scanned for further sign changes
/// of `rho'` and the best of all stationary points is returned.
pub fn chi_star(model: &Model) -> Result<ChiStar> {
    let h = |chi: f64| stationarity(model, chi);
    let hat = chi_hat(model)?;
    let primary = if h(hat) >= 0.0 {
        hat
    } else {
        brent(h, 1.0, hat, 1e-13 * hat, "chi_star")?
    };
    let mut candidates = alloc::vec![primary];

    let hi = hat.max(1e8);
    let steps = 400;
    let ratio = (hi.ln()) / steps as f64;
    let mut prev_x = 1.0;
    let mut prev_h = h(prev_x);
    for i in 1..=steps {
        let x = (ratio * i as f64).exp();
        let hx = h(x);
        if prev_h > 0.0 && hx <= 0.0 {
            let r = brent(h, prev_x, x, 1e-13 * x, "chi_star")?;
            if candidates.iter().all(|c: &f64| (c - r).abs() > 1e-9 * r) {
                candidates.push(r);
            }
        }
        prev_x = x;
        prev_h = hx;
    }

    let mut best = (f64::NEG_INFINITY, primary);
    for &c in &candidates {
        let r = rho(model, c)?;
        if r > best.0 {
            best = (r, c);
        }
    }
    let t = abc_terms_chi(model, best.1);
    let residual = (1.0 - best.1) * t.b.exp() + (1.0 + best.1) * t.c.exp() - 2.0;
    Ok(ChiStar {
        chi: best.1,
        rho: best.0,
        residual,
        stationary_points: candidates.len(),
    })
}

/// The `lambda c_n sigma^delta -> 0` limit of `chi_star`: the root of
/// `I(chi, d) = (chi - 1)/(chi + 1) chi^d`.
pub fn chi_star_sparse_limit(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfDomain {
            what: "delta",
            value: delta,
        });
    }
    // Rewritten as gap(chi)/chi^d = 2/(chi + 1); negative at 1, positive far out.
    let f = |chi: f64| int_i_gap(chi, delta) / chi.powf(delta) - 2.0 / (chi + 1.0);
    let (a, b) = expand_upper(f, 1.0, 2.0, 2.0, 200, "chi_star_sparse_limit")?;
    brent(f, a, b, 1e-14 * b, "chi_star_sparse_limit")
}
