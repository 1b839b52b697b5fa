//! Special functions: `kappa`, the integral `I(u, delta)` with its two
//! complements, the normal tail `Q`, and `erf`/`erfc` on the complex plane.
//!
//! `I(u, d) = d * int_0^u t^d / (1 + t) dt`. Differences such as `u^d - I`
//! appear everywhere in the model and lose all precision when formed
//! naively at large `u`, so both complements are computed directly:
//!
//! * `gap(u)  = u^d - I(u) = d * int_0^u t^(d-1) / (1 + t) dt`
//! * `tail(u) = kappa - gap(u) = d * int_u^inf t^(d-1) / (1 + t) dt`
//!
//! Small arguments use power series, large ones an inverse-power series,
//! and the window in between adaptive quadrature on a smooth substitute.

use crate::quad;
use crate::{Error, Result};
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

const SERIES_LO: f64 = 0.5;
const SERIES_HI: f64 = 2.0;

/// `pi d / sin(pi d)`, equal to `Gamma(1 + d) Gamma(1 - d)`.
pub fn kappa(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfDomain {
            what: "delta",
            value: delta,
        });
    }
    Ok(kappa_unchecked(delta))
}

pub(crate) fn kappa_unchecked(delta: f64) -> f64 {
    // sin(pi d) = sin(pi (1 - d)); pick the smaller argument
    let x = PI * delta.min(1.0 - delta);
    PI * delta / x.sin()
}

/// `int_0^a dz / (1 + z^p)` for `a` in `[0, 1]`-ish ranges; the integrand is
/// bounded and at least once differentiable for `p > 1`.
fn bounded_kernel(a: f64, p: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    quad::integrate(|z| 1.0 / (1.0 + z.powf(p)), 0.0, a, 1e-16, 1e-15, 200).value
}

fn gap_series(u: f64, delta: f64) -> f64 {
    // d * sum_k (-u)^k / (k + d), times u^d
    let mut sum = 0.0;
    let mut pw = 1.0;
    for k in 0..200 {
        let term = pw / (k as f64 + delta);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pw *= -u;
    }
    delta * u.powf(delta) * sum
}

fn int_i_series(u: f64, delta: f64) -> f64 {
    let mut sum = 0.0;
    let mut pw = u;
    for k in 0..200 {
        let term = pw / (k as f64 + 1.0 + delta);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pw *= -u;
    }
    delta * u.powf(delta) * sum
}

fn tail_series(u: f64, delta: f64) -> f64 {
    let inv = 1.0 / u;
    let mut sum = 0.0;
    let mut pw = 1.0;
    for k in 0..200 {
        let term = pw / (k as f64 + 1.0 - delta);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pw *= -inv;
    }
    delta * u.powf(delta - 1.0) * sum
}

/// `u^d - I(u, d)`, increasing from 0 to `kappa(d)`.
pub fn int_i_gap(u: f64, delta: f64) -> f64 {
    if u.is_nan() || u < 0.0 {
        return f64::NAN;
    }
    if u == 0.0 {
        return 0.0;
    }
    if u <= SERIES_LO {
        gap_series(u, delta)
    } else if u <= 1.0 {
        bounded_kernel(u.powf(delta), 1.0 / delta)
    } else {
        kappa_unchecked(delta) - int_i_tail(u, delta)
    }
}

/// `kappa(d) - u^d + I(u, d)`, decreasing from `kappa(d)` to 0.
pub fn int_i_tail(u: f64, delta: f64) -> f64 {
    if u.is_nan() || u < 0.0 {
        return f64::NAN;
    }
    if u == f64::INFINITY {
        return 0.0;
    }
    if u >= SERIES_HI {
        tail_series(u, delta)
    } else if u > 1.0 {
        let q = 1.0 - delta;
        delta / q * bounded_kernel(u.powf(-q), 1.0 / q)
    } else {
        kappa_unchecked(delta) - int_i_gap(u, delta)
    }
}

/// `I(u, d) = d * int_0^u t^d / (1 + t) dt`. Returns NaN for negative `u`.
pub fn int_i(u: f64, delta: f64) -> f64 {
    if u.is_nan() || u < 0.0 {
        return f64::NAN;
    }
    if u <= SERIES_LO {
        int_i_series(u, delta)
    } else if u <= 1.0 {
        u.powf(delta) - int_i_gap(u, delta)
    } else {
        u.powf(delta) - kappa_unchecked(delta) + int_i_tail(u, delta)
    }
}

/// Standard normal complementary CDF.
pub fn gauss_q(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

const TAYLOR_RADIUS: f64 = 2.5;

fn erf_taylor(z: Complex64) -> Complex64 {
    let z2 = -(z * z);
    let mut term = z;
    let mut sum = z;
    for n in 1..400 {
        term = term * z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (2.0 / PI.sqrt())
}

/// Continued fraction for `erfc`, valid for `Re z > 0`.
fn erfc_cf(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..20_000 {
        let a = 0.5 * k as f64;
        d = z + d * a;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = z + Complex64::new(a, 0.0) / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-(z * z)).exp() / (f * PI.sqrt())
}

/// Error function of a complex argument.
pub fn erf_complex(z: Complex64) -> Complex64 {
    if z.norm() < TAYLOR_RADIUS {
        return erf_taylor(z);
    }
    if z.re >= 0.0 {
        Complex64::new(1.0, 0.0) - erfc_cf(z)
    } else {
        -(Complex64::new(1.0, 0.0) - erfc_cf(-z))
    }
}

/// Complementary error function of a complex argument.
pub fn erfc_complex(z: Complex64) -> Complex64 {
    if z.norm() < TAYLOR_RADIUS {
        return Complex64::new(1.0, 0.0) - erf_taylor(z);
    }
    if z.re >= 0.0 {
        erfc_cf(z)
    } else {
        Complex64::new(2.0, 0.0) - erfc_cf(-z)
    }
}
