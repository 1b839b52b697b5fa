//! Numerical inversion of Laplace transforms along real-part-positive
//! contours.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Abate-Whitt Euler summation with `2m + 1` transform evaluations.
/// `f` is evaluated at `beta_k / t` with `Re beta_k = m ln(10) / 3 > 0`.
pub fn euler<F: FnMut(Complex64) -> Complex64>(mut f: F, t: f64, m: usize) -> f64 {
    let mf = m as f64;
    let a = mf * core::f64::consts::LN_10 / 3.0;
    let scale = 2f64.powi(-(m as i32));
    // xi_k for k = 0..=2m
    let mut xi = alloc::vec![0.0f64; 2 * m + 1];
    xi[0] = 0.5;
    for x in xi.iter_mut().take(m + 1).skip(1) {
        *x = 1.0;
    }
    xi[2 * m] = scale;
    let mut binom = 1.0f64;
    for k in 1..m {
        binom = binom * (m - k + 1) as f64 / k as f64;
        xi[2 * m - k] = xi[2 * m - k + 1] + scale * binom;
    }
    let mut sum = 0.0;
    for (k, &x) in xi.iter().enumerate() {
        let beta = Complex64::new(a, core::f64::consts::PI * k as f64);
        let v = f(beta / t).re;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * x * v;
    }
    10f64.powf(mf / 3.0) / t * sum
}

/// Fixed Talbot contour (Abate-Valko) with `m` nodes. Samples the
/// transform at points with negative real part, so it only suits
/// transforms that stay bounded there.
pub fn talbot<F: FnMut(Complex64) -> Complex64>(mut f: F, t: f64, m: usize) -> f64 {
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * (f(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * core::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        sum += ((s * t).exp() * f(s) * Complex64::new(1.0, sigma)).re;
    }
    r / m as f64 * sum
}
