#![allow(dead_code)]

use guardzone_core::{Model, ModelParams};

pub fn fig1() -> Model {
    Model::new(ModelParams {
        n: 2,
        lambda: 2e-4,
        alpha: 3.0,
        beta: 5.0,
        r_t: 10.0,
        eta: 0.0,
    })
    .unwrap()
}

pub fn fig4() -> Model {
    Model::new(ModelParams {
        n: 2,
        lambda: 2e-3,
        alpha: 4.0,
        beta: 5.0,
        r_t: 10.0,
        eta: 0.0,
    })
    .unwrap()
}

/// Double-exponential (tanh-sinh) quadrature on a finite interval; a node
/// family unrelated to the library's Gauss-Kronrod rule.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut prev = f64::NAN;
    for level in 0..11 {
        let h = 0.5f64.powi(level);
        let mut sum = FRAC_PI_2 * f(c);
        for k in 1.. {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
            if w < 1e-300 {
                break;
            }
            // distance to the endpoints without cancellation
            let e = 1.0 / (u.exp() * u.cosh());
            let (left, right) = (a + half * e, b - half * e);
            if left == a || right == b {
                break;
            }
            sum += w * (f(left) + f(right));
        }
        let est = sum * h * half;
        if level > 3 && (est - prev).abs() <= 1e-15 * est.abs() {
            return est;
        }
        prev = est;
    }
    prev
}

/// Unregularized incomplete beta `B(x; a, b)` via the Lentz continued
/// fraction, with the reflection for `x` past the mean.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    let complete = libm::tgamma(a) * libm::tgamma(b) / libm::tgamma(a + b);
    if x > (a + 1.0) / (a + b + 2.0) {
        return complete - incomplete_beta(1.0 - x, b, a);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln()).exp() / a;
    front * beta_cf(x, a, b)
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `I(u, d)` straight from its definition, by tanh-sinh.
pub fn int_i_oracle(u: f64, d: f64) -> f64 {
    if u <= 1.0 {
        d * tanh_sinh(|t| t.powf(d) / (1.0 + t), 0.0, u)
    } else {
        d * (tanh_sinh(|t| t.powf(d) / (1.0 + t), 0.0, 1.0)
            + tanh_sinh(|t| t.powf(d) / (1.0 + t), 1.0, u))
    }
}

pub fn poisson_pmf(m: u64, nu: f64) -> f64 {
    (-nu + m as f64 * nu.ln() - libm::lgamma(m as f64 + 1.0)).exp()
}
