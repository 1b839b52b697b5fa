//! Scenario parameters and derived constants.

use crate::specfn;
use crate::{Error, Result};
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// A bipolar Poisson network scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Ambient dimension, 1 to 3.
    pub n: u32,
    /// Transmitter density.
    pub lambda: f64,
    /// Pathloss exponent, must exceed `n`.
    pub alpha: f64,
    /// SINR threshold (linear).
    pub beta: f64,
    /// Distance between the reference transmitter and receiver.
    #[cfg_attr(feature = "serde", serde(rename = "r_T"))]
    pub r_t: f64,
    /// Noise power.
    pub eta: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::InvalidParameter("n must be 1, 2 or 3"));
        }
        if !(self.alpha.is_finite() && self.alpha > self.n as f64) {
            return Err(Error::InvalidParameter("alpha must exceed n"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParameter("beta must be positive"));
        }
        if !(self.r_t.is_finite() && self.r_t > 0.0) {
            return Err(Error::InvalidParameter("r_T must be positive"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidParameter("eta must be nonnegative"));
        }
        Ok(())
    }
}

/// Constants that every closed form is written in.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivedParams {
    /// `n / alpha`
    pub delta: f64,
    /// Volume of the unit ball in `n` dimensions.
    pub c_n: f64,
    /// `beta * r_T^alpha`
    pub sigma: f64,
    pub kappa_delta: f64,
}

/// Unit-ball volume for `n` in 1..=3.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    match n {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::InvalidParameter("n must be 1, 2 or 3")),
    }
}

pub fn derive(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    let delta = params.n as f64 / params.alpha;
    Ok(DerivedParams {
        delta,
        c_n: unit_ball_volume(params.n)?,
        sigma: params.beta * params.r_t.powf(params.alpha),
        kappa_delta: specfn::kappa(delta)?,
    })
}

/// Validated parameters together with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub derived: DerivedParams,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let derived = derive(&params)?;
        Ok(Model { params, derived })
    }

    /// Same scenario at a different density (used for Aloha thinning).
    pub fn with_density(&self, lambda: f64) -> Result<Self> {
        Model::new(ModelParams {
            lambda,
            ..self.params
        })
    }

    pub fn delta(&self) -> f64 {
        self.derived.delta
    }

    pub fn kappa(&self) -> f64 {
        self.derived.kappa_delta
    }

    pub fn sigma(&self) -> f64 {
        self.derived.sigma
    }

    /// `lambda c_n sigma^delta`, the natural interference scale.
    pub fn load(&self) -> f64 {
        self.params.lambda * self.derived.c_n * self.derived.sigma.powf(self.derived.delta)
    }

    /// `sigma * eta`
    pub fn noise_term(&self) -> f64 {
        self.derived.sigma * self.params.eta
    }

    /// Mean number of transmitters within `r`: `lambda c_n r^n`.
    pub fn ball_mass(&self, r: f64) -> f64 {
        self.params.lambda * self.derived.c_n * r.powi(self.params.n as i32)
    }

    pub fn chi_of_radius(&self, r_o: f64) -> f64 {
        chi_of_radius(&self.derived, self.params.alpha, r_o)
    }

    pub fn radius_of_chi(&self, chi: f64) -> f64 {
        radius_of_chi(&self.derived, self.params.alpha, chi)
    }
}

/// `chi = r_O^alpha / sigma`
pub fn chi_of_radius(d: &DerivedParams, alpha: f64, r_o: f64) -> f64 {
    r_o.powf(alpha) / d.sigma
}

/// Inverse of [`chi_of_radius`].
pub fn radius_of_chi(d: &DerivedParams, alpha: f64, chi: f64) -> f64 {
    (chi * d.sigma).powf(1.0 / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig1() -> ModelParams {
        ModelParams {
            n: 2,
            lambda: 2e-4,
            alpha: 3.0,
            beta: 5.0,
            r_t: 10.0,
            eta: 0.0,
        }
    }

    #[test]
    fn derived_constants() {
        let d = derive(&fig1()).unwrap();
        assert!((d.delta - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.c_n, PI);
        assert!((d.sigma - 5000.0).abs() < 1e-9);
        assert!((d.kappa_delta - 2.418_399_152_312_29).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let mut p = fig1();
        p.alpha = 2.0;
        assert!(derive(&p).is_err());
        p = fig1();
        p.n = 4;
        assert!(derive(&p).is_err());
        p = fig1();
        p.eta = -1.0;
        assert!(Model::new(p).is_err());
    }

    #[test]
    fn chi_mapping() {
        let m = Model::new(fig1()).unwrap();
        assert_eq!(m.chi_of_radius(0.0), 0.0);
        assert!((m.chi_of_radius(50.0) - 25.0).abs() < 1e-12);
        let unit = 10.0 * 5f64.powf(1.0 / 3.0);
        assert!((m.chi_of_radius(unit) - 1.0).abs() < 1e-12);
        for &r in &[1e-3, 0.7, 17.0, 250.0, 1e5] {
            let back = m.radius_of_chi(m.chi_of_radius(r));
            assert!((back - r).abs() <= 1e-12 * r);
        }
    }
}
