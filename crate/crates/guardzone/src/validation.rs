//! Analytic-versus-simulation comparison at a fixed z threshold.

use guardzone_core::multi_obs::{self, AlohaParams};
use guardzone_core::nofading::{self, IltConfig};
use guardzone_core::risk::{self, SingleObsRule};
use guardzone_core::{correlation, single_obs, Model};
use serde::{Deserialize, Serialize};

use crate::io::Table;
use crate::montecarlo::{self, Estimate, Fading, SimConfig, SimError};

pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub r_o: f64,
    pub k: Option<u32>,
    pub d: Option<bool>,
    pub analytic: f64,
    pub estimate: Estimate,
    pub z: f64,
    pub pass: bool,
}

impl Check {
    /// Proportions are tested with the standard error implied by the
    /// analytic value, which stays honest when the sample proportion sits
    /// at or next to 0 or 1.
    fn new(quantity: &str, r_o: f64, analytic: f64, estimate: Estimate) -> Self {
        let null_se = (analytic * (1.0 - analytic) / estimate.samples as f64).sqrt();
        let d = estimate.value - analytic;
        let z = if d == 0.0 { 0.0 } else { d / null_se };
        Self::with_z(quantity, r_o, analytic, estimate, z)
    }

    /// Non-proportion statistics use their own standard error.
    fn statistic(quantity: &str, r_o: f64, analytic: f64, estimate: Estimate) -> Self {
        let z = estimate.z_score(analytic);
        Self::with_z(quantity, r_o, analytic, estimate, z)
    }

    fn with_z(quantity: &str, r_o: f64, analytic: f64, estimate: Estimate, z: f64) -> Self {
        Check {
            quantity: quantity.to_owned(),
            r_o,
            k: None,
            d: None,
            analytic,
            estimate,
            z,
            pass: z.abs() <= Z_THRESHOLD,
        }
    }

    fn at(mut self, k: u32, d: Option<bool>) -> Self {
        self.k = Some(k);
        self.d = d;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: u64,
    pub region_radius: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, quantity: &str, r_o: f64) -> Option<&Check> {
        self.checks.iter().find(|c| c.quantity == quantity && c.r_o == r_o)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            "validate",
            &[
                "quantity", "r_o", "k", "d", "analytic", "estimate", "stderr", "samples", "z", "pass",
                "low_confidence",
            ],
        );
        for c in &self.checks {
            t.push(vec![
                c.quantity.as_str().into(),
                c.r_o.into(),
                c.k.map(|k| k.to_string()).unwrap_or_default().into(),
                c.d.map(|d| (d as u8).to_string()).unwrap_or_default().into(),
                c.analytic.into(),
                c.estimate.value.into(),
                c.estimate.stderr.into(),
                c.estimate.samples.into(),
                c.z.into(),
                c.pass.into(),
                c.estimate.low_confidence.into(),
            ]);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        t.note("trials", self.trials);
        t.note("region_radius", self.region_radius);
        t.note("passed", format!("{passed}/{}", self.checks.len()));
        t
    }
}

/// Single-observation checks with Rayleigh fading: `p_H`, and per radius
/// `p_D`, `p_{H|D}(1|1)`, `ρ`, `p_I`, `p_II`.
///
/// `sim_model` drives the simulator; passing a perturbed copy of `model`
/// turns the run into a negative control.
pub fn validate_single(model: &Model, sim_model: &Model, cfg: &SimConfig) -> Result<ValidationReport, SimError> {
    let est = montecarlo::estimate_single(sim_model, cfg)?;
    let mut checks = vec![Check::new("p_H", f64::NAN, single_obs::prior_success(model), est.p_h)];
    for r in &est.per_radius {
        let chi = model.chi_of_radius(r.r_o);
        let post = single_obs::posterior(model, r.r_o)?;
        let (p_i, p_ii) = risk::type_errors(model, r.r_o, SingleObsRule::IDENTITY);
        checks.push(Check::new("p_D", r.r_o, (-model.ball_mass(r.r_o)).exp(), r.p_d));
        checks.push(Check::new("p_H|D(1|1)", r.r_o, post.p_h1_d1, r.p_h_given_d1));
        checks.push(Check::statistic("rho", r.r_o, correlation::rho(model, chi)?, r.rho));
        checks.push(Check::new("p_I", r.r_o, p_i, r.p_i));
        checks.push(Check::new("p_II", r.r_o, p_ii, r.p_ii));
    }
    Ok(ValidationReport {
        trials: est.trials,
        region_radius: est.region_radius,
        checks,
    })
}

/// No-fading checks: `p_H` against the Lévy closed form, and per radius
/// `p_D` and `p_{H|D}(1|1)` against the inverted transform.
pub fn validate_nofade(model: &Model, cfg: &SimConfig, ilt: &IltConfig) -> Result<ValidationReport, SimError> {
    let mut cfg = cfg.clone();
    cfg.fading = Fading::None;
    let est = montecarlo::estimate_single(model, &cfg)?;
    let mut checks = vec![Check::new("p_H", f64::NAN, nofading::levy_prior(model)?, est.p_h)];
    for r in &est.per_radius {
        let post = nofading::posterior_nofade(model, r.r_o, ilt)?;
        checks.push(Check::new("p_D", r.r_o, (-model.ball_mass(r.r_o)).exp(), r.p_d));
        checks.push(Check::new("p_H|D(1|1)", r.r_o, post.value, r.p_h_given_d1));
    }
    Ok(ValidationReport {
        trials: est.trials,
        region_radius: est.region_radius,
        checks,
    })
}

/// Multi-slot checks at one radius: `p_K`, `p_{H|K}`, `p_{D|K}` and
/// `p_{H|K,D}` for every `(K, d)`.
pub fn validate_multi(model: &Model, aloha: &AlohaParams, cfg: &SimConfig, r_o: f64) -> Result<ValidationReport, SimError> {
    let mut cfg = cfg.clone();
    cfg.aloha = Some(*aloha);
    let est = montecarlo::estimate_multiobs(model, &cfg, r_o)?;
    let t = multi_obs::table(model, aloha, r_o)?;
    let mut checks = vec![Check::new("p_H", r_o, t.p_h, est.p_h)];
    for k in 0..=aloha.n_obs {
        let i = k as usize;
        checks.push(Check::new("p_K", r_o, t.p_k[i], est.p_k[i]).at(k, None));
        checks.push(Check::new("p_H|K", r_o, t.p_h_k[i], est.p_h_given_k[i]).at(k, None));
        checks.push(Check::new("p_D|K", r_o, t.p_d_k[i], est.p_d_given_k[i]).at(k, None));
        for d in [false, true] {
            let analytic = t.posterior(k, d)?;
            checks.push(Check::new("p_H|K,D", r_o, analytic, est.p_h_given_kd[i][d as usize]).at(k, Some(d)));
        }
    }
    Ok(ValidationReport {
        trials: est.trials,
        region_radius: est.region_radius,
        checks,
    })
}
