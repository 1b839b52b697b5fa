//! Slotted-Aloha inference from `N` earlier protocol-model observations.
//!
//! A fixed process of potential transmitters is thinned independently in
//! every slot with probability `p`. `K` counts protocol-model successes in
//! the first `N` slots and is a sufficient statistic for them. The scenario
//! density is the density of potential transmitters.

use crate::single_obs;
use crate::specfn::{int_i, int_i_tail};
use crate::{Error, Model, Result};
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Largest `N` accepted by [`enumerate_rules`]; the rule count is
/// `2^(2(N+1))`.
pub const MAX_ENUMERATED_OBSERVATIONS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlohaParams {
    /// Transmission probability.
    pub p: f64,
    /// Number of earlier observations.
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n_obs: u32,
}

impl AlohaParams {
    pub fn validate(&self, model: &Model) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParameter("Aloha p must lie in (0, 1)"));
        }
        if model.params.eta != 0.0 {
            return Err(Error::InvalidParameter(
                "multi-observation results assume eta = 0",
            ));
        }
        Ok(())
    }

    pub fn p_bar(&self) -> f64 {
        1.0 - self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiObsDerived {
    /// `lambda c_n r_O^n`: mean number of potential transmitters in the ball.
    pub mu_d: f64,
    /// `(p / (1 - p)) chi^-delta I(chi, delta)`
    pub xi: f64,
}

pub fn derived(model: &Model, aloha: &AlohaParams, r_o: f64) -> MultiObsDerived {
    let chi = model.chi_of_radius(r_o);
    let d = model.delta();
    MultiObsDerived {
        mu_d: model.ball_mass(r_o),
        xi: aloha.p / aloha.p_bar() * int_i(chi, d) / chi.powf(d),
    }
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `ln E[(a^M)^k (1 - a^M)^l]` for `M ~ Poisson(nu)`, summed over the
/// Poisson law.
pub fn ln_f_d_poisson(nu: f64, a: f64, k: u32, l: u32) -> f64 {
    let ln_a = a.ln();
    let ln_nu = nu.ln();
    let upper = (nu + 12.0 * nu.sqrt() + 20.0).ceil() as u64;
    let mut terms = Vec::with_capacity(upper as usize + 1);
    for m in 0..=upper {
        let mf = m as f64;
        if m == 0 && l > 0 {
            continue;
        }
        let tail = if l > 0 {
            l as f64 * (-(mf * ln_a).exp_m1()).ln()
        } else {
            0.0
        };
        let ln_po = -nu + if m > 0 { mf * ln_nu } else { 0.0 } - libm::lgamma(mf + 1.0);
        terms.push(ln_po + mf * k as f64 * ln_a + tail);
    }
    log_sum_exp(&terms)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln f_d(nu, a; k, l)`. The alternating sum is used while it is
/// well conditioned, otherwise the equivalent Poisson expectation.
pub fn ln_f_d(nu: f64, a: f64, k: u32, l: u32) -> f64 {
    let ak = a.powi(k as i32);
    let lead = -nu * (1.0 - ak);
    if l == 0 {
        return lead;
    }
    if l <= 20 {
        // e^-nu(1-a^(k+j)) = e^lead * e^(-nu a^k (1 - a^j))
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut aj = 1.0;
        for j in 0..=l {
            let term = binomial(l, j) * (-nu * ak * (1.0 - aj)).exp();
            sum += if j % 2 == 0 { term } else { -term };
            abs_sum += term;
            aj *= a;
        }
        if sum > 0.0 && abs_sum / sum < 1e6 {
            return lead + sum.ln();
        }
    }
    ln_f_d_poisson(nu, a, k, l)
}

/// `f_d(nu, a; k, l) = sum_j C(l, j) (-1)^j e^(-nu (1 - a^(k+j)))`.
pub fn f_d(nu: f64, a: f64, k: u32, l: u32) -> f64 {
    ln_f_d(nu, a, k, l).exp()
}

fn check(model: &Model, aloha: &AlohaParams, r_o: f64) -> Result<()> {
    aloha.validate(model)?;
    if !(r_o > 0.0 && r_o.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "r_O",
            value: r_o,
        });
    }
    Ok(())
}

fn check_k(aloha: &AlohaParams, k: u32) -> Result<()> {
    if k > aloha.n_obs {
        return Err(Error::InvalidParameter("K must not exceed N"));
    }
    Ok(())
}

/// Success probability given `m` potential transmitters inside the ball.
pub fn p_h_given_m(model: &Model, aloha: &AlohaParams, r_o: f64, m: u32) -> Result<f64> {
    check(model, aloha, r_o)?;
    let chi = model.chi_of_radius(r_o);
    let md = derived(model, aloha, r_o);
    // p mu (1 - chi^-d (kappa + I)) = -p lambda c_n sigma^d tail(chi)
    let outside = -aloha.p * model.load() * int_i_tail(chi, model.delta());
    let per_node = ((1.0 + md.xi) * aloha.p_bar()).ln();
    Ok((outside + m as f64 * per_node).exp())
}

/// All per-`K` quantities at one radius, shared by the rule computations.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiObsTable {
    pub n_obs: u32,
    /// Prior success probability at the thinned density.
    pub p_h: f64,
    /// `p_{H|D}(1|1)` at the thinned density; also `p_{H|K,D}(1|K,1)`.
    pub p_h_d1: f64,
    pub p_k: Vec<f64>,
    pub p_h_k: Vec<f64>,
    pub p_d_k: Vec<f64>,
}

pub fn table(model: &Model, aloha: &AlohaParams, r_o: f64) -> Result<MultiObsTable> {
    check(model, aloha, r_o)?;
    let thinned = model.with_density(aloha.p * model.params.lambda)?;
    let chi = model.chi_of_radius(r_o);
    let md = derived(model, aloha, r_o);
    let n = aloha.n_obs;
    let pb = aloha.p_bar();
    // p mu (1 - chi^-d kappa + xi)
    let lead = aloha.p * (md.mu_d - model.load() * model.kappa()) + aloha.p * md.mu_d * md.xi;
    let mut p_k = Vec::with_capacity(n as usize + 1);
    let mut p_h_k = Vec::with_capacity(n as usize + 1);
    let mut p_d_k = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let base = ln_f_d(md.mu_d, pb, k, n - k);
        p_k.push((ln_binomial(n, k) + base).exp());
        p_d_k.push((ln_f_d(md.mu_d, pb, k + 1, n - k) - base).exp());
        p_h_k.push((lead + ln_f_d(md.mu_d * (1.0 + md.xi), pb, k + 1, n - k) - base).exp());
    }
    Ok(MultiObsTable {
        n_obs: n,
        p_h: single_obs::prior_success(&thinned),
        p_h_d1: single_obs::posterior_chi(&thinned, chi).p_h1_d1,
        p_k,
        p_h_k,
        p_d_k,
    })
}

impl MultiObsTable {
    /// `p_{H|K,D}(1|K,d)`, both branches through the Bayes relation.
    pub fn posterior(&self, k: u32, d: bool) -> Result<f64> {
        let i = k as usize;
        let p_d = self.p_d_k[i];
        let joint_d1 = self.p_h_d1 * p_d;
        if d {
            if !(p_d > 0.0) {
                return Err(Error::Degenerate("p_{D|K}(1|K) = 0"));
            }
            Ok(joint_d1 / p_d)
        } else {
            let q = 1.0 - p_d;
            if !(q > 1e-14) {
                return Err(Error::Degenerate("p_{D|K}(0|K) vanishes"));
            }
            Ok(((self.p_h_k[i] - joint_d1) / q).clamp(0.0, 1.0))
        }
    }

    /// Type I and II errors of a rule, assembled from per-`K` sums.
    pub fn rule_errors(&self, rule: &DecisionRuleTable) -> (f64, f64) {
        let p11 = self.p_h_d1;
        let (mut d11, mut d10, mut d01, mut d00) = (0.0, 0.0, 0.0, 0.0);
        let (mut d_i, mut d_ii) = (0.0, 0.0);
        for k in 0..=self.n_obs {
            let i = k as usize;
            let w_d = self.p_d_k[i] * self.p_k[i];
            if rule.get(k, true) {
                d11 += w_d;
            } else {
                d01 += w_d;
            }
            if rule.get(k, false) {
                d10 += w_d;
                d_i += (1.0 - self.p_h_k[i]) * self.p_k[i];
            } else {
                d00 += w_d;
                d_ii += self.p_h_k[i] * self.p_k[i];
            }
        }
        let p_i = ((1.0 - p11) * (d11 - d10) + d_i) / (1.0 - self.p_h);
        let p_ii = (p11 * (d01 - d00) + d_ii) / self.p_h;
        (p_i.clamp(0.0, 1.0), p_ii.clamp(0.0, 1.0))
    }

    pub fn uniform_risk(&self, p_i: f64, p_ii: f64) -> f64 {
        p_i * (1.0 - self.p_h) + p_ii * self.p_h
    }
}

pub fn p_h_given_k(model: &Model, aloha: &AlohaParams, r_o: f64, k: u32) -> Result<f64> {
    check_k(aloha, k)?;
    Ok(table(model, aloha, r_o)?.p_h_k[k as usize])
}

pub fn p_d_given_k(model: &Model, aloha: &AlohaParams, r_o: f64, k: u32) -> Result<f64> {
    check_k(aloha, k)?;
    Ok(table(model, aloha, r_o)?.p_d_k[k as usize])
}

pub fn p_k(model: &Model, aloha: &AlohaParams, r_o: f64, k: u32) -> Result<f64> {
    check_k(aloha, k)?;
    Ok(table(model, aloha, r_o)?.p_k[k as usize])
}

pub fn posterior_given_k_d(
    model: &Model,
    aloha: &AlohaParams,
    r_o: f64,
    k: u32,
    d: bool,
) -> Result<f64> {
    check_k(aloha, k)?;
    table(model, aloha, r_o)?.posterior(k, d)
}

/// A decision rule `g(K, d)`, stored as a bit string over the cells
/// `(0,0), (0,1), (1,0), ..., (N,1)` with the first cell most significant.
/// Integer order is therefore lexicographic order of the bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionRuleTable {
    pub n_obs: u32,
    pub bits: u32,
}

impl DecisionRuleTable {
    pub fn cells(n_obs: u32) -> u32 {
        2 * (n_obs + 1)
    }

    pub fn rule_count(n_obs: u32) -> u64 {
        1u64 << Self::cells(n_obs)
    }

    pub fn from_fn(n_obs: u32, g: impl Fn(u32, bool) -> bool) -> Self {
        let mut bits = 0;
        for k in 0..=n_obs {
            for d in [false, true] {
                bits = (bits << 1) | g(k, d) as u32;
            }
        }
        DecisionRuleTable { n_obs, bits }
    }

    /// `g(K, d) = d`
    pub fn follow(n_obs: u32) -> Self {
        Self::from_fn(n_obs, |_, d| d)
    }

    /// `g(K, d) = 1 - d`
    pub fn contradict(n_obs: u32) -> Self {
        Self::from_fn(n_obs, |_, d| !d)
    }

    pub fn constant(n_obs: u32, h: bool) -> Self {
        Self::from_fn(n_obs, |_, _| h)
    }

    pub fn get(&self, k: u32, d: bool) -> bool {
        let cell = 2 * k + d as u32;
        let shift = Self::cells(self.n_obs) - 1 - cell;
        (self.bits >> shift) & 1 == 1
    }

    /// The rule as a string of `0`/`1`, first cell first.
    pub fn bitstring(&self) -> alloc::string::String {
        let n = Self::cells(self.n_obs);
        (0..n)
            .map(|i| if (self.bits >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

pub fn rule_errors(
    model: &Model,
    aloha: &AlohaParams,
    r_o: f64,
    rule: &DecisionRuleTable,
) -> Result<(f64, f64)> {
    if rule.n_obs != aloha.n_obs {
        return Err(Error::InvalidParameter("rule table size does not match N"));
    }
    Ok(table(model, aloha, r_o)?.rule_errors(rule))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleScore {
    pub rule: DecisionRuleTable,
    pub p_i: f64,
    pub p_ii: f64,
    pub uniform_risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleEnumeration {
    /// All rules in increasing bit-string order.
    pub rules: Vec<RuleScore>,
    /// Index of the uniform-risk minimizer (smallest bit string on ties).
    pub best: usize,
    /// Index of the uniform-risk maximizer (smallest bit string on ties).
    pub worst: usize,
}

pub fn enumerate_rules(model: &Model, aloha: &AlohaParams, r_o: f64) -> Result<RuleEnumeration> {
    if aloha.n_obs > MAX_ENUMERATED_OBSERVATIONS {
        return Err(Error::InvalidParameter(
            "N > 8 would enumerate more than 2^18 rules",
        ));
    }
    let t = table(model, aloha, r_o)?;
    let count = DecisionRuleTable::rule_count(aloha.n_obs);
    let mut rules: Vec<RuleScore> = Vec::with_capacity(count as usize);
    let (mut best, mut worst) = (0, 0);
    for bits in 0..count as u32 {
        let rule = DecisionRuleTable {
            n_obs: aloha.n_obs,
            bits,
        };
        let (p_i, p_ii) = t.rule_errors(&rule);
        let uniform_risk = t.uniform_risk(p_i, p_ii);
        let i = rules.len();
        if i > 0 {
            if uniform_risk < rules[best].uniform_risk {
                best = i;
            }
            if uniform_risk > rules[worst].uniform_risk {
                worst = i;
            }
        }
        rules.push(RuleScore {
            rule,
            p_i,
            p_ii,
            uniform_risk,
        });
    }
    Ok(RuleEnumeration { rules, best, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ModelParams;

    fn remark() -> (Model, AlohaParams) {
        let m = Model::new(ModelParams {
            n: 2,
            lambda: 2e-4,
            alpha: 3.0,
            beta: 5.0,
            r_t: 10.0,
            eta: 0.0,
        })
        .unwrap();
        (m, AlohaParams { p: 0.5, n_obs: 1 })
    }

    #[test]
    fn remark_values() {
        let (m, a) = remark();
        let t = table(&m, &a, 50.0).unwrap();
        assert!((t.posterior(0, false).unwrap() - 0.672_093).abs() < 1e-6);
        assert!((t.posterior(1, false).unwrap() - 0.717_307).abs() < 1e-6);
        assert!((t.p_h_k[0] - 0.744_920).abs() < 1e-6);
        assert!((t.p_h_k[1] - 0.867_459).abs() < 1e-6);
        assert!((t.p_d_k[0] - 0.272_164).abs() < 1e-6);
        assert!((t.p_d_k[1] - 0.675_232).abs() < 1e-6);
    }

    #[test]
    fn f_d_small_cases() {
        assert_eq!(f_d(1.3, 0.4, 0, 0), 1.0);
        assert!((f_d(1.3, 0.4, 2, 0) - (-1.3f64 * (1.0 - 0.16)).exp()).abs() < 1e-15);
        for &(k, l) in &[(0, 1), (3, 2), (1, 25)] {
            let a = ln_f_d(2.0, 0.5, k, l);
            let b = ln_f_d_poisson(2.0, 0.5, k, l);
            assert!((a - b).abs() < 1e-10, "k={k} l={l}");
        }
    }

    #[test]
    fn zero_observations_collapse_to_single_slot() {
        let (m, _) = remark();
        let a = AlohaParams { p: 0.5, n_obs: 0 };
        let thinned = m.with_density(1e-4).unwrap();
        let t = table(&m, &a, 30.0).unwrap();
        assert!((t.p_h_k[0] - single_obs::prior_success(&thinned)).abs() < 1e-12);
        assert!((t.p_d_k[0] - single_obs::evidence_success(&thinned, 30.0)).abs() < 1e-12);
        assert_eq!(enumerate_rules(&m, &a, 30.0).unwrap().rules.len(), 4);
    }

    #[test]
    fn potential_count_posterior() {
        let (m, a) = remark();
        let thinned = m.with_density(1e-4).unwrap();
        let p0 = p_h_given_m(&m, &a, 40.0, 0).unwrap();
        let p11 = single_obs::posterior(&thinned, 40.0).unwrap().p_h1_d1;
        assert!((p0 - p11).abs() < 1e-12);
        let r1 = p_h_given_m(&m, &a, 40.0, 1).unwrap() / p0;
        let r2 = p_h_given_m(&m, &a, 40.0, 5).unwrap() / p_h_given_m(&m, &a, 40.0, 4).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn encoding() {
        assert_eq!(DecisionRuleTable::follow(1).bitstring(), "0101");
        assert_eq!(DecisionRuleTable::contradict(1).bitstring(), "1010");
        assert_eq!(DecisionRuleTable::follow(2).bitstring(), "010101");
        let r = DecisionRuleTable { n_obs: 1, bits: 0b0010 };
        assert!(r.get(1, false) && !r.get(0, false) && !r.get(1, true));
    }

    #[test]
    fn constant_rules_and_guard() {
        let (m, a) = remark();
        let t = table(&m, &a, 20.0).unwrap();
        let (pi, pii) = t.rule_errors(&DecisionRuleTable::constant(1, true));
        assert!((pi - 1.0).abs() < 1e-12 && pii == 0.0);
        let (pi, pii) = t.rule_errors(&DecisionRuleTable::constant(1, false));
        assert!(pi == 0.0 && (pii - 1.0).abs() < 1e-12);
        let big = AlohaParams { p: 0.5, n_obs: 9 };
        assert!(enumerate_rules(&m, &big, 20.0).is_err());
    }
}
