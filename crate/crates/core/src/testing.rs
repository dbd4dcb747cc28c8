//! Multiple testing: the half-threshold rule, the Bayes oracle,
//! Benjamini–Hochberg and analytic error-rate envelopes.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::mcmc::PosteriorSummary;
use crate::priors::PriorSpec;
use crate::specialfn::{std_normal_cdf, std_normal_sf};

/// Two-groups parameters: signal fraction μ and slab variance ψ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub mu: f64,
    pub psi_sq: f64,
}

impl OracleParams {
    pub fn new(mu: f64, psi_sq: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return domain(format!("mu must lie in (0,1), got {mu}"));
        }
        if !(psi_sq > 0.0 && psi_sq.is_finite()) {
            return domain(format!("psi_sq must be positive, got {psi_sq}"));
        }
        Ok(Self { mu, psi_sq })
    }

    pub fn u(&self) -> f64 {
        self.psi_sq
    }

    pub fn f(&self) -> f64 {
        (1.0 - self.mu) / self.mu
    }

    pub fn v(&self) -> f64 {
        self.u() * self.f().powi(2)
    }

    /// The constant log v / u.
    pub fn c(&self) -> f64 {
        self.v().ln() / self.u()
    }
}

/// C² from (u, v). Degenerate when v < 1 or the threshold is not positive;
/// v = 1 still yields the finite value (1+1/u) log(1+1/u).
pub fn oracle_threshold_uv(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0) || !(v >= 1.0) {
        return Err(Error::DegenerateOracle(v));
    }
    let r = 1.0 + 1.0 / u;
    let c_sq = r * (v.ln() + r.ln());
    if !(c_sq > 0.0 && c_sq.is_finite()) {
        return Err(Error::DegenerateOracle(v));
    }
    Ok(c_sq)
}

/// C² of the rule |y| > C.
pub fn oracle_threshold(p: OracleParams) -> Result<f64> {
    oracle_threshold_uv(p.u(), p.v())
}

/// C² from (ψ², f): (1+ψ²)/ψ² · (log(1+ψ²) + 2 log f).
pub fn oracle_threshold_psi_f(psi_sq: f64, f: f64) -> f64 {
    (1.0 + psi_sq) / psi_sq * (psi_sq.ln_1p() + 2.0 * f.ln())
}

/// Leading-order error rates of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRates {
    pub t1: f64,
    pub t2: f64,
    /// (1−μ) t₁ + μ t₂.
    pub risk_per_test: f64,
    /// μ t₂ alone.
    pub risk_leading: f64,
}

pub fn oracle_t1(c: f64, v: f64) -> f64 {
    (-c / 2.0).exp() * (2.0 / (PI * v * v.ln())).sqrt()
}

pub fn oracle_t2(c: f64) -> f64 {
    2.0 * std_normal_cdf(c.sqrt()) - 1.0
}

pub fn oracle_error_rates(p: OracleParams) -> Result<OracleRates> {
    let v = p.v();
    if !(v > 1.0) {
        return Err(Error::DegenerateOracle(v));
    }
    let c = p.c();
    let t1 = oracle_t1(c, v);
    let t2 = oracle_t2(c);
    Ok(OracleRates {
        t1,
        t2,
        risk_per_test: (1.0 - p.mu) * t1 + p.mu * t2,
        risk_leading: p.mu * t2,
    })
}

/// Reject where the pseudo-inclusion probability strictly exceeds ½.
pub fn half_threshold_rule(omega: &[f64]) -> Vec<bool> {
    omega.iter().map(|&w| w > 0.5).collect()
}

pub fn half_threshold_rule_summary(summary: &PosteriorSummary) -> Vec<bool> {
    half_threshold_rule(&summary.omega())
}

/// 2(1 − Φ(|z|)).
pub fn two_sided_pvalue(z: f64) -> f64 {
    2.0 * std_normal_sf(z.abs())
}

/// Benjamini–Hochberg step-up at level α.
pub fn benjamini_hochberg(pvalues: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return domain(format!("p-value {p} outside [0,1]"));
    }
    let n = pvalues.len();
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cut = (1..=n)
        .rev()
        .find(|&k| sorted[k - 1] <= k as f64 * alpha / n as f64)
        .map(|k| sorted[k - 1]);
    Ok(match cut {
        Some(c) => pvalues.iter().map(|&p| p <= c).collect(),
        None => vec![false; n],
    })
}

/// The default level 1/log n.
pub fn bh_default_alpha(n: usize) -> f64 {
    1.0 / (n as f64).ln()
}

/// Leading-order envelopes for the half-threshold rule's error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    pub t1_bound: f64,
    pub t2_bound: f64,
}

/// √(2/π) τ² / √(log(1/(2τ))), valid for τ < ½.
pub fn type1_bound(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 0.5) {
        return domain(format!("type-I bound needs tau in (0, 1/2), got {tau}"));
    }
    Ok((2.0 / PI).sqrt() * tau * tau / (1.0 / (2.0 * tau)).ln().sqrt())
}

/// 2Φ(√(2/(η(1−δ))) √C) − 1.
pub fn type2_bound(c: f64, eta: f64, delta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return domain(format!("need eta, delta in (0,1), got {eta}, {delta}"));
    }
    Ok(2.0 * std_normal_cdf((2.0 / (eta * (1.0 - delta))).sqrt() * c.sqrt()) - 1.0)
}

pub fn analytic_error_bounds(spec: PriorSpec, p: OracleParams, eta: f64, delta: f64) -> Result<ErrorBounds> {
    if !(delta > 0.0 && delta < 1.0 / (eta * (1.0 + spec.tau * spec.tau))) {
        return domain(format!("delta {delta} outside (0, 1/(eta(1+tau^2)))"));
    }
    Ok(ErrorBounds {
        t1_bound: type1_bound(spec.tau)?,
        t2_bound: type2_bound(p.c(), eta, delta)?,
    })
}

/// Realized error rates of a set of decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub reject: Vec<bool>,
    /// False rejections over true nulls; `None` without nulls.
    pub t1: Option<f64>,
    /// Misses over true signals; `None` without signals.
    pub t2: Option<f64>,
    pub mp: f64,
    /// Expected 0-1 loss count, n · mp.
    pub risk: f64,
}

pub fn score(decisions: &[bool], truth: &[bool]) -> Result<DecisionReport> {
    if decisions.len() != truth.len() {
        return Err(Error::Config(format!(
            "{} decisions for {} truth labels",
            decisions.len(),
            truth.len()
        )));
    }
    let n = truth.len();
    let (mut fp, mut fneg, mut nulls) = (0usize, 0usize, 0usize);
    for (&d, &t) in decisions.iter().zip(truth) {
        if t {
            fneg += usize::from(!d);
        } else {
            nulls += 1;
            fp += usize::from(d);
        }
    }
    let signals = n - nulls;
    let errors = (fp + fneg) as f64;
    Ok(DecisionReport {
        reject: decisions.to_vec(),
        t1: (nulls > 0).then(|| fp as f64 / nulls as f64),
        t2: (signals > 0).then(|| fneg as f64 / signals as f64),
        mp: if n > 0 { errors / n as f64 } else { 0.0 },
        risk: errors,
    })
}
