//! Simulation harnesses: sparse-means estimation error, misclassification
//! curves, James–Stein risk and the K-L risk bound.

use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::NormalMeansData;
use crate::error::{domain, Error, Result};
use crate::kappa_posterior::half_threshold;
use crate::mcmc::{derive_seed, run_gibbs, McmcConfig, TauPolicy};
use crate::output::fmt_f64;
use crate::priors::{symmetric_mass, Family, PriorSpec};
use crate::testing::{
    bh_default_alpha, benjamini_hochberg, half_threshold_rule, oracle_threshold, score, two_sided_pvalue,
    OracleParams,
};

// Seed streams kept apart from the chain indices used by the sampler.
const DATA_STREAM: u64 = 1 << 32;
const JS_STREAM: u64 = 2 << 32;

/// A prior family together with its τ policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Method {
    pub family: Family,
    pub tau: TauPolicy,
}

impl Method {
    pub fn new(family: Family, tau: TauPolicy) -> Self {
        Self { family, tau }
    }

    pub fn label(&self) -> String {
        format!("{}[{}]", self.family, self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SseConfig {
    pub n: usize,
    pub q: f64,
    pub a: f64,
    pub replicates: usize,
    pub mcmc: McmcConfig,
}

impl SseConfig {
    /// Desk-scale defaults: n = 200 with 20 replicates.
    pub fn desk(q: f64, a: f64) -> Self {
        Self {
            n: 200,
            q,
            a,
            replicates: 20,
            mcmc: McmcConfig::default(),
        }
    }

    pub fn signals(&self) -> usize {
        (self.q * self.n as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return domain(format!("q must lie in (0,1), got {}", self.q));
        }
        if !self.a.is_finite() {
            return domain(format!("signal magnitude must be finite, got {}", self.a));
        }
        if self.signals() == 0 {
            return domain(format!("q = {} gives no signals at n = {}", self.q, self.n));
        }
        if self.replicates == 0 {
            return Err(Error::Config("need at least one replicate".into()));
        }
        self.mcmc.validate()
    }
}

/// First ⌊qn⌋ means equal A, the rest zero; y = θ + N(0,1).
pub fn gen_sparse_means(cfg: &SseConfig, seed: u64) -> Result<NormalMeansData> {
    cfg.validate()?;
    let k = cfg.signals();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..cfg.n).map(|i| if i < k { cfg.a } else { 0.0 }).collect();
    let y = theta
        .iter()
        .map(|t| t + rng.sample::<f64, _>(StandardNormal))
        .collect();
    NormalMeansData::with_truth(y, Some(theta))
}

/// θ = 0 with probability 1−μ, else N(0, ψ²); y = θ + N(0,1).
///
/// μ = 0 is accepted and gives an all-null sample.
pub fn gen_two_groups(n: usize, mu: f64, psi_sq: f64, seed: u64) -> Result<NormalMeansData> {
    if !(0.0..1.0).contains(&mu) {
        return domain(format!("mu must lie in [0,1), got {mu}"));
    }
    if !(psi_sq > 0.0 && psi_sq.is_finite()) {
        return domain(format!("psi_sq must be positive, got {psi_sq}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = psi_sq.sqrt();
    let mut theta = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let signal = rng.random::<f64>() < mu;
        let z: f64 = rng.sample(StandardNormal);
        let t = if signal { psi * z } else { 0.0 };
        let e: f64 = rng.sample(StandardNormal);
        theta.push(t);
        y.push(t + e);
    }
    NormalMeansData::with_truth(y, Some(theta))
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SseRow {
    pub method: String,
    pub q: f64,
    pub a: f64,
    pub avg_sse: f64,
    pub mc_se: f64,
    pub replicates: usize,
    /// Replicates dropped after a sampler failure.
    pub dropped: usize,
}

/// Average SSE about the posterior median, one row per method.
///
/// Replicate r draws its data from `derive_seed(seed, 2^32, r)` and runs each
/// method's chains with replicate index r, so every method sees the same data.
pub fn run_sse_experiment(cfg: &SseConfig, methods: &[Method]) -> Result<Vec<SseRow>> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods given".into()));
    }
    let per_rep: Vec<Vec<Option<f64>>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let data = gen_sparse_means(cfg, derive_seed(cfg.mcmc.seed, DATA_STREAM, r))?;
            let truth = data.truth.as_deref().expect("simulated data carry truth");
            Ok(methods
                .iter()
                .map(|m| {
                    let mc = McmcConfig {
                        tau_policy: m.tau,
                        replicate: r,
                        ..cfg.mcmc
                    };
                    match run_gibbs(&data, m.family, &mc) {
                        Ok(out) => Some(
                            out.summary
                                .medians()
                                .iter()
                                .zip(truth)
                                .map(|(m, t)| (m - t).powi(2))
                                .sum(),
                        ),
                        Err(e) => {
                            warn!("replicate {r}, {}: {e}; dropped", m.label());
                            None
                        }
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let ok: Vec<f64> = per_rep.iter().filter_map(|row| row[j]).collect();
            let (avg, se) = if ok.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_se(&ok) };
            SseRow {
                method: m.label(),
                q: cfg.q,
                a: cfg.a,
                avg_sse: avg,
                mc_se: se,
                replicates: ok.len(),
                dropped: cfg.replicates - ok.len(),
            }
        })
        .collect())
}

pub fn write_sse_csv<W: Write>(w: W, rows: &[SseRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "q", "A", "avg_sse", "mc_se", "replicates"])?;
    for r in rows {
        out.write_record([
            r.method.clone(),
            fmt_f64(r.q),
            fmt_f64(r.a),
            fmt_f64(r.avg_sse),
            fmt_f64(r.mc_se),
            r.replicates.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// How the shrinkage rules choose τ in the misclassification study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MpMode {
    /// τ fixed at μ; the half rule becomes |y| above a quadrature threshold.
    PlugIn,
    /// Gibbs sampling with τ ~ C⁺(0, 1).
    FullBayes(McmcConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpConfig {
    pub n: usize,
    pub mu_grid: Vec<f64>,
    pub psi: f64,
    pub replicates: usize,
    pub seed: u64,
    pub mode: MpMode,
}

impl MpConfig {
    /// n = 200, ψ = √(2 log n), ten equispaced μ in [0.01, 0.5].
    pub fn desk() -> Self {
        let n = 200;
        Self {
            n,
            mu_grid: (0..10).map(|i| 0.01 + i as f64 * 0.49 / 9.0).collect(),
            psi: (2.0 * (n as f64).ln()).sqrt(),
            replicates: 200,
            seed: crate::mcmc::DEFAULT_SEED,
            mode: MpMode::PlugIn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("need n >= 2, got {}", self.n));
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|m| !(*m > 0.0 && *m < 1.0)) {
            return domain("mu grid must be non-empty and inside (0,1)");
        }
        if !(self.psi > 0.0 && self.psi.is_finite()) {
            return domain(format!("psi must be positive, got {}", self.psi));
        }
        if self.replicates < 2 {
            return Err(Error::Config("need at least two replicates".into()));
        }
        if let MpMode::FullBayes(m) = self.mode {
            m.validate()?;
        }
        Ok(())
    }
}

pub const MP_METHODS: [&str; 5] = ["hs+", "hs", "bh", "oracle", "mu"];

#[derive(Debug, Clone, PartialEq)]
pub struct MpRow {
    pub mu: f64,
    pub method: &'static str,
    pub mp: f64,
    pub mc_se: f64,
}

fn mp_replicate(cfg: &MpConfig, mu: f64, stream: u64, r: u64, cutoffs: Option<(f64, f64)>, oracle_c: f64) -> Result<[f64; 4]> {
    let psi_sq = cfg.psi * cfg.psi;
    let data = gen_two_groups(cfg.n, mu, psi_sq, derive_seed(cfg.seed, stream, r))?;
    let truth = data.signal_mask().expect("simulated data carry truth");
    let mp = |d: &[bool]| score(d, &truth).map(|s| s.mp);
    let above = |c: f64| data.y.iter().map(|y| y.abs() > c).collect::<Vec<_>>();

    let (hsp, hs) = match (cutoffs, cfg.mode) {
        (Some((cp, ch)), _) => (mp(&above(cp))?, mp(&above(ch))?),
        (None, MpMode::FullBayes(m)) => {
            let m = McmcConfig {
                tau_policy: TauPolicy::HalfCauchy(1.0),
                replicate: r,
                seed: derive_seed(cfg.seed, stream, r),
                ..m
            };
            let a = run_gibbs(&data, Family::HorseshoePlus, &m)?;
            let b = run_gibbs(&data, Family::Horseshoe, &m)?;
            (
                mp(&half_threshold_rule(&a.summary.omega()))?,
                mp(&half_threshold_rule(&b.summary.omega()))?,
            )
        }
        (None, MpMode::PlugIn) => unreachable!("plug-in cutoffs are precomputed"),
    };
    let p: Vec<f64> = data.y.iter().map(|&y| two_sided_pvalue(y)).collect();
    let bh = mp(&benjamini_hochberg(&p, bh_default_alpha(cfg.n))?)?;
    let oracle = mp(&above(oracle_c))?;
    Ok([hsp, hs, bh, oracle])
}

/// Misclassification probability per method and μ, with Monte Carlo
/// standard errors over replicates.
///
/// The oracle applies |y| > C with the generating (μ, ψ²). The `mu` row is
/// the always-accept reference line.
pub fn run_mp_experiment(cfg: &MpConfig) -> Result<Vec<MpRow>> {
    cfg.validate()?;
    let psi_sq = cfg.psi * cfg.psi;
    let mut rows = Vec::new();
    for (k, &mu) in cfg.mu_grid.iter().enumerate() {
        let oracle_c = oracle_threshold(OracleParams::new(mu, psi_sq)?)?.sqrt();
        let cutoffs = match cfg.mode {
            MpMode::PlugIn => Some((
                half_threshold(PriorSpec::new(Family::HorseshoePlus, mu)?)?,
                half_threshold(PriorSpec::new(Family::Horseshoe, mu)?)?,
            )),
            MpMode::FullBayes(_) => None,
        };
        let stream = DATA_STREAM + k as u64;
        let reps: Vec<Option<[f64; 4]>> = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|r| match mp_replicate(cfg, mu, stream, r, cutoffs, oracle_c) {
                Ok(v) => Some(v),
                Err(e) => {
                    warn!("mu = {mu}, replicate {r}: {e}; dropped");
                    None
                }
            })
            .collect();
        let ok: Vec<[f64; 4]> = reps.into_iter().flatten().collect();
        if ok.len() < 2 {
            return Err(Error::Config(format!("too few successful replicates at mu = {mu}")));
        }
        for (j, method) in MP_METHODS[..4].iter().enumerate() {
            let col: Vec<f64> = ok.iter().map(|v| v[j]).collect();
            let (mp, se) = mean_and_se(&col);
            rows.push(MpRow { mu, method, mp, mc_se: se });
        }
        rows.push(MpRow {
            mu,
            method: MP_METHODS[4],
            mp: mu,
            mc_se: 0.0,
        });
    }
    Ok(rows)
}

pub fn write_mp_csv<W: Write>(w: W, rows: &[MpRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["mu", "method", "mp", "mc_se"])?;
    for r in rows {
        out.write_record([fmt_f64(r.mu), r.method.to_string(), fmt_f64(r.mp), fmt_f64(r.mc_se)])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub risk: f64,
    pub mc_se: f64,
}

/// Monte Carlo risk E‖θ̂_JS(y) − θ‖² of the James–Stein estimator.
pub fn james_stein_risk(theta: &[f64], replicates: usize, seed: u64) -> Result<RiskEstimate> {
    let n = theta.len();
    if n <= 2 {
        return domain(format!("James-Stein needs n > 2, got {n}"));
    }
    if replicates < 2 {
        return Err(Error::Config("need at least two replicates".into()));
    }
    let losses: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, JS_STREAM, r));
            let y: Vec<f64> = theta.iter().map(|t| t + rng.sample::<f64, _>(StandardNormal)).collect();
            let norm_sq: f64 = y.iter().map(|v| v * v).sum();
            let shrink = 1.0 - (n as f64 - 2.0) / norm_sq;
            y.iter().zip(theta).map(|(v, t)| (shrink * v - t).powi(2)).sum()
        })
        .collect();
    let (risk, mc_se) = mean_and_se(&losses);
    Ok(RiskEstimate { risk, mc_se })
}

/// r coordinates of magnitude √(n/r), the rest zero.
pub fn r_spike(n: usize, r: usize) -> Vec<f64> {
    let m = (n as f64 / r as f64).sqrt();
    (0..n).map(|i| if i < r { m } else { 0.0 }).collect()
}

/// K-L divergence between N(0,1) and N(θ,1).
pub fn normal_shift_kl(theta: f64) -> f64 {
    0.5 * theta * theta
}

/// ε − (1/n) log ν(A_ε) at θ₀ = 0, where A_ε = {|θ| ≤ √(2ε)}.
pub fn kl_risk_bound(spec: PriorSpec, n: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    if !(n >= 1.0) {
        return domain(format!("n must be at least 1, got {n}"));
    }
    let mass = symmetric_mass(spec, (2.0 * epsilon).sqrt())?;
    Ok(epsilon - mass.ln() / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_layout() {
        let cfg = SseConfig::desk(0.05, 7.0);
        let d = gen_sparse_means(&cfg, 1).unwrap();
        let t = d.truth.as_ref().unwrap();
        assert_eq!(t.iter().filter(|v| **v != 0.0).count(), 10);
        assert!(t[..10].iter().all(|v| *v == 7.0));
        let cfg0 = SseConfig::desk(0.05, 0.0);
        let d0 = gen_sparse_means(&cfg0, 1).unwrap();
        assert!(d0.truth.unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(gen_sparse_means(&cfg, 1).unwrap(), d);
        assert!(gen_sparse_means(&SseConfig::desk(0.001, 7.0), 1).is_err());
    }

    #[test]
    fn two_groups_edges() {
        let d = gen_two_groups(1000, 0.0, 4.0, 3).unwrap();
        assert!(d.truth.unwrap().iter().all(|v| *v == 0.0));
        assert!(gen_two_groups(10, 1.0, 4.0, 3).is_err());
        assert!(gen_two_groups(10, 0.1, 0.0, 3).is_err());
    }

    #[test]
    fn kl_identity_and_domain() {
        assert_eq!(normal_shift_kl(2.0), 2.0);
        assert!(kl_risk_bound(PriorSpec::horseshoe(1.0), 100.0, 0.0).is_err());
        assert!(james_stein_risk(&[1.0, 2.0], 10, 1).is_err());
    }

    #[test]
    fn labels() {
        let m = Method::new(Family::HorseshoePlus, TauPolicy::HalfCauchy(0.005));
        assert_eq!(m.label(), "hs+[half-cauchy:0.005]");
    }
}
