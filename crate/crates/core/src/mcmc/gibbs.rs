use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use super::{derive_seed, summarize, McmcConfig, PosteriorSummary, TauPolicy};
use crate::data::NormalMeansData;
use crate::error::{Error, Result};
use crate::priors::Family;

const FLOOR: f64 = 1e-300;
const CEIL: f64 = 1e300;

/// Retained draws of one chain, stored draw-major (`draw * n + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub n: usize,
    pub theta: Vec<f64>,
    /// 1/(1+λ²): shrinkage against the actual prior scale of θ.
    pub kappa: Vec<f64>,
    /// 1/(1+λ²/τ²): shrinkage of the de-scaled local variable.
    pub kappa_descaled: Vec<f64>,
    pub tau: Vec<f64>,
    /// Scale draws clamped into [1e-300, 1e300].
    pub clamps: u64,
}

impl ChainDraws {
    pub fn draws(&self) -> usize {
        self.tau.len()
    }

    pub fn theta_column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.theta.iter().skip(i).step_by(self.n).copied()
    }

    pub fn kappa_column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.kappa.iter().skip(i).step_by(self.n).copied()
    }
}

#[derive(Debug, Clone)]
pub struct GibbsOutput {
    pub chains: Vec<ChainDraws>,
    pub summary: PosteriorSummary,
}

impl GibbsOutput {
    pub fn clamps(&self) -> u64 {
        self.chains.iter().map(|c| c.clamps).sum()
    }
}

struct Sampler<'a> {
    y: &'a [f64],
    family: Family,
    policy: TauPolicy,
    rng: ChaCha8Rng,
    theta: Vec<f64>,
    lambda_sq: Vec<f64>,
    nu: Vec<f64>,
    eta_sq: Vec<f64>,
    xi: Vec<f64>,
    tau_sq: f64,
    zeta: f64,
    clamps: u64,
}

impl<'a> Sampler<'a> {
    fn new(y: &'a [f64], family: Family, policy: TauPolicy, seed: u64) -> Self {
        let n = y.len();
        let tau_sq = match policy {
            TauPolicy::Fixed(t) => t * t,
            TauPolicy::HalfCauchy(s) => s * s,
            TauPolicy::Uniform01 => 0.25,
        };
        Self {
            y,
            family,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            theta: y.to_vec(),
            lambda_sq: vec![1.0; n],
            nu: vec![1.0; n],
            eta_sq: vec![1.0; n],
            xi: vec![1.0; n],
            tau_sq,
            zeta: 1.0,
            clamps: 0,
        }
    }

    fn clamp(&mut self, v: f64) -> f64 {
        if v < FLOOR || v.is_nan() {
            self.clamps += 1;
            FLOOR
        } else if v > CEIL {
            self.clamps += 1;
            CEIL
        } else {
            v
        }
    }

    /// IG(1, b) as b / Exp(1).
    fn inv_gamma_1(&mut self, b: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        let v = b / e;
        self.clamp(v)
    }

    fn inv_gamma(&mut self, shape: f64, b: f64) -> f64 {
        let g: f64 = Gamma::new(shape, 1.0).expect("shape is positive").sample(&mut self.rng);
        let v = b / g;
        self.clamp(v)
    }

    fn sweep(&mut self) {
        let n = self.y.len();
        let plus = self.family == Family::HorseshoePlus;
        for i in 0..n {
            let l2 = self.lambda_sq[i];
            let shrink = l2 / (1.0 + l2);
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.theta[i] = shrink * self.y[i] + shrink.sqrt() * z;

            let th = self.theta[i];
            self.lambda_sq[i] = self.inv_gamma_1(1.0 / self.nu[i] + 0.5 * th * th);

            let top = if plus { self.tau_sq * self.eta_sq[i] } else { self.tau_sq };
            self.nu[i] = self.inv_gamma_1(1.0 / self.lambda_sq[i] + 1.0 / top);

            if plus {
                self.eta_sq[i] = self.inv_gamma_1(1.0 / self.xi[i] + 1.0 / (self.tau_sq * self.nu[i]));
                self.xi[i] = self.inv_gamma_1(1.0 + 1.0 / self.eta_sq[i]);
            }
        }

        let s: f64 = if plus {
            (0..n).map(|i| 1.0 / (self.eta_sq[i] * self.nu[i])).sum()
        } else {
            self.nu.iter().map(|v| 1.0 / v).sum()
        };
        match self.policy {
            TauPolicy::Fixed(_) => {}
            TauPolicy::HalfCauchy(scale) => {
                self.tau_sq = self.inv_gamma(0.5 * (n as f64 + 1.0), 1.0 / self.zeta + s);
                self.zeta = self.inv_gamma_1(1.0 / (scale * scale) + 1.0 / self.tau_sq);
            }
            TauPolicy::Uniform01 => {
                let u = slice_log_tau(0.5 * self.tau_sq.ln(), n, s, &mut self.rng);
                let t2 = (2.0 * u).exp();
                self.tau_sq = self.clamp(t2);
            }
        }
    }
}

/// One stepping-out slice update of u = log τ under a uniform prior on τ.
///
/// Target on u < 0: −(n−1)u − S e^{−2u}.
fn slice_log_tau<R: Rng + ?Sized>(u0: f64, n: usize, s: f64, rng: &mut R) -> f64 {
    let nm1 = n as f64 - 1.0;
    let log_f = |u: f64| {
        if u >= 0.0 {
            f64::NEG_INFINITY
        } else {
            -nm1 * u - s * (-2.0 * u).exp()
        }
    };
    let u0 = u0.min(-1e-12);
    let e: f64 = Exp1.sample(rng);
    let level = log_f(u0) - e;
    let width = 1.0;
    let mut left = u0 - width * rng.random::<f64>();
    let mut right = left + width;
    while log_f(left) > level {
        left -= width;
    }
    while log_f(right) > level {
        right += width;
    }
    loop {
        let u1 = left + (right - left) * rng.random::<f64>();
        if log_f(u1) > level {
            return u1;
        }
        if u1 < u0 {
            left = u1;
        } else {
            right = u1;
        }
    }
}

/// Run a single chain with an explicit seed.
pub fn run_chain(data: &NormalMeansData, family: Family, config: &McmcConfig, seed: u64) -> Result<ChainDraws> {
    config.validate()?;
    let n = data.n();
    if n == 0 {
        return Err(Error::Config("no observations".into()));
    }
    let mut sampler = Sampler::new(&data.y, family, config.tau_policy, seed);
    let keep = config.retained();
    let mut out = ChainDraws {
        n,
        theta: Vec::with_capacity(keep * n),
        kappa: Vec::with_capacity(keep * n),
        kappa_descaled: Vec::with_capacity(keep * n),
        tau: Vec::with_capacity(keep),
        clamps: 0,
    };
    for it in 0..config.iterations {
        sampler.sweep();
        if it >= config.burn_in && (it - config.burn_in) % config.thin == 0 {
            out.theta.extend_from_slice(&sampler.theta);
            out.kappa.extend(sampler.lambda_sq.iter().map(|l2| 1.0 / (1.0 + l2)));
            let t2 = sampler.tau_sq;
            out.kappa_descaled.extend(sampler.lambda_sq.iter().map(|l2| 1.0 / (1.0 + l2 / t2)));
            out.tau.push(t2.sqrt());
        }
    }
    out.clamps = sampler.clamps;
    if out.clamps > 0 {
        warn!("{} scale draws were clamped (seed {seed})", out.clamps);
    }
    Ok(out)
}

/// Run `config.chains` chains in parallel and summarize the pooled draws.
///
/// Chain c uses `derive_seed(config.seed, c, config.replicate)`, so output
/// does not depend on the thread count.
pub fn run_gibbs(data: &NormalMeansData, family: Family, config: &McmcConfig) -> Result<GibbsOutput> {
    config.validate()?;
    let chains = (0..config.chains as u64)
        .into_par_iter()
        .map(|c| run_chain(data, family, config, derive_seed(config.seed, c, config.replicate)))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&chains)?;
    Ok(GibbsOutput { chains, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(policy: TauPolicy) -> McmcConfig {
        McmcConfig {
            iterations: 2000,
            burn_in: 500,
            tau_policy: policy,
            ..McmcConfig::default()
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let data = NormalMeansData::new(vec![0.0, 3.0, -1.0, 6.0]).unwrap();
        for policy in [TauPolicy::Fixed(0.3), TauPolicy::HalfCauchy(1.0), TauPolicy::Uniform01] {
            let a = run_chain(&data, Family::HorseshoePlus, &cfg(policy), 7).unwrap();
            let b = run_chain(&data, Family::HorseshoePlus, &cfg(policy), 7).unwrap();
            assert_eq!(a, b);
            let c = run_chain(&data, Family::HorseshoePlus, &cfg(policy), 8).unwrap();
            assert_ne!(a.theta, c.theta);
        }
    }

    #[test]
    fn scales_stay_positive() {
        let data = NormalMeansData::new(vec![0.0; 50]).unwrap();
        for family in [Family::Horseshoe, Family::HorseshoePlus] {
            for policy in [TauPolicy::HalfCauchy(0.02), TauPolicy::Uniform01] {
                let out = run_chain(&data, family, &cfg(policy), 3).unwrap();
                assert!(out.tau.iter().all(|&t| t > 0.0 && t.is_finite()));
                assert!(out.kappa.iter().all(|&k| k > 0.0 && k <= 1.0));
                assert!(out.theta.iter().all(|t| t.is_finite()));
            }
        }
    }

    #[test]
    fn uniform_tau_stays_below_one() {
        let data = NormalMeansData::new(vec![5.0; 20]).unwrap();
        let out = run_chain(&data, Family::HorseshoePlus, &cfg(TauPolicy::Uniform01), 1).unwrap();
        assert!(out.tau.iter().all(|&t| t > 0.0 && t < 1.0));
    }

    #[test]
    fn slice_sampler_targets_its_density() {
        // n = 3, S = 0.5: p(u) ∝ e^{-2u - 0.5 e^{-2u}} on u < 0; compare means.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut u = -0.5;
        let mut acc = 0.0;
        let m = 200_000;
        for _ in 0..m {
            u = slice_log_tau(u, 3, 0.5, &mut rng);
            acc += u;
        }
        let f = |u: f64| (-2.0 * u - 0.5 * (-2.0 * u).exp()).exp();
        let z = crate::quadrature::integrate(f, &[-10.0, -1.0, 0.0]).unwrap();
        let mean = crate::quadrature::integrate(|u| u * f(u), &[-10.0, -1.0, 0.0]).unwrap() / z;
        assert!((acc / m as f64 - mean).abs() < 0.01, "{} vs {mean}", acc / m as f64);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NormalMeansData::new(vec![f64::NAN]).is_err());
        let data = NormalMeansData::new(vec![]).unwrap();
        assert!(run_chain(&data, Family::Horseshoe, &McmcConfig::default(), 1).is_err());
    }
}
