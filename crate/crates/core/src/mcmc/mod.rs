//! Gibbs sampling for the horseshoe and horseshoe+ hierarchies.
//!
//! Every half-Cauchy layer is written as a pair of inverse-gamma layers,
//! λ ~ C⁺(0, s) ⇔ λ² | ν ~ IG(½, 1/ν), ν ~ IG(½, 1/s²), so all full
//! conditionals are normal or inverse-gamma. A uniform prior on τ has no
//! conjugate update and is handled by slice sampling log τ.

mod diagnostics;
mod gibbs;
mod summary;

pub use diagnostics::{batch_means_se, diagnostics, split_rhat, DiagnosticsReport};
pub use gibbs::{run_chain, run_gibbs, ChainDraws, GibbsOutput};
pub use summary::{quantile_midpoint, summarize, CoordinateSummary, PosteriorSummary};

use crate::error::{Error, Result};

/// Default master seed, so bare runs are reproducible.
pub const DEFAULT_SEED: u64 = 20_150_514;

/// Prior on the global scale τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    Fixed(f64),
    /// τ ~ C⁺(0, s).
    HalfCauchy(f64),
    /// τ ~ Uniform(0, 1).
    Uniform01,
}

impl std::str::FromStr for TauPolicy {
    type Err = Error;

    /// Parses `fixed:R`, `half-cauchy:S` or `uniform`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{v}' in tau policy '{s}'")))
        };
        let lower = s.trim().to_ascii_lowercase();
        let policy = if lower == "uniform" {
            TauPolicy::Uniform01
        } else if let Some(v) = lower.strip_prefix("fixed:") {
            TauPolicy::Fixed(parse(v)?)
        } else if let Some(v) = lower.strip_prefix("half-cauchy:") {
            TauPolicy::HalfCauchy(parse(v)?)
        } else {
            return Err(Error::Parse(format!(
                "unknown tau policy '{s}' (expected fixed:R, half-cauchy:S or uniform)"
            )));
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl std::fmt::Display for TauPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TauPolicy::Fixed(t) => write!(f, "fixed:{t}"),
            TauPolicy::HalfCauchy(s) => write!(f, "half-cauchy:{s}"),
            TauPolicy::Uniform01 => f.write_str("uniform"),
        }
    }
}

impl TauPolicy {
    fn validate(&self) -> Result<()> {
        match *self {
            TauPolicy::Fixed(v) | TauPolicy::HalfCauchy(v) if !(v > 0.0 && v.is_finite()) => {
                Err(Error::Config(format!("tau policy needs a positive finite value, got {v}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub tau_policy: TauPolicy,
    pub chains: usize,
    /// Keep every `thin`-th retained draw.
    pub thin: usize,
    /// Replicate index folded into the seed derivation.
    pub replicate: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 5_000,
            seed: DEFAULT_SEED,
            tau_policy: TauPolicy::HalfCauchy(1.0),
            chains: 1,
            thin: 1,
            replicate: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be below iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        self.tau_policy.validate()
    }

    /// Retained draws per chain after burn-in and thinning.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// Seed for chain `chain` of replicate `replicate`.
///
/// SplitMix64 finalizer applied to master ⊕ chain·φ64 ⊕ replicate·c2 where
/// φ64 = 0x9E3779B97F4A7C15 and c2 = 0xD1B54A32D192ED03.
pub fn derive_seed(master: u64, chain: u64, replicate: u64) -> u64 {
    let mut z = master
        ^ chain.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ replicate.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
