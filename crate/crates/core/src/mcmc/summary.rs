use super::gibbs::ChainDraws;
use crate::error::{Error, Result};

pub const MIN_DRAWS: usize = 100;

/// Posterior summary of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateSummary {
    pub mean: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// E[1/(1+λ²) | y].
    pub mean_kappa: f64,
    /// E[1/(1+λ²/τ²) | y].
    pub mean_kappa_descaled: f64,
    /// Pseudo-inclusion probability 1 − E[1/(1+λ²) | y].
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub coords: Vec<CoordinateSummary>,
    pub tau_mean: f64,
    pub draws: usize,
}

impl PosteriorSummary {
    pub fn omega(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.omega).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.mean).collect()
    }

    pub fn medians(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.median).collect()
    }
}

/// Quantile of sorted data, averaging the two order statistics around
/// position (N−1)p.
pub fn quantile_midpoint(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    0.5 * (sorted[lo] + sorted[hi])
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c as f64
}

/// Pool the chains and summarize each coordinate.
pub fn summarize(chains: &[ChainDraws]) -> Result<PosteriorSummary> {
    let draws: usize = chains.iter().map(|c| c.draws()).sum();
    if draws < MIN_DRAWS {
        return Err(Error::TooFewDraws { needed: MIN_DRAWS, got: draws });
    }
    let n = chains[0].n;
    if chains.iter().any(|c| c.n != n) {
        return Err(Error::Config("chains disagree on dimension".into()));
    }
    let mut column = Vec::with_capacity(draws);
    let coords = (0..n)
        .map(|i| {
            column.clear();
            column.extend(chains.iter().flat_map(|c| c.theta_column(i)));
            let m = mean(column.iter().copied());
            column.sort_by(f64::total_cmp);
            let mean_kappa = mean(chains.iter().flat_map(|c| c.kappa_column(i)));
            let mean_kappa_descaled =
                mean(chains.iter().flat_map(|c| c.kappa_descaled.iter().skip(i).step_by(n).copied()));
            CoordinateSummary {
                mean: m,
                median: quantile_midpoint(&column, 0.5),
                lower: quantile_midpoint(&column, 0.025),
                upper: quantile_midpoint(&column, 0.975),
                mean_kappa,
                mean_kappa_descaled,
                omega: 1.0 - mean_kappa,
            }
        })
        .collect();
    let tau_mean = mean(chains.iter().flat_map(|c| c.tau.iter().copied()));
    Ok(PosteriorSummary { coords, tau_mean, draws })
}
