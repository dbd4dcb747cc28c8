use super::gibbs::ChainDraws;

/// Convergence and Monte Carlo error report.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    /// Split-chain potential scale reduction of θ_i; absent with one chain.
    pub rhat: Option<Vec<f64>>,
    pub mcse_theta: Vec<f64>,
    pub mcse_kappa: Vec<f64>,
    /// Coordinates whose reduction factor exceeds 1.1.
    pub flagged: Vec<usize>,
    pub clamps: u64,
}

/// Split-chain potential scale reduction of a set of equal-length chains.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let half = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    let seqs: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[half..2 * half]])
        .collect();
    let m = seqs.len() as f64;
    let n = half as f64;
    let means: Vec<f64> = seqs.iter().map(|s| s.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b_over_n = means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let w = seqs
        .iter()
        .zip(&means)
        .map(|(s, mu)| s.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return 1.0;
    }
    let var_plus = (n - 1.0) / n * w + b_over_n;
    (var_plus / w).sqrt()
}

/// Batch-means standard error of the pooled mean.
///
/// Each chain is cut into ⌊√N⌋ batches; the variance of all batch means
/// over the number of batches estimates the variance of the grand mean.
pub fn batch_means_se(chains: &[Vec<f64>]) -> f64 {
    let mut batch_means = Vec::new();
    for c in chains {
        let batches = (c.len() as f64).sqrt().floor() as usize;
        if batches < 2 {
            continue;
        }
        let size = c.len() / batches;
        for b in 0..batches {
            let slice = &c[b * size..(b + 1) * size];
            batch_means.push(slice.iter().sum::<f64>() / size as f64);
        }
    }
    let k = batch_means.len() as f64;
    if k < 2.0 {
        return f64::NAN;
    }
    let mu = batch_means.iter().sum::<f64>() / k;
    let var = batch_means.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

/// R-hat per coordinate (with ≥ 2 chains) and batch-means MCSE.
pub fn diagnostics(chains: &[ChainDraws]) -> DiagnosticsReport {
    let n = chains.first().map_or(0, |c| c.n);
    let mut rhat = Vec::with_capacity(n);
    let mut mcse_theta = Vec::with_capacity(n);
    let mut mcse_kappa = Vec::with_capacity(n);
    for i in 0..n {
        let th: Vec<Vec<f64>> = chains.iter().map(|c| c.theta_column(i).collect()).collect();
        let ka: Vec<Vec<f64>> = chains.iter().map(|c| c.kappa_column(i).collect()).collect();
        if chains.len() >= 2 {
            rhat.push(split_rhat(&th));
        }
        mcse_theta.push(batch_means_se(&th));
        mcse_kappa.push(batch_means_se(&ka));
    }
    let flagged = rhat
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 1.1)
        .map(|(i, _)| i)
        .collect();
    DiagnosticsReport {
        rhat: (chains.len() >= 2).then_some(rhat),
        mcse_theta,
        mcse_kappa,
        flagged,
        clamps: chains.iter().map(|c| c.clamps).sum(),
    }
}
