//! Real-study ingestion: t-statistics in, z-scores and effect sizes out.

use std::io::{Read, Write};

use log::warn;

use crate::data::NormalMeansData;
use crate::error::{Error, Result};
use crate::mcmc::{run_gibbs, McmcConfig};
use crate::output::{fmt_bool, fmt_f64};
use crate::priors::Family;
use crate::specialfn::{std_normal_quantile, student_t_tail};
use crate::testing::half_threshold_rule;

/// Smallest tail probability passed to the normal quantile.
const TAIL_GUARD: f64 = 1e-300;

/// Φ⁻¹(F_t(t; df)), computed through the upper tail so large |t| keep
/// their precision.
pub fn t_to_z(t: f64, df: u32) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("t statistic {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let tail = student_t_tail(t, df)?.max(TAIL_GUARD);
    let z = -std_normal_quantile(tail)?;
    Ok(if t > 0.0 { z } else { -z })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestStatistic {
    pub id: String,
    pub stat: f64,
    pub df: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    /// 1-based data row, header excluded.
    pub row: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestStatisticsFile {
    pub rows: Vec<TestStatistic>,
    pub rejected: Vec<RejectedRow>,
}

/// Parse `id,stat[,df]` with a header. A file-level `df` overrides the
/// column; one of the two must be present.
pub fn read_test_statistics<R: Read>(input: R, file_df: Option<u32>) -> Result<TestStatisticsFile> {
    if file_df == Some(0) {
        return Err(Error::Config("df must be at least 1".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let id_col = col("id").ok_or_else(|| Error::Parse("missing 'id' column".into()))?;
    let stat_col = col("stat").ok_or_else(|| Error::Parse("missing 'stat' column".into()))?;
    let df_col = col("df");
    if df_col.is_none() && file_df.is_none() {
        return Err(Error::Config("no df column and no file-level df".into()));
    }

    let mut out = TestStatisticsFile::default();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let id = rec.get(id_col).unwrap_or("").to_string();
        let mut reject = |reason: String| {
            warn!("row {row} ({id}): {reason}");
            out.rejected.push(RejectedRow { row, id: id.clone(), reason });
        };
        let stat = match rec.get(stat_col).map(str::parse::<f64>) {
            Some(Ok(v)) if v.is_finite() => v,
            Some(Ok(v)) => {
                reject(format!("non-finite statistic {v}"));
                continue;
            }
            _ => {
                reject("unparsable statistic".into());
                continue;
            }
        };
        let df = match (file_df, df_col.and_then(|c| rec.get(c))) {
            (Some(d), _) => d,
            (None, Some(s)) => match s.parse::<u32>() {
                Ok(d) if d >= 1 => d,
                _ => {
                    reject(format!("bad df '{s}'"));
                    continue;
                }
            },
            (None, None) => {
                reject("missing df".into());
                continue;
            }
        };
        out.rows.push(TestStatistic { id, stat, df });
    }
    Ok(out)
}

pub fn z_scores(file: &TestStatisticsFile) -> Result<Vec<f64>> {
    file.rows.iter().map(|r| t_to_z(r.stat, r.df)).collect()
}

pub fn write_z_csv<W: Write>(w: W, file: &TestStatisticsFile, z: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "stat", "df", "y"])?;
    for (r, z) in file.rows.iter().zip(z) {
        out.write_record([r.id.clone(), fmt_f64(r.stat), r.df.to_string(), fmt_f64(*z)])?;
    }
    out.flush()?;
    Ok(())
}

/// Sampler settings for the real-data pathway: 15,000 sweeps with 3,000
/// burn-in. Thinned by 10 to bound memory at a few thousand coordinates.
pub fn default_analysis_config() -> McmcConfig {
    McmcConfig {
        iterations: 15_000,
        burn_in: 3_000,
        thin: 10,
        ..McmcConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectRow {
    pub id: String,
    pub y: f64,
    pub theta_hat: f64,
    pub omega_hat: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectSizeReport {
    pub family: Family,
    pub rows: Vec<EffectRow>,
    /// (1/n) Σ (θ̂ᵢ − yᵢ)².
    pub mse: f64,
    /// Rows where |θ̂| > |y|; logged, not fatal.
    pub overshoots: Vec<usize>,
}

/// Fit the z-scores and assemble posterior means, ω̂ and half-rule decisions.
pub fn analyze(ids: &[String], z: &[f64], family: Family, config: &McmcConfig) -> Result<EffectSizeReport> {
    if ids.len() != z.len() {
        return Err(Error::Config(format!("{} ids for {} z-scores", ids.len(), z.len())));
    }
    let data = NormalMeansData::new(z.to_vec())?;
    let fit = run_gibbs(&data, family, config)?;
    let omega = fit.summary.omega();
    let reject = half_threshold_rule(&omega);
    let mut overshoots = Vec::new();
    let rows: Vec<EffectRow> = ids
        .iter()
        .zip(z)
        .zip(&fit.summary.coords)
        .enumerate()
        .map(|(i, ((id, &y), c))| {
            if c.mean.abs() > y.abs() {
                overshoots.push(i);
            }
            EffectRow {
                id: id.clone(),
                y,
                theta_hat: c.mean,
                omega_hat: c.omega,
                reject: reject[i],
            }
        })
        .collect();
    if !overshoots.is_empty() {
        warn!("{} posterior means exceed |y| in magnitude", overshoots.len());
    }
    let mse = rows.iter().map(|r| (r.theta_hat - r.y).powi(2)).sum::<f64>() / rows.len() as f64;
    Ok(EffectSizeReport {
        family,
        rows,
        mse,
        overshoots,
    })
}

pub fn write_effects_csv<W: Write>(w: W, report: &EffectSizeReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "y", "theta_hat", "omega_hat", "reject"])?;
    for r in &report.rows {
        out.write_record([
            r.id.clone(),
            fmt_f64(r.y),
            fmt_f64(r.theta_hat),
            fmt_f64(r.omega_hat),
            fmt_bool(r.reject).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The `key=value` stats sidecar.
pub fn write_effects_stats<W: Write>(mut w: W, report: &EffectSizeReport) -> Result<()> {
    let rejected = report.rows.iter().filter(|r| r.reject).count();
    writeln!(w, "family={}", report.family)?;
    writeln!(w, "n={}", report.rows.len())?;
    writeln!(w, "mse={}", fmt_f64(report.mse))?;
    writeln!(w, "rejected={rejected}")?;
    writeln!(w, "overshoots={}", report.overshoots.len())?;
    Ok(())
}
