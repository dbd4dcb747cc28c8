use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use hsplus::experiments::{
    run_mp_experiment, run_sse_experiment, write_mp_csv, write_sse_csv, Method, MpConfig, MpMode, SseConfig,
};
use hsplus::ingest::{
    analyze, read_test_statistics, write_effects_csv, write_effects_stats, write_z_csv, z_scores,
};
use hsplus::mcmc::{diagnostics, run_gibbs, DEFAULT_SEED};
use hsplus::output::{fmt_bool, fmt_f64};
use hsplus::priors::{kappa_prior_density, lambda_density, marginal_theta_density};
use hsplus::testing::{benjamini_hochberg, bh_default_alpha, half_threshold_rule, score, two_sided_pvalue};
use hsplus::verify::{run_suite, Suite};
use hsplus::{Error, Family, McmcConfig, NormalMeansData, PriorSpec, TauPolicy};

use crate::{
    Cli, Cmd, DensityArgs, Failure, FitArgs, IngestArgs, SimMpArgs, SimSseArgs, TestArgs, VerifyArgs,
};

type Outcome = Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn parsed<T: std::str::FromStr<Err = Error>>(what: &str, s: &str) -> Result<T, Failure> {
    s.parse::<T>().map_err(|e| Failure::Usage(format!("--{what}: {e}")))
}

fn required<'a, T>(what: &str, v: &'a Option<T>) -> Result<&'a T, Failure> {
    v.as_ref().ok_or_else(|| Failure::Usage(format!("--{what} is required")))
}

fn list(what: &str, s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--{what}: bad number '{v}'")))
        })
        .collect()
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn resolve_seed(seed: &Option<String>) -> Result<u64, Failure> {
    match seed.as_deref() {
        None => Ok(DEFAULT_SEED),
        Some("random") => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            Ok(s)
        }
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| Failure::Usage(format!("--seed expects an unsigned integer or 'random', got '{s}'"))),
    }
}

pub fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        if t == 0 {
            return usage("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let seed = resolve_seed(&cli.seed)?;
    match &cli.command {
        Cmd::Density(a) => density(a),
        Cmd::Fit(a) => fit(a, seed),
        Cmd::Test(a) => test(a),
        Cmd::SimSse(a) => sim_sse(a, seed),
        Cmd::SimMp(a) => sim_mp(a, seed),
        Cmd::Verify(a) => verify(a),
        Cmd::Ingest(a) => ingest(a, seed),
    }
}

fn grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts = list("grid", &spec.replace(':', ","))?;
    let [lo, hi, step] = parts[..] else {
        return usage("--grid expects LO:HI:STEP");
    };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return usage(format!("--grid {spec}: need LO <= HI and STEP > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

fn density(a: &DensityArgs) -> Outcome {
    let family: Family = parsed("family", &a.family)?;
    let spec = PriorSpec::new(family, a.tau).map_err(|e| Failure::Usage(format!("--tau: {e}")))?;
    let xs = grid(required("grid", &a.grid)?)?;
    let eval: fn(PriorSpec, f64) -> hsplus::Result<f64> = match a.scale.as_str() {
        "theta" => marginal_theta_density,
        "lambda" => lambda_density,
        "kappa" => kappa_prior_density,
        other => return usage(format!("--scale must be theta, lambda or kappa, got '{other}'")),
    };
    let values: Vec<f64> = xs
        .par_iter()
        .map(|&x| match eval(spec, x) {
            Ok(v) => Ok(v),
            Err(Error::PoleAtOrigin) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<hsplus::Result<_>>()?;
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record(["x", "density"])?;
    for (x, v) in xs.iter().zip(&values) {
        w.write_record([fmt_f64(*x), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

fn read_observations(path: &Path) -> Result<NormalMeansData, Failure> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Failure::Runtime(format!("{}: no 'y' column", path.display())))?;
    let truth_col = headers.iter().position(|h| h == "truth");
    let mut y = Vec::new();
    let mut truth = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Failure::Runtime(format!("{}: bad number on data row {}", path.display(), k + 1)))
        };
        y.push(num(y_col)?);
        if let Some(c) = truth_col {
            truth.push(num(c)?);
        }
    }
    Ok(NormalMeansData::with_truth(y, truth_col.map(|_| truth))?)
}

fn fit(a: &FitArgs, seed: u64) -> Outcome {
    let family: Family = parsed("family", &a.family)?;
    let tau_policy: TauPolicy = parsed("tau-policy", &a.tau_policy)?;
    let config = McmcConfig {
        iterations: a.iters,
        burn_in: a.burn,
        seed,
        tau_policy,
        chains: a.chains,
        thin: a.thin,
        replicate: 0,
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = read_observations(required("input", &a.input)?)?;
    let out = run_gibbs(&data, family, &config)?;
    let diag = diagnostics(&out.chains);
    info!(
        "{} draws, tau mean {}, {} coordinates flagged, {} clamps",
        out.summary.draws,
        out.summary.tau_mean,
        diag.flagged.len(),
        diag.clamps
    );
    if !diag.flagged.is_empty() {
        warn!("potential scale reduction above 1.1 at {} coordinates", diag.flagged.len());
    }

    let mut w = csv::Writer::from_writer(sink(&a.summary)?);
    let mut header = vec![
        "index", "y", "mean", "median", "lower", "upper", "mean_kappa", "omega_hat", "mcse_theta", "rhat",
    ];
    if data.truth.is_some() {
        header.push("truth");
    }
    w.write_record(&header)?;
    for (i, c) in out.summary.coords.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            fmt_f64(data.y[i]),
            fmt_f64(c.mean),
            fmt_f64(c.median),
            fmt_f64(c.lower),
            fmt_f64(c.upper),
            fmt_f64(c.mean_kappa),
            fmt_f64(c.omega),
            fmt_f64(diag.mcse_theta[i]),
            diag.rhat.as_ref().map_or(String::new(), |r| fmt_f64(r[i])),
        ];
        if let Some(t) = &data.truth {
            row.push(fmt_f64(t[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    if let Some(path) = &a.posterior {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let mut header: Vec<String> = (1..=data.n()).map(|i| format!("theta_{i}")).collect();
        header.push("tau".into());
        w.write_record(&header)?;
        // Chains are concatenated in index order.
        for chain in &out.chains {
            for d in 0..chain.draws() {
                let row = chain.theta[d * chain.n..(d + 1) * chain.n]
                    .iter()
                    .map(|&t| fmt_f64(t))
                    .chain(std::iter::once(fmt_f64(chain.tau[d])));
                w.write_record(row)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn test(a: &TestArgs) -> Outcome {
    let path = required("summary", &a.summary)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(y_col), Some(w_col)) = (col("y"), col("omega_hat")) else {
        return Err(Failure::Runtime(format!("{}: need 'y' and 'omega_hat' columns", path.display())));
    };
    let truth_col = col("truth");
    let (mut y, mut omega, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Failure::Runtime(format!("bad number on data row {}", k + 1)))
        };
        y.push(num(y_col)?);
        omega.push(num(w_col)?);
        if let Some(c) = truth_col {
            truth.push(num(c)? != 0.0);
        }
    }

    let reject = match a.rule.as_str() {
        "half" => half_threshold_rule(&omega),
        "bh" => {
            let p: Vec<f64> = y.iter().map(|&v| two_sided_pvalue(v)).collect();
            let alpha = a.alpha.unwrap_or_else(|| bh_default_alpha(y.len()));
            benjamini_hochberg(&p, alpha).map_err(|e| Failure::Usage(format!("--alpha: {e}")))?
        }
        other => return usage(format!("--rule must be half or bh, got '{other}'")),
    };

    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record(["index", "y", "omega_hat", "reject", "truth"])?;
    for i in 0..y.len() {
        let t = if truth_col.is_some() { fmt_bool(truth[i]) } else { "" };
        w.write_record([i.to_string(), fmt_f64(y[i]), fmt_f64(omega[i]), fmt_bool(reject[i]).into(), t.into()])?;
    }
    w.flush()?;

    if truth_col.is_some() {
        let r = score(&reject, &truth)?;
        let show = |v: Option<f64>| v.map_or("undefined".to_string(), fmt_f64);
        eprintln!("t1={} t2={} mp={} risk={}", show(r.t1), show(r.t2), fmt_f64(r.mp), fmt_f64(r.risk));
    }
    Ok(())
}

fn parse_method(entry: &str, n: usize) -> Result<Method, Failure> {
    let (fam, pol) = entry
        .split_once('@')
        .ok_or_else(|| Failure::Usage(format!("--methods: expected FAMILY@POLICY, got '{entry}'")))?;
    let family: Family = parsed("methods", fam.trim())?;
    let pol = pol.trim().replace("1/n", &fmt_f64(1.0 / n as f64));
    Ok(Method::new(family, parsed("methods", &pol)?))
}

fn sim_sse(a: &SimSseArgs, seed: u64) -> Outcome {
    let methods: Vec<Method> = a
        .methods
        .split(',')
        .map(|m| parse_method(m, a.n))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for q in list("q", &a.q)? {
        for amp in list("a", &a.a)? {
            let cfg = SseConfig {
                n: a.n,
                q,
                a: amp,
                replicates: a.replicates,
                mcmc: McmcConfig {
                    iterations: a.iters,
                    burn_in: a.burn,
                    seed,
                    ..McmcConfig::default()
                },
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            info!("q = {q}, A = {amp}");
            rows.extend(run_sse_experiment(&cfg, &methods)?);
        }
    }
    let dropped: usize = rows.iter().map(|r| r.dropped).sum();
    if dropped > 0 {
        warn!("{dropped} method-replicates dropped after sampler failures");
    }
    write_sse_csv(sink(&a.out)?, &rows)?;
    Ok(())
}

fn sim_mp(a: &SimMpArgs, seed: u64) -> Outcome {
    let mut cfg = MpConfig::desk();
    cfg.n = a.n;
    cfg.psi = a.psi.unwrap_or_else(|| (2.0 * (a.n as f64).ln()).sqrt());
    if let Some(mu) = &a.mu {
        cfg.mu_grid = list("mu", mu)?;
    }
    cfg.replicates = a.replicates;
    cfg.seed = seed;
    cfg.mode = match a.mode.as_str() {
        "plug-in" => MpMode::PlugIn,
        "full-bayes" => MpMode::FullBayes(McmcConfig {
            iterations: a.iters,
            burn_in: a.burn,
            seed,
            ..McmcConfig::default()
        }),
        other => return usage(format!("--mode must be plug-in or full-bayes, got '{other}'")),
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = run_mp_experiment(&cfg)?;
    write_mp_csv(sink(&a.out)?, &rows)?;
    Ok(())
}

fn verify(a: &VerifyArgs) -> Outcome {
    let suite: Suite = parsed("suite", &a.suite)?;
    let checks = run_suite(suite)?;
    for c in &checks {
        println!("{c}");
    }
    if checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn ingest(a: &IngestArgs, seed: u64) -> Outcome {
    let path = required("tstats", &a.tstats)?;
    let file = read_test_statistics(File::open(path)?, a.df).map_err(|e| match e {
        Error::Config(msg) => Failure::Usage(msg),
        e => e.into(),
    })?;
    if !file.rejected.is_empty() {
        warn!("{} rows rejected", file.rejected.len());
    }
    let z = z_scores(&file)?;
    write_z_csv(sink(&a.out)?, &file, &z)?;

    if a.analyze {
        let effects = required("effects", &a.effects)?;
        let family: Family = parsed("family", &a.family)?;
        let config = McmcConfig {
            iterations: a.iters,
            burn_in: a.burn,
            thin: a.thin,
            seed,
            tau_policy: parsed("tau-policy", &a.tau_policy)?,
            ..McmcConfig::default()
        };
        config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let ids: Vec<String> = file.rows.iter().map(|r| r.id.clone()).collect();
        let report = analyze(&ids, &z, family, &config)?;
        write_effects_csv(BufWriter::new(File::create(effects)?), &report)?;
        let stats = a.stats.clone().unwrap_or_else(|| {
            let mut p = effects.clone().into_os_string();
            p.push(".stats");
            p.into()
        });
        let mut w = BufWriter::new(File::create(&stats)?);
        write_effects_stats(&mut w, &report)?;
        w.flush()?;
    }
    Ok(())
}
