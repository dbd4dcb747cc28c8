use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hsplus::experiments::{gen_sparse_means, SseConfig};
use hsplus::kappa_posterior::KappaPosterior;
use hsplus::mcmc::run_gibbs;
use hsplus::priors::marginal_theta_density;
use hsplus::testing::benjamini_hochberg;
use hsplus::{Family, McmcConfig, PriorSpec, TauPolicy};

fn marginal(c: &mut Criterion) {
    let spec = PriorSpec::horseshoe_plus(1.0);
    c.bench_function("hs+ marginal density", |b| {
        b.iter(|| marginal_theta_density(spec, black_box(1.7)).unwrap())
    });
}

fn kappa_posterior(c: &mut Criterion) {
    let spec = PriorSpec::horseshoe_plus(0.1);
    c.bench_function("hs+ posterior mean by quadrature", |b| {
        b.iter(|| {
            KappaPosterior::new(black_box(3.0), spec)
                .unwrap()
                .posterior_mean_theta()
                .unwrap()
        })
    });
}

fn gibbs(c: &mut Criterion) {
    let data = gen_sparse_means(&SseConfig::desk(0.1, 7.0), 1).unwrap();
    let cfg = McmcConfig {
        iterations: 1_000,
        burn_in: 100,
        tau_policy: TauPolicy::HalfCauchy(1.0 / 200.0),
        ..McmcConfig::default()
    };
    let mut group = c.benchmark_group("gibbs");
    group.sample_size(10);
    for family in [Family::HorseshoePlus, Family::Horseshoe] {
        group.bench_function(format!("{family} n=200, 1000 sweeps"), |b| {
            b.iter(|| run_gibbs(&data, family, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bh(c: &mut Criterion) {
    let p: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 10_007) as f64 / 10_007.0).collect();
    c.bench_function("benjamini-hochberg n=10000", |b| {
        b.iter(|| benjamini_hochberg(black_box(&p), 0.1).unwrap())
    });
}

criterion_group!(benches, marginal, kappa_posterior, gibbs, bh);
criterion_main!(benches);
