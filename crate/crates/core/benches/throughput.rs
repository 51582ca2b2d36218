//! Bootstrap and scenario throughput on a single-thread rayon pool versus
//! the default pool. Without the `parallel` feature both run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmisurv::estimator::BandwidthRule;
use gmisurv::methods::{Bandwidth, Method, Panel};
use gmisurv::rng;
use gmisurv::simulation::{run_scenario, simulate_dataset, FrailtyModel, SimScenario};
use gmisurv::uncertainty::BootstrapConfig;

fn model() -> FrailtyModel {
    FrailtyModel::new(3.0, 0.3, 1.0, 8.15).unwrap()
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let n = default.current_num_threads();
    vec![
        (
            "1-thread".to_string(),
            rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
        ),
        (format!("default-pool-{n}-threads"), default),
    ]
}

#[cfg(feature = "parallel")]
fn run_in<R: Send>(pool: &rayon::ThreadPool, f: impl FnOnce() -> R + Send) -> R {
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn pools() -> Vec<(String, ())> {
    vec![("sequential".to_string(), ())]
}

#[cfg(not(feature = "parallel"))]
fn run_in<R>(_: &(), f: impl FnOnce() -> R) -> R {
    f()
}

fn bootstrap(c: &mut Criterion) {
    let data = simulate_dataset(&model(), 40.0, 90, &mut rng::stream(1, 0));
    let panel = Panel::new(
        &[Method::Proposed, Method::LogNormal, Method::LogLogistic],
        &[1.3, 1.5, 1.7],
        Bandwidth::Rule(BandwidthRule::default()),
    );
    let cfg = BootstrapConfig::default().with_resamples(200);
    let mut g = c.benchmark_group("bootstrap_n90_b200");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| run_in(&pool, || panel.bootstrap(&data, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn scenario(c: &mut Criterion) {
    let mut s = SimScenario::new(model(), 40.0, 50, &[1.3]);
    s.replicates = 8;
    s.bootstrap_b = 50;
    s.truth_draws = 100_000;
    let mut g = c.benchmark_group("scenario_n50_reps8_b50");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| run_in(&pool, || run_scenario(&s).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bootstrap, scenario);
criterion_main!(benches);
