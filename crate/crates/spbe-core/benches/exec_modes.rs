//! Sequential versus parallel execution of the data-parallel kernels.
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spbe_core::cascade::{simulate, SimConfig};
use spbe_core::oracle::{deviation_test, DeviationConfig};
use spbe_core::par::ExecMode;
use spbe_core::profiles::{large_delta_profile, myopic_profile, RowChoice};
use spbe_core::rational::rat;
use spbe_core::solver::{solve, SolveConfig};
use spbe_core::verifier::check_profile_with;
use spbe_core::GameParams;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn verifier(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_exact");
    group.sample_size(10);
    for n in [11usize, 21] {
        let g = GameParams::new(n, rat(1, 10), rat(999, 1000)).unwrap();
        let profile = solve(&g, &SolveConfig::default()).unwrap().profile;
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| check_profile_with(&profile, &g, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let g = GameParams::new(21, rat(3, 10), rat(1, 1)).unwrap();
    let profile = large_delta_profile(&g);
    for (name, mode) in MODES {
        let mut config = SimConfig::new(7, 20_000, 2_100);
        config.mode = mode;
        group.bench_function(name, |b| b.iter(|| simulate(&profile, &g, &config)));
    }
    group.finish();
}

fn deviation(c: &mut Criterion) {
    let mut group = c.benchmark_group("deviation_test");
    group.sample_size(10);
    let g = GameParams::new(5, rat(1, 10), rat(1, 2)).unwrap();
    let profile = myopic_profile(&g, RowChoice::Buy);
    for (name, mode) in MODES {
        let config = DeviationConfig { seed: 11, n_samples: 5_000, mode, ..DeviationConfig::default() };
        group.bench_function(name, |b| b.iter(|| deviation_test(&profile, &g, &config)));
    }
    group.finish();
}

criterion_group!(benches, verifier, simulation, deviation);
criterion_main!(benches);
