//! Throughput of the hot paths: disturbance sampling, lateral prediction and search.

use std::hint::black_box;

use astfalsify_core::environment::{build_flight_plan, sample_disturbance};
use astfalsify_core::harness::{run_experiment, Algorithm, ExperimentConfig};
use astfalsify_core::mcts::{Mcts, SearchConfig};
use astfalsify_core::trajectory::predict_lateral;
use astfalsify_core::{DefectConfig, EnvDistribution, Point, SeedPath};
use criterion::{criterion_group, criterion_main, Criterion};

fn environment(c: &mut Criterion) {
    let dist = EnvDistribution::default();
    c.bench_function("sample_disturbance", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            sample_disturbance(black_box(seed), &dist)
        })
    });
}

fn trajectory(c: &mut Criterion) {
    let path = SeedPath::from_seeds(Point::ORIGIN, (1..=12).collect());
    let plan = build_flight_plan(&path, &EnvDistribution::default()).unwrap();
    let defect = DefectConfig::default();
    c.bench_function("build_flight_plan_12", |b| {
        b.iter(|| build_flight_plan(black_box(&path), &EnvDistribution::default()).unwrap())
    });
    c.bench_function("predict_lateral_12", |b| {
        b.iter(|| predict_lateral(black_box(&plan), &defect).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search_500");
    group.sample_size(20);
    group.bench_function("mcts", |b| {
        b.iter(|| {
            let mut mdp = ExperimentConfig::new(Algorithm::Mcts).build_mdp().unwrap();
            let cfg = SearchConfig { episodes: 500, ..SearchConfig::default() };
            Mcts::new(&mut mdp, cfg, 0).unwrap().search().unwrap().records.len()
        })
    });
    for algo in [Algorithm::Mc, Algorithm::Cem] {
        let mut cfg = ExperimentConfig::new(algo);
        cfg.episodes = 500;
        group.bench_function(algo.as_str(), |b| b.iter(|| run_experiment(&cfg).unwrap().metrics));
    }
    group.finish();
}

criterion_group!(benches, environment, trajectory, search);
criterion_main!(benches);
