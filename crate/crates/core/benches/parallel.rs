use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pawforest::data::gen_synthetic;
use pawforest::paw::{estimate_weight_table_cv, PawConfig};
use pawforest::{ForestConfig, ForestModel, SyntheticKind};
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let mut out = vec![("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if pawforest::exec::is_parallel() {
        out.push(("parallel", ThreadPoolBuilder::new().build().unwrap()));
    }
    out
}

fn forest(c: &mut Criterion) {
    let train = gen_synthetic(SyntheticKind::Moons, 1000, 0.3, 1).unwrap();
    let test = gen_synthetic(SyntheticKind::Moons, 1000, 0.3, 2).unwrap();
    let cfg = ForestConfig::new(100, 7);
    let model = ForestModel::fit(&train, &cfg).unwrap();
    let mut g = c.benchmark_group("forest");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("fit", name), |b| {
            b.iter(|| pool.install(|| ForestModel::fit(&train, &cfg).unwrap()))
        });
        g.bench_function(BenchmarkId::new("votes_batch", name), |b| {
            b.iter(|| pool.install(|| model.votes_batch(&test).unwrap()))
        });
    }
    g.finish();
}

fn weights(c: &mut Criterion) {
    let train = gen_synthetic(SyntheticKind::Overlap, 600, 1.0, 3).unwrap();
    let cfg = PawConfig {
        n_trees: 50,
        ..PawConfig::default()
    };
    let mut g = c.benchmark_group("weights");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("cv_table", name), |b| {
            b.iter(|| pool.install(|| estimate_weight_table_cv(&train, &cfg, 5).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, forest, weights);
criterion_main!(benches);
