use criterion::{criterion_group, criterion_main, Criterion};
use macrotrace::fitness_macro::MacroFitnessTask;
use macrotrace::graph_stats::seed_trees;
use macrotrace::inheritance::build_all;
use macrotrace::{extract_macros, generate, SynthConfig};
use macrotrace_bench::{fixture, latex_source};

fn bench_generate(c: &mut Criterion) {
    let cfg = SynthConfig::default();
    c.bench_function("generate 2000 papers", |b| b.iter(|| generate(&cfg).unwrap()));
}

fn bench_graphs(c: &mut Criterion) {
    let f = fixture(2000, 500, 1);
    c.bench_function("build_all", |b| b.iter(|| build_all(&f.corpus, &f.keys).unwrap()));
    c.bench_function("seed_trees", |b| b.iter(|| seed_trees(&f.graphs).unwrap()));
}

fn bench_extract(c: &mut Criterion) {
    let source = latex_source(200);
    c.bench_function("extract 200 definitions", |b| b.iter(|| extract_macros(&source)));
}

fn bench_features(c: &mut Criterion) {
    let f = fixture(2000, 500, 2);
    let mut group = c.benchmark_group("macro features");
    group.sample_size(10);
    group.bench_function("k=10", |b| b.iter(|| MacroFitnessTask::build(&f.corpus, 10, &f.keys).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_generate, bench_graphs, bench_extract, bench_features);
criterion_main!(benches);
