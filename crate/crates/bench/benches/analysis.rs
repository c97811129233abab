use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tokenscope_bench::samples;
use tokenscope_core::complexity;
use tokenscope_core::harness::aggregate;
use tokenscope_core::similarity::{codebleu, CodeBleuWeights};
use tokenscope_core::smells::{self, DetectorConfig};
use tokenscope_core::syntax;

fn detect(c: &mut Criterion) {
    let samples = samples();
    let config = DetectorConfig::default();
    c.bench_function("parse_and_detect_corpus", |b| {
        b.iter(|| {
            for s in &samples {
                black_box(smells::detect_source(&s.code, &config).unwrap());
            }
        })
    });
}

fn halstead(c: &mut Criterion) {
    let parsed: Vec<_> = samples()
        .into_iter()
        .map(|s| {
            let tree = syntax::parse(&s.code).unwrap();
            let units = syntax::extract_functions(&tree, &s.code);
            (s, tree, units)
        })
        .collect();
    c.bench_function("halstead_and_cyclomatic", |b| {
        b.iter(|| {
            for (s, tree, units) in &parsed {
                for u in units {
                    black_box(complexity::halstead(u, tree, &s.code));
                    black_box(complexity::cyclomatic(u, tree, &s.code));
                }
            }
        })
    });
}

fn similarity(c: &mut Criterion) {
    let samples = samples();
    let w = CodeBleuWeights::default();
    c.bench_function("codebleu_adjacent_pairs", |b| {
        b.iter(|| {
            for pair in samples.windows(2) {
                black_box(codebleu(&pair[0].code, &pair[1].code, w).unwrap());
            }
        })
    });
}

fn stats(c: &mut Criterion) {
    let values: Vec<f64> = (0..10_000)
        .map(|i| ((i * 7919) % 10_007) as f64 / 3.0)
        .collect();
    c.bench_function("aggregate_10k", |b| {
        b.iter(|| black_box(aggregate(&values).unwrap()))
    });
}

criterion_group!(benches, detect, halstead, similarity, stats);
criterion_main!(benches);
