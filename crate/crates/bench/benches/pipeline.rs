use actor_concepts::{run_pipeline, PipelineConfig};
use actor_concepts_bench::corpus;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn full_pipeline(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("run_pipeline");
    group.sample_size(10);
    for n in [200, 500, 1000] {
        let data = corpus(n, 300, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| run_pipeline(&data.mentions, &data.store, &[], &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, full_pipeline);
criterion_main!(benches);
