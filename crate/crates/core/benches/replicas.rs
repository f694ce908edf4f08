use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tiltlab::sampler::observe_statistics;
use tiltlab::{Execution, SamplingPlan, TiltedEnsembleSpec};

fn replicas(c: &mut Criterion) {
    let spec = TiltedEnsembleSpec::geometric(2, 2.0, 1.0, 2.0, 16);
    let plan = SamplingPlan {
        samples: 400,
        replicas: 4,
        burn_in: 200,
        thin: 10,
    };
    let mut group = c.benchmark_group("replicas");
    group.sample_size(10);
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new(label, plan.replicas), &exec, |b, &exec| {
            b.iter(|| {
                observe_statistics(&spec, &plan, 7, exec, 1, |e, v| v[0] = e.get(0, e.sites() / 2) as f64).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, replicas);
criterion_main!(benches);
