use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use oagkit::catalogue::{pairs, sweep};
use oagkit::par::Exec;

fn scheme_sweep(c: &mut Criterion) {
    let cases = pairs();
    let mut group = c.benchmark_group("scheme_sweep");
    group.sample_size(10);
    for name in ["hahn-identity", "mod2"] {
        let case = cases.iter().find(|c| c.name == name).expect("catalogued pair");
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), name), &exec, |b, &exec| {
                b.iter(|| black_box(sweep(case, 4, 3, exec)));
            });
        }
    }
    group.finish();
}

criterion_group!(benches, scheme_sweep);
criterion_main!(benches);
