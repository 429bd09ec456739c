use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chiralis::exec::Execution;
use chiralis::poisson::PoissonStructure;
use chiralis::slices::{charge_window, homology_batch, ComplexKind, ComplexSpec};

fn homology_sweep(c: &mut Criterion) {
    let p = PoissonStructure::extended_example();
    let complex = ComplexSpec::new(ComplexKind::ChiralPoissonHomology, &p);
    let mut group = c.benchmark_group("chiral-poisson-homology");
    group.sample_size(10);
    for weight in [1, 2] {
        let slices = charge_window(complex.sheaf(), 2, weight, 2);
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, weight), &slices, |b, s| {
                b.iter(|| homology_batch(&complex, s, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, homology_sweep);
criterion_main!(benches);
