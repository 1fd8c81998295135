use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use polyheat::closed_form::{star_kernel, LegPoint};
use polyheat::complex::library;
use polyheat::spectral::eigensolve;
use polyheat::stochastic::{return_probabilities, GroupModel};
use polyheat::DiscreteOperator;

fn closed_form(c: &mut Criterion) {
    let (p, q) = (LegPoint::new(0, 0.3), LegPoint::new(2, 0.7));
    c.bench_function("star_kernel", |b| b.iter(|| star_kernel(3, black_box(p), black_box(q), black_box(0.05))));
}

fn spectral(c: &mut Criterion) {
    let x = library::star(3);
    let mut g = c.benchmark_group("star_eigensolve");
    g.sample_size(10);
    for h in [0.02, 0.01, 0.005] {
        let d = DiscreteOperator::build(&x, h).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d.len()), &d, |b, d| b.iter(|| eigensolve(d, d.len()).unwrap()));
    }
    g.finish();

    let d = DiscreteOperator::build(&x, 0.005).unwrap();
    let s = eigensolve(&d, d.len()).unwrap();
    c.bench_function("spectral_kernel_eval", |b| b.iter(|| s.kernel(black_box(0.01), 17, 400)));
}

fn walks(c: &mut Criterion) {
    let mut g = c.benchmark_group("return_probabilities");
    for (name, grp) in [("z2", GroupModel::zd(2)), ("f2", GroupModel::free(2))] {
        g.bench_function(name, |b| b.iter(|| return_probabilities(&grp, black_box(200)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, closed_form, spectral, walks);
criterion_main!(benches);
