use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use riley_core::limitset::{limit_set, DEFAULT_CAP};
use riley_core::slice::cusp_cloud;
use riley_core::traces::{farey_polynomial_direct, farey_polynomial_recursive, poly_roots};
use riley_core::{Complex64, ConeOrders, SlicePoint, Slope};

fn polynomials(c: &mut Criterion) {
    let mut g = c.benchmark_group("farey_polynomial");
    for s in ["5/13", "13/34"] {
        let slope: Slope = s.parse().unwrap();
        for (name, orders) in [("parabolic", ConeOrders::PARABOLIC), ("elliptic", ConeOrders::finite(3, 4).unwrap())] {
            g.bench_with_input(BenchmarkId::new(format!("direct/{name}"), s), &slope, |b, &s| {
                b.iter(|| farey_polynomial_direct(s, orders).unwrap())
            });
            g.bench_with_input(BenchmarkId::new(format!("recursive/{name}"), s), &slope, |b, &s| {
                b.iter(|| farey_polynomial_recursive(s, orders).unwrap())
            });
        }
    }
    g.finish();
}

fn roots(c: &mut Criterion) {
    let mut g = c.benchmark_group("poly_roots");
    for s in ["3/10", "17/40"] {
        let p = farey_polynomial_direct(s.parse().unwrap(), ConeOrders::PARABOLIC).unwrap();
        g.bench_function(s, |b| b.iter(|| poly_roots(&p, Complex64::new(-2.0, 0.0)).unwrap()));
    }
    g.finish();
}

fn clouds(c: &mut Criterion) {
    let mut g = c.benchmark_group("cusp_cloud");
    g.sample_size(10);
    for q in [10, 20] {
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| cusp_cloud(q, ConeOrders::PARABOLIC).unwrap())
        });
    }
    g.finish();
}

fn limit_sets(c: &mut Criterion) {
    let mut g = c.benchmark_group("limit_set");
    g.sample_size(10);
    for (name, rho) in [("real", Complex64::new(5.0, 0.0)), ("complex", Complex64::new(2.0, 3.0))] {
        g.bench_function(name, |b| {
            b.iter(|| limit_set(SlicePoint::parabolic(rho), 12, 1e-3, DEFAULT_CAP).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, polynomials, roots, clouds, limit_sets);
criterion_main!(benches);
