use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use preint::model::pca_factorize;
use preint::preintegration::{batch_curve, pointwise_cdf};
use preint::{
    draw_shifts, find_xi, gaussian, CovarianceSpec, Executor, GeneratingVector, Kind, LatticeRule, LognormalSum, Model,
    NormalLattice, PointSet, RootConfig,
};

fn lognormal(dim: usize) -> LognormalSum {
    LognormalSum::new(pca_factorize(&CovarianceSpec::equicorrelated(dim, 1.0, 0.5)).unwrap()).unwrap()
}

fn normal_quantile(c: &mut Criterion) {
    let us: Vec<f64> = (1..=1000).map(|i| i as f64 / 1001.0).collect();
    let mut g = c.benchmark_group("gaussian");
    g.throughput(Throughput::Elements(us.len() as u64));
    g.bench_function("quantile", |b| {
        b.iter(|| us.iter().map(|&u| gaussian::quantile(black_box(u)).unwrap()).sum::<f64>())
    });
    g.bench_function("cdf", |b| b.iter(|| us.iter().map(|&u| gaussian::cdf(black_box(8.0 * u - 4.0))).sum::<f64>()));
    g.finish();
}

fn lattice_points(c: &mut Criterion) {
    let z = GeneratingVector::default_builtin();
    let mut g = c.benchmark_group("lattice");
    for d in [16, 64] {
        let shift = draw_shifts(1, d, 1).pop().unwrap();
        let pts = NormalLattice::new(LatticeRule::new(&z, 4096, d, shift).unwrap());
        let mut out = vec![0.0; d];
        g.throughput(Throughput::Elements(4096));
        g.bench_with_input(BenchmarkId::new("normal_points", d), &d, |b, _| {
            b.iter(|| {
                for i in 0..pts.len() {
                    pts.point(i, &mut out).unwrap();
                }
                black_box(out[0])
            })
        });
    }
    g.finish();
}

fn root_finding(c: &mut Criterion) {
    let model = lognormal(16);
    let cfg = RootConfig::default();
    let fibers: Vec<_> = (0..256)
        .map(|i| {
            let y: Vec<f64> = (0..model.dim()).map(|j| ((i * 31 + j * 7) % 13) as f64 / 6.0 - 1.0).collect();
            model.fiber(&y)
        })
        .collect();
    c.bench_function("find_xi/lognormal16", |b| {
        b.iter(|| fibers.iter().filter_map(|f| find_xi(f, black_box(40.0), &cfg).root()).sum::<f64>())
    });
}

fn estimators(c: &mut Criterion) {
    let z = GeneratingVector::default_builtin();
    let exec = Executor::sequential();
    let cfg = RootConfig::default();
    let mut g = c.benchmark_group("estimator");
    g.sample_size(20);
    for dim in [16, 32] {
        let model = lognormal(dim);
        let shift = draw_shifts(1, model.dim(), 1).pop().unwrap();
        let pts = NormalLattice::new(LatticeRule::new(&z, 1 << 13, model.dim(), shift).unwrap());
        let t = 3.0 * dim as f64;
        g.bench_with_input(BenchmarkId::new("pointwise_cdf", dim), &dim, |b, _| {
            b.iter(|| pointwise_cdf(&model, black_box(t), &pts, &cfg, &exec).unwrap())
        });
        let nodes: Vec<f64> = (0..=16).map(|k| t * (0.5 + k as f64 / 16.0)).collect();
        g.bench_with_input(BenchmarkId::new("batch_curve_17_nodes", dim), &dim, |b, _| {
            b.iter(|| batch_curve(&model, Kind::Pdf, &nodes, &pts, &cfg, &exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, normal_quantile, lattice_points, root_finding, estimators);
criterion_main!(benches);
