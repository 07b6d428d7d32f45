use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use regcorr::analysis::{refinement_study, Norm, Scheme, StudyConfig};
use regcorr::detect::DetectionParams;
use regcorr::grid::{
    sample, BivariateFunction, Grid2DSamples, PiecewiseTestFunction, UniformGrid1D,
};
use regcorr::rc::{rc_point_values_with, Framework};
use regcorr::subdivision::{dd4_refine_final, BoundaryPolicy};
use regcorr::tensor2d::{rc2d_point_values_with, Rc2DParams};
use regcorr::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn dd4(c: &mut Criterion) {
    let data = sample(
        &PiecewiseTestFunction::exp1(0.0),
        &UniformGrid1D::unit(1024).unwrap(),
    );
    let mut group = c.benchmark_group("dd4_refine_final_N1024_L8");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                dd4_refine_final(
                    black_box(&data),
                    8,
                    BoundaryPolicy::BoundaryAsDiscontinuity,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn rc(c: &mut Criterion) {
    let data = sample(
        &PiecewiseTestFunction::exp1(0.0),
        &UniformGrid1D::unit(256).unwrap(),
    );
    let params = DetectionParams::default();
    let mut group = c.benchmark_group("rc_point_values_N256_L8");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rc_point_values_with(black_box(&data), 8, &params, exec).unwrap())
        });
    }
    group.finish();
}

fn rc2d(c: &mut Criterion) {
    let data = Grid2DSamples::sample(BivariateFunction::CircleArc, 64).unwrap();
    let params = Rc2DParams::default();
    let mut group = c.benchmark_group("rc2d_point_values_N64_L2");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rc2d_point_values_with(black_box(&data), 2, &params, exec).unwrap())
        });
    }
    group.finish();
}

fn study(c: &mut Criterion) {
    let mut group = c.benchmark_group("refinement_study_exp3_cell");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = StudyConfig::new(
            PiecewiseTestFunction::exp3(),
            Framework::Cell,
            Scheme::Rc,
            Norm::L1,
        )
        .resolutions([32, 64, 128, 256]);
        cfg.levels = Some(6);
        cfg.exec = exec;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| refinement_study(black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dd4, rc, rc2d, study);
criterion_main!(benches);
