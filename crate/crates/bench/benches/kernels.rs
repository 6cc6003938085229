use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pellipt_bench::{unit_cube, unit_square, Problem};
use pellipt_core::ellipticity::{p_ellipticity_range, MatrixField, MatrixPreset};
use pellipt_core::functionals::ntmax;

fn ellipticity(c: &mut Criterion) {
    let field = MatrixField::from_preset(&MatrixPreset::ScalarComplex { tau: 1.0 }, 3).unwrap();
    c.bench_function("lambda_p/scalar_complex_3d", |b| {
        b.iter(|| field.lambda_p(black_box(4.0)).unwrap())
    });
    c.bench_function("range/scalar_complex_3d", |b| {
        b.iter(|| p_ellipticity_range(black_box(&field), 3).unwrap())
    });
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_solve");
    g.sample_size(10);
    let matrix = MatrixPreset::ScalarComplex { tau: 1.0 };
    for (name, preset, h) in [
        ("square_1/64", unit_square(), 1.0 / 64.0),
        ("square_1/128", unit_square(), 1.0 / 128.0),
        ("cube_1/16", unit_cube(), 1.0 / 16.0),
    ] {
        let problem = Problem::new(&preset, h, &matrix);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| problem.system().solve_dirichlet(&problem.domain, &problem.data).unwrap())
        });
    }
    g.finish();
}

fn nt(c: &mut Criterion) {
    let mut g = c.benchmark_group("ntmax");
    g.sample_size(10);
    let matrix = MatrixPreset::Identity;
    for (name, preset, h) in [
        ("square_1/64", unit_square(), 1.0 / 64.0),
        ("cube_1/16", unit_cube(), 1.0 / 16.0),
    ] {
        let problem = Problem::new(&preset, h, &matrix);
        let u = problem.system().solve_dirichlet(&problem.domain, &problem.data).unwrap();
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ntmax(&problem.domain, black_box(&u.cell_values), 2.0, 1.0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, ellipticity, solve, nt);
criterion_main!(benches);
