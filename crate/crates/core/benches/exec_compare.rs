//! Sequential vs rayon backends on the batch operations of the pipeline.
//! Without the `parallel` feature both variants run the same loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use koopspin::algebra::{to_pauli_coeffs_with, ComplexMatrix, C64};
use koopspin::config::RunConfig;
use koopspin::koopman::eigen_triplets_with;
use koopspin::lindblad::{initial_state, integrate_with, LindbladModel, SpinChainParams};
use koopspin::oracle::{pgd_multistart, random_rrr_instance};
use koopspin::pipeline::{fit, simulate};
use koopspin::Exec;

const BACKENDS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn pauli_coefficients(c: &mut Criterion) {
    let mut g = c.benchmark_group("pauli_coefficients_n5");
    let a = ComplexMatrix::from_fn(32, |i, j| C64::new((i * 7 + j) as f64 * 1e-3, (i as f64 - j as f64) * 1e-3));
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| to_pauli_coeffs_with(black_box(&a), exec).unwrap())
        });
    }
    g.finish();
}

fn integrate_short(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrate_n4_20_snapshots");
    g.sample_size(10);
    let params = SpinChainParams {
        n: 4,
        steps: 20,
        ..SpinChainParams::default()
    };
    let model = LindbladModel::spin_chain(&params).unwrap();
    let rho0 = initial_state("d,u,u,u").unwrap();
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| integrate_with(&model, &rho0, &params, "d,u,u,u", exec).unwrap())
        });
    }
    g.finish();
}

fn pgd_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("pgd_multistart_50");
    g.sample_size(10);
    let inst = random_rrr_instance(7, 4, 20, 2, 1e-2);
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pgd_multistart(black_box(&inst), 50, 7, exec))
        });
    }
    g.finish();
}

fn learned_operator(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let traj = simulate(&cfg).unwrap();
    let est = fit(&traj, &cfg).unwrap().estimator;
    let x = traj.states[99].clone();

    let mut g = c.benchmark_group("apply_1024");
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| est.apply_with(black_box(&x), exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("forecast_100_steps");
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| est.forecast_series_with(black_box(&x), 100, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("eigen_triplets_rank19");
    g.sample_size(10);
    for (name, exec) in BACKENDS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| eigen_triplets_with(&est, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pauli_coefficients, integrate_short, pgd_oracle, learned_operator);
criterion_main!(benches);
