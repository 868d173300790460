//! Parallel against sequential application of the assembled operators, and
//! the downstream effect on a full ground-state solve.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pflab::assembly::{assemble_length_gauge, AssemblyOptions};
use pflab::fock::FockTruncation;
use pflab::grid::Grid1D;
use pflab::matter::{build_atom, AtomModel};
use pflab::photons::sample_continuum;
use pflab::solver::{ground_state, SolverConfig};
use pflab::sparse::SymOp;
use std::sync::Arc;

fn operators() -> Vec<(&'static str, pflab::assembly::CoupledOperator)> {
    let grid = Grid1D::new(601, 0.0707).unwrap();
    let matter = Arc::new(build_atom(&AtomModel::new(grid)).unwrap());
    let bath = sample_continuum(0.01, 0.5, 8, 0.05, 1).unwrap();
    let explicit = assemble_length_gauge(
        matter.clone(),
        &bath,
        FockTruncation::TotalExcitation { cutoff: 2 },
        &AssemblyOptions::default(),
    )
    .unwrap();
    let matrix_free = assemble_length_gauge(
        matter,
        &bath,
        FockTruncation::TotalExcitation { cutoff: 2 },
        &AssemblyOptions { matrix_free_threshold: 1, ..Default::default() },
    )
    .unwrap();
    vec![("explicit_csr", explicit), ("matrix_free", matrix_free)]
}

fn bench_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for (name, op) in operators() {
        let n = op.dim();
        let v: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 / 101.0 - 0.5).collect();
        let mut out = vec![0.0; n];
        group.bench_with_input(BenchmarkId::new("parallel", name), &op, |b, op| {
            b.iter(|| op.apply_into(&v, &mut out));
        });
        group.bench_with_input(BenchmarkId::new("sequential", name), &op, |b, op| {
            b.iter(|| op.apply_seq_into(&v, &mut out));
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let grid = Grid1D::new(301, 0.1414).unwrap();
    let matter = Arc::new(build_atom(&AtomModel::new(grid)).unwrap());
    let bath = sample_continuum(0.1, 0.1, 1, 0.05, 1).unwrap();
    let op = assemble_length_gauge(
        matter,
        &bath,
        FockTruncation::PerMode { cutoff: 20 },
        &AssemblyOptions::default(),
    )
    .unwrap();
    let cfg = SolverConfig { tol: 1e-8, ..SolverConfig::default() };
    let mut group = c.benchmark_group("ground_state");
    group.sample_size(10);
    group.bench_function("single_mode_atom", |b| {
        b.iter(|| ground_state(&op, &cfg).unwrap().energy);
    });
    group.finish();
}

criterion_group!(benches, bench_matvec, bench_solve);
criterion_main!(benches);
