use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use svtprox::synthetic::{low_rank_completion, matrix_with_spectrum, trial_rng};
use svtprox::{
    find_threshold, generalized_svt, linear_scan_threshold, make_builtin, solve_accelerated, solve_pgd,
    CompletionProblem, SingularSpectrum,
};

const SEED: u64 = 7;

// Geometric decay keeps j* well inside the spectrum for every rank.
fn decaying(rank: usize) -> SingularSpectrum {
    SingularSpectrum::new((0..rank).map(|i| 10.0 * 0.97f64.powi(i as i32)).collect()).unwrap()
}

fn threshold_search(c: &mut Criterion) {
    let func = make_builtin("exp").unwrap();
    let mut group = c.benchmark_group("threshold");
    for rank in [16, 256, 4096] {
        let spectrum = decaying(rank);
        group.bench_with_input(BenchmarkId::new("binary", rank), &spectrum, |b, s| {
            b.iter(|| find_threshold(&func, black_box(s), 0.5).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("scan", rank), &spectrum, |b, s| {
            b.iter(|| linear_scan_threshold(&func, black_box(s), 0.5).unwrap())
        });
    }
    group.finish();
}

fn prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("generalized_svt");
    for n in [20, 80] {
        let values: Vec<f64> = (0..n).map(|i| 5.0 / (1.0 + i as f64)).collect();
        let y = matrix_with_spectrum(&mut trial_rng(SEED, n as u64), n, n, &values);
        for spec in ["linear", "exp"] {
            let func = make_builtin(spec).unwrap();
            group.bench_with_input(BenchmarkId::new(spec, n), &y, |b, y| {
                b.iter(|| generalized_svt(black_box(y), &func, 0.3).unwrap())
            });
        }
    }
    group.finish();
}

fn completion(c: &mut Criterion) {
    let (_, observed) = low_rank_completion(&mut trial_rng(SEED, 0), 50, 50, 2, 0.6);
    let problem = CompletionProblem::new(50, 50, observed, 0.3, make_builtin("linear").unwrap()).unwrap();
    let mut group = c.benchmark_group("completion");
    group.sample_size(10);
    group.bench_function("pgd", |b| b.iter(|| solve_pgd(&problem, 2000, 1e-9).unwrap()));
    group.bench_function("accelerated", |b| b.iter(|| solve_accelerated(&problem, 2000, 1e-9).unwrap()));
    group.finish();
}

criterion_group!(benches, threshold_search, prox, completion);
criterion_main!(benches);
