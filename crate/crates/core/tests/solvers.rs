use svtprox::io::Observation;
use svtprox::solvers::{solve_accelerated_observed, solve_pgd_observed};
use svtprox::synthetic::{low_rank_completion, seeded};
use svtprox::{
    certify_optimality, make_builtin, objective, solve_accelerated, solve_pgd, CompletionProblem, DenseMatrix,
};

fn problem(seed: u64, n: usize, lambda: f64) -> (DenseMatrix, CompletionProblem) {
    let (truth, observed) = low_rank_completion(&mut seeded(seed), n, n, 2, 0.6);
    let p = CompletionProblem::new(n, n, observed, lambda, make_builtin("linear").unwrap()).unwrap();
    (truth, p)
}

fn relative_error(x: &DenseMatrix, truth: &DenseMatrix) -> f64 {
    (x.as_nalgebra() - truth.as_nalgebra()).norm() / truth.frobenius_norm()
}

#[test]
fn objective_matches_direct_formula() {
    let (_, p) = problem(3, 6, 0.4);
    let x = svtprox::synthetic::matrix_with_spectrum(&mut seeded(4), 6, 6, &[2.0, 1.0]);
    let data: f64 = p.observed().iter().map(|&(i, j, m)| 0.5 * (x.get(i, j) - m).powi(2)).sum();
    let expected = data + 0.4 * 3.0;
    assert!((objective(&p, &x).unwrap() - expected).abs() < 1e-12);

    let filled: Vec<f64> = (0..36)
        .map(|k| p.observed().iter().find(|o| o.0 * 6 + o.1 == k).map_or(0.0, |o| o.2))
        .collect();
    let filled = DenseMatrix::from_row_major(6, 6, filled).unwrap();
    let p1 = p.with_lambda(1.0).unwrap();
    let nuclear: f64 = svtprox::linalg::nuclear_norm(filled.as_nalgebra()).unwrap();
    assert!((objective(&p1, &filled).unwrap() - nuclear).abs() < 1e-12);
    let half_sq: f64 = p.observed().iter().map(|o| 0.5 * o.2 * o.2).sum();
    assert!((objective(&p1, &DenseMatrix::zeros(6, 6)).unwrap() - half_sq).abs() < 1e-12);
}

#[test]
fn every_prox_step_is_certified() {
    let (_, p) = problem(5, 20, 0.5);
    let mut checked = 0;
    let mut check = |step: &svtprox::solvers::ProxStep<'_>| {
        let cert = certify_optimality(step.input, step.result, p.func(), step.tau, 1e-7).unwrap();
        assert!(cert.passed, "iteration {}: {cert:?}", step.iteration);
        checked += 1;
    };
    let report = solve_pgd_observed(&p, 200, 1e-10, &mut check).unwrap();
    let report_acc = solve_accelerated_observed(&p, 200, 1e-10, &mut check).unwrap();
    assert_eq!(checked, report.iterations + report_acc.iterations);
}

#[test]
fn pgd_trace_is_nonincreasing_across_functions() {
    for spec in svtprox::BUILTIN_SPECS {
        let (_, mut p) = problem(6, 15, 0.3);
        p = CompletionProblem::new(15, 15, p.observed().to_vec(), 0.3, make_builtin(spec).unwrap()).unwrap();
        let report = solve_pgd(&p, 500, 1e-12).unwrap();
        assert!(
            report.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()),
            "{spec}: trace increased"
        );
    }
}

#[test]
fn converged_iterate_is_a_fixed_point() {
    let (_, p) = problem(8, 12, 0.5);
    let report = solve_pgd(&p, 5000, 1e-15).unwrap();
    assert!(report.converged);
    let x = report.x.as_nalgebra();
    let mut point = x.clone();
    for &(i, j, m) in p.observed() {
        point[(i, j)] = m;
    }
    let again = svtprox::generalized_svt(&DenseMatrix::from_nalgebra(point).unwrap(), p.func(), p.lambda()).unwrap();
    assert!((again.x_hat.as_nalgebra() - x).norm() <= 1e-6 * x.norm().max(1.0));
}

#[test]
fn smaller_lambda_keeps_more_rank() {
    let (truth, p) = problem(9, 30, 1.0);
    let sigma1 = svtprox::linalg::spectral_norm(truth.as_nalgebra()).unwrap();
    let ranks: Vec<usize> = [10.0, 1.0, 0.1]
        .iter()
        .map(|s| solve_pgd(&p.with_lambda(s * sigma1 / 10.0).unwrap(), 2000, 1e-10).unwrap().retained_rank)
        .collect();
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{ranks:?}");
}

#[test]
fn strongly_regularized_solvers_agree() {
    let (_, p) = problem(10, 30, 5.0);
    let a = solve_pgd(&p, 5000, 1e-14).unwrap();
    let b = solve_accelerated(&p, 5000, 1e-14).unwrap();
    assert!(a.converged && b.converged);
    let diff = (a.x.as_nalgebra() - b.x.as_nalgebra()).norm() / a.x.frobenius_norm().max(1e-300);
    assert!(diff <= 1e-4, "{diff}");
}

#[test]
fn acceleration_usually_needs_fewer_iterations() {
    let trials = 10;
    let mut wins = 0;
    for seed in 0..trials {
        let (_, p) = problem(100 + seed, 50, 0.1);
        let plain = solve_pgd(&p, 2000, 1e-12).unwrap();
        let target = plain.final_objective();
        let acc = solve_accelerated(&p, 2000, 1e-12).unwrap();
        let reached = acc.objective_trace.iter().position(|&f| (f - target).abs() <= 1e-6 * target.abs());
        if reached.is_some_and(|k| k < plain.iterations) {
            wins += 1;
        }
    }
    assert!(wins * 10 >= trials * 8, "{wins}/{trials}");
}

#[test]
fn recovery_improves_as_lambda_shrinks() {
    let (truth, p) = problem(2024, 50, 1.0);
    let errors: Vec<f64> = [1.0, 0.3, 0.1]
        .iter()
        .map(|&l| {
            let report = solve_pgd(&p.with_lambda(l).unwrap(), 2000, 1e-12).unwrap();
            assert!(report.converged, "lambda {l}");
            relative_error(&report.x, &truth)
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] <= 1e-2);
}

#[test]
fn unobserved_problem_stays_at_zero() {
    let empty: Vec<Observation> = Vec::new();
    let p = CompletionProblem::new(3, 4, empty, 1.0, make_builtin("exp").unwrap()).unwrap();
    let report = solve_pgd(&p, 10, 1e-9).unwrap();
    assert!(report.converged);
    assert_eq!(report.x, DenseMatrix::zeros(3, 4));
}
