use proptest::prelude::*;
use rand::Rng;
use svtprox::linalg::{prox_objective, singular_values, spectral_norm};
use svtprox::synthetic::{gaussian_matrix, matrix_with_spectrum, random_orthonormal, random_spectrum, seeded};
use svtprox::{certify_optimality, generalized_svt, make_builtin, soft_threshold_matrix, DenseMatrix, BUILTIN_SPECS};

/// Random matrix (up to 7×7, possibly rank deficient), builtin index and τ.
fn instance() -> impl Strategy<Value = (DenseMatrix, usize, f64)> {
    (any::<u64>(), 0..BUILTIN_SPECS.len(), 0.02f64..1.5).prop_map(|(seed, f, scale)| {
        let mut rng = seeded(seed);
        let (rows, cols) = (rng.random_range(1..=7), rng.random_range(1..=7));
        let spectrum = random_spectrum(&mut rng, rows.min(cols), true);
        let y = matrix_with_spectrum(&mut rng, rows, cols, spectrum.values());
        (y, f, scale * spectrum.largest().unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbations_never_improve_the_objective((y, f, tau) in instance(), seed in any::<u64>()) {
        let func = make_builtin(BUILTIN_SPECS[f]).unwrap();
        let res = generalized_svt(&y, &func, tau).unwrap();
        let base = prox_objective(y.as_nalgebra(), res.x_hat.as_nalgebra(), &func, tau).unwrap();
        let mut rng = seeded(seed);
        for _ in 0..100 {
            let mut e = gaussian_matrix(&mut rng, y.rows(), y.cols());
            e /= e.norm();
            for delta in [1e-3, 1e-2] {
                let moved = res.x_hat.as_nalgebra() + &e * delta;
                let value = prox_objective(y.as_nalgebra(), &moved, &func, tau).unwrap();
                prop_assert!(value >= base - 1e-12, "delta {delta}: {value} < {base}");
            }
        }
    }

    #[test]
    fn certificate_passes_and_dual_norm_matches((y, f, tau) in instance()) {
        let func = make_builtin(BUILTIN_SPECS[f]).unwrap();
        let res = generalized_svt(&y, &func, tau).unwrap();
        let cert = certify_optimality(&y, &res, &func, tau, 1e-7).unwrap();
        prop_assert!(cert.passed, "{cert:?}");
        let sv = singular_values(y.as_nalgebra()).unwrap();
        let j = res.threshold.j_star;
        if j > 0 {
            // The unretained spectrum, rescaled by t*, is exactly W.
            let next = sv.get(j).copied().unwrap_or(0.0);
            prop_assert!((cert.w_spectral_norm - next / res.threshold.t_star).abs() <= 1e-9);
        }
    }

    #[test]
    fn prox_commutes_with_transpose_and_rotation((y, f, tau) in instance(), seed in any::<u64>()) {
        let func = make_builtin(BUILTIN_SPECS[f]).unwrap();
        let x = generalized_svt(&y, &func, tau).unwrap().x_hat;
        let yt = DenseMatrix::from_nalgebra(y.as_nalgebra().transpose()).unwrap();
        let xt = generalized_svt(&yt, &func, tau).unwrap().x_hat;
        prop_assert!((xt.as_nalgebra() - x.as_nalgebra().transpose()).amax() <= 1e-10);

        let mut rng = seeded(seed);
        let p = random_orthonormal(&mut rng, y.rows(), y.rows());
        let q = random_orthonormal(&mut rng, y.cols(), y.cols());
        let rotated = DenseMatrix::from_nalgebra(&p * y.as_nalgebra() * &q).unwrap();
        let xr = generalized_svt(&rotated, &func, tau).unwrap().x_hat;
        prop_assert!((xr.as_nalgebra() - &p * x.as_nalgebra() * &q).amax() <= 1e-10);
    }

    #[test]
    fn linear_function_is_soft_thresholding((y, _f, tau) in instance()) {
        let res = generalized_svt(&y, &make_builtin("linear").unwrap(), tau).unwrap();
        let d = soft_threshold_matrix(&y, tau).unwrap();
        prop_assert!(res.x_hat.max_abs_diff(&d) <= 1e-12 * y.frobenius_norm().max(1.0));
        prop_assert!(res.threshold.j_star == 0 || res.threshold.t_star == tau);
    }

    #[test]
    fn output_spectrum_is_shifted_input((y, f, tau) in instance()) {
        let func = make_builtin(BUILTIN_SPECS[f]).unwrap();
        let res = generalized_svt(&y, &func, tau).unwrap();
        let sin = singular_values(y.as_nalgebra()).unwrap();
        let sout = singular_values(res.x_hat.as_nalgebra()).unwrap();
        for (a, b) in sin.iter().zip(&sout) {
            prop_assert!((b - (a - res.threshold.t_star).max(0.0)).abs() <= 1e-12 * sin[0].max(1.0));
        }
        prop_assert!((res.nuclear_norm - sout.iter().sum::<f64>()).abs() <= 1e-12 * sin[0].max(1.0) * sin.len() as f64);
    }
}

#[test]
fn shifted_output_fails_certificate() {
    let mut rng = seeded(77);
    let func = make_builtin("exp").unwrap();
    let y = matrix_with_spectrum(&mut rng, 5, 4, &[3.0, 2.0, 1.0, 0.5]);
    let mut res = generalized_svt(&y, &func, 0.2).unwrap();
    assert!(certify_optimality(&y, &res, &func, 0.2, 1e-7).unwrap().passed);
    res.factors.values[0] += 0.1;
    let bumped = res.factors.u.column(0) * res.factors.v.column(0).transpose() * 0.1;
    res.x_hat = DenseMatrix::from_nalgebra(res.x_hat.as_nalgebra() + bumped).unwrap();
    res.nuclear_norm += 0.1;
    assert!(!certify_optimality(&y, &res, &func, 0.2, 1e-7).unwrap().passed);
}

#[test]
fn zero_output_certificate_uses_scaled_input() {
    let func = make_builtin("exp").unwrap();
    let y = matrix_with_spectrum(&mut seeded(5), 3, 3, &[2.0, 1.0]);
    let res = generalized_svt(&y, &func, 2.5).unwrap();
    assert_eq!(res.retained_rank, 0);
    let cert = certify_optimality(&y, &res, &func, 2.5, 1e-7).unwrap();
    assert!(cert.passed);
    assert!((cert.w_spectral_norm - 2.0 / 2.5).abs() < 1e-12);
    assert!((spectral_norm(y.as_nalgebra()).unwrap() - 2.0).abs() < 1e-12);
}
