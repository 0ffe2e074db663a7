//! Seeded random instances for tests, verification and benchmarks.
//!
//! All randomness flows from a single `u64` seed through ChaCha8
//! (`rand_chacha::ChaCha8Rng`), whose output stream is fixed across
//! platforms. Independent trials use separate ChaCha streams of the same
//! seed, so results do not depend on the order trials are run in.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::io::Observation;
use crate::linalg::DenseMatrix;
use crate::spectrum::SingularSpectrum;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for one trial: same seed, its own ChaCha stream.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `n × k` matrix with orthonormal columns (`k ≤ n`), from the QR
/// factorization of a Gaussian matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<f64> {
    assert!(k <= n, "cannot fit {k} orthonormal columns in dimension {n}");
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    gaussian_matrix(rng, n, k).qr().q()
}

/// `U·diag(values)·Vᵀ` with Haar-like random orthonormal factors.
pub fn matrix_with_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    values: &[f64],
) -> DenseMatrix {
    let u = random_orthonormal(rng, rows, values.len());
    let v = random_orthonormal(rng, cols, values.len());
    DenseMatrix::from_nalgebra(crate::linalg::reconstruct(&u, values, &v))
        .expect("finite spectrum gives a finite matrix")
}

/// Random spectrum of rank `1..=max_rank` with values in `(0.05, 5)`.
///
/// With `ties`, about a third of the spectra copy some values onto their
/// neighbours so exact repeats occur.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, max_rank: usize, ties: bool) -> SingularSpectrum {
    let r = rng.random_range(1..=max_rank.max(1));
    let mut values: Vec<f64> = (0..r).map(|_| rng.random_range(0.05..5.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if ties && r > 1 && rng.random_bool(1.0 / 3.0) {
        let repeats = rng.random_range(1..r);
        for _ in 0..repeats {
            let k = rng.random_range(1..r);
            values[k] = values[k - 1];
        }
        values.sort_by(|a, b| b.total_cmp(a));
    }
    SingularSpectrum::new(values).expect("generated spectrum is valid")
}

/// Rank-`rank` ground truth `A·Bᵀ` (Gaussian factors) with exactly
/// `round(fraction·rows·cols)` entries observed, listed in row-major order.
pub fn low_rank_completion<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    rank: usize,
    fraction: f64,
) -> (DenseMatrix, Vec<Observation>) {
    let a = gaussian_matrix(rng, rows, rank);
    let b = gaussian_matrix(rng, cols, rank);
    let truth = DenseMatrix::from_nalgebra(a * b.transpose()).expect("finite product");

    let total = rows * cols;
    let count = ((fraction.clamp(0.0, 1.0) * total as f64).round() as usize).min(total);
    let mut positions: Vec<usize> = (0..total).collect();
    positions.shuffle(rng);
    let mut chosen = positions[..count].to_vec();
    chosen.sort_unstable();
    let observed = chosen
        .into_iter()
        .map(|p| (p / cols, p % cols, truth.get(p / cols, p % cols)))
        .collect();
    (truth, observed)
}
