#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ngca::metrics::{subspace_distance, subspace_error, SubspacePair};
use ngca::{Frame, Subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-ish random orthogonal matrix from the QR of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, d, d).qr();
    let q = qr.q();
    let r = qr.r();
    let mut q = q.clone();
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

pub fn random_subspace(rng: &mut ChaCha8Rng, d_x: usize, d_s: usize) -> Subspace<f64> {
    Subspace::from_spanning(&gaussian(rng, d_x, d_s), Frame::Original).unwrap()
}

/// `(E, D)` of an original-frame estimate against `span{e_1, ..., e_{d_s}}`.
pub fn score(est: &Subspace<f64>) -> (f64, f64) {
    let truth = Subspace::canonical(est.ambient_dim(), est.dim(), Frame::Original).unwrap();
    let pair = SubspacePair::new(est, &truth).unwrap();
    (subspace_error(&pair), subspace_distance(&pair).unwrap())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}
