//! Helpers shared by the integration test targets.
#![allow(dead_code)] // each test target uses a different subset

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nsdp::SymMat;

pub fn random_sym(dim: usize, rng: &mut ChaCha8Rng) -> SymMat<f64> {
    SymMat::from_fn(dim, |_, _| rng.random_range(-2.0..2.0))
}

pub fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0))
}

/// PSD matrices supported on complementary eigenspaces, so that `YZ = 0` up
/// to rounding.
pub fn complementary_psd_pair(m: usize, rng: &mut ChaCha8Rng) -> (SymMat<f64>, SymMat<f64>) {
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let split = rng.random_range(1..m);
    let mut y = DMatrix::zeros(m, m);
    let mut z = DMatrix::zeros(m, m);
    for k in 0..m {
        let col = q.column(k);
        let s: f64 = rng.random_range(0.1..2.0);
        let outer = col * col.transpose() * s;
        if k < split {
            y += outer;
        } else {
            z += outer;
        }
    }
    (
        SymMat::from_dense_symmetrized(&y),
        SymMat::from_dense_symmetrized(&z),
    )
}

/// A strictly feasible correlation matrix (unit diagonal, positive definite),
/// built by normalizing a random Gram matrix.
pub fn random_correlation_matrix(m: usize, rng: &mut ChaCha8Rng) -> SymMat<f64> {
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let gram = &a * a.transpose() + DMatrix::identity(m, m) * 0.1;
    SymMat::from_fn(m, |i, j| {
        gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt()
    })
}
