//! Helpers shared by the unit tests of several modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::symcore::SymMat;

pub(crate) fn random_sym(dim: usize, rng: &mut ChaCha8Rng) -> SymMat<f64> {
    SymMat::from_fn(dim, |_, _| rng.random_range(-2.0..2.0))
}

pub(crate) fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0))
}

/// PSD matrices supported on complementary eigenspaces of a random orthogonal
/// basis, so that `YZ = 0` up to rounding.
pub(crate) fn complementary_psd_pair(m: usize, rng: &mut ChaCha8Rng) -> (SymMat<f64>, SymMat<f64>) {
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
