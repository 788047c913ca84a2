//! Noll's two-variable example with a 3×3 constraint block.

use nalgebra::{DMatrix, DVector};

use crate::problem::{KktPair, NsdpProblem};
use crate::scalar::Scalar;
use crate::symcore::SymMat;

/// minimize 0.5 (−x₁² − x₂²)  subject to
/// `[[1, x₁−1, 0], [x₁−1, 1, x₂], [0, x₂, 1]]` positive semidefinite.
///
/// The optimal value is −2, attained at `(2, 0)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NollProblem;

impl<T: Scalar> NsdpProblem<T> for NollProblem {
    fn num_vars(&self) -> usize {
        2
    }

    fn constraint_dim(&self) -> usize {
        3
    }

    fn eval_f(&self, x: &DVector<T>) -> T {
        -T::of(0.5) * (x[0] * x[0] + x[1] * x[1])
    }

    fn grad_f(&self, x: &DVector<T>) -> DVector<T> {
        DVector::from_vec(vec![-x[0], -x[1]])
    }

    fn hess_f(&self, _x: &DVector<T>) -> DMatrix<T> {
        -DMatrix::identity(2, 2)
    }

    fn eval_g(&self, x: &DVector<T>) -> SymMat<T> {
        let mut g = SymMat::identity(3);
        g.set(0, 1, x[0] - T::one());
        g.set(1, 2, x[1]);
        g
    }

    fn dg(&self, _x: &DVector<T>, i: usize) -> SymMat<T> {
        let mut d = SymMat::zeros(3);
        match i {
            0 => d.set(0, 1, T::one()),
            1 => d.set(1, 2, T::one()),
            _ => panic!("partial index {i} out of range for a 2-variable problem"),
        }
        d
    }

    fn constraint_is_affine(&self) -> bool {
        true
    }
}

impl NollProblem {
    /// The KKT pair at the optimum `(2, 0)`: the kernel of `G(2, 0)` is
    /// spanned by `(1, −1, 0)/√2`, and stationarity forces `Λ₁₂ = −1`, giving
    /// `Λ = [[1, −1, 0], [−1, 1, 0], [0, 0, 0]]`.
    pub fn optimal_pair<T: Scalar>() -> KktPair<T> {
        let x = DVector::from_vec(vec![T::of(2.0), T::zero()]);
        let mut lambda = SymMat::zeros(3);
        lambda.set(0, 0, T::one());
        lambda.set(1, 1, T::one());
        lambda.set(0, 1, -T::one());
        KktPair { x, lambda }
    }
}
