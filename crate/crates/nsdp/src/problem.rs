//! The abstract problem interface: minimize `f(x)` subject to `G(x)` positive
//! semidefinite, with first and second derivatives of both maps.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;
use crate::symcore::SymMat;

/// A nonlinear semidefinite program.
///
/// Implementations must be pure: evaluations may not mutate shared state, so
/// a problem can be shared read-only across threads. Derivative correctness
/// is the implementor's responsibility; the `check-grad` pass and
/// [`crate::gradcheck`] verify it against central finite differences.
pub trait NsdpProblem<T: Scalar>: Sync {
    /// Number of decision variables `n`.
    fn num_vars(&self) -> usize;

    /// Dimension `m` of the constraint matrix.
    fn constraint_dim(&self) -> usize;

    /// Objective `f(x)`.
    fn eval_f(&self, x: &DVector<T>) -> T;

    /// Gradient `∇f(x)`.
    fn grad_f(&self, x: &DVector<T>) -> DVector<T>;

    /// Hessian `∇²f(x)` (symmetric n×n).
    fn hess_f(&self, x: &DVector<T>) -> DMatrix<T>;

    /// Constraint matrix `G(x)`.
    fn eval_g(&self, x: &DVector<T>) -> SymMat<T>;

    /// Partial derivative `∂G(x)/∂x_i`, `i < n`.
    fn dg(&self, x: &DVector<T>, i: usize) -> SymMat<T>;

    /// Second partial `∂²G(x)/∂x_i∂x_j`; symmetric in `(i, j)`.
    ///
    /// Defaults to zero, which is exact for problems whose constraint map is
    /// affine in `x`.
    fn d2g(&self, _x: &DVector<T>, _i: usize, _j: usize) -> SymMat<T> {
        SymMat::zeros(self.constraint_dim())
    }

    /// Whether `G` is affine, i.e. `d2g` is identically zero. Lets the merit
    /// gradients skip the second-order constraint terms.
    fn constraint_is_affine(&self) -> bool {
        false
    }
}

/// A primal-dual pair `(x, Λ)`; whether it satisfies the KKT conditions is
/// measured by [`crate::merit::kkt_residual`].
#[derive(Clone, Debug)]
pub struct KktPair<T: Scalar> {
    /// Primal point.
    pub x: DVector<T>,
    /// Lagrange multiplier.
    pub lambda: SymMat<T>,
}

impl<T: Scalar> KktPair<T> {
    /// KKT residual of the pair for the given problem.
    pub fn residual(&self, p: &dyn NsdpProblem<T>) -> Result<T, crate::error::Error> {
        crate::merit::kkt_residual(p, &self.x, &self.lambda)
    }
}

/// Adjoint of the constraint derivative: `∇G(x)* V = (⟨∂G/∂x_1, V⟩, ..., ⟨∂G/∂x_n, V⟩)`.
///
/// Panics if `V` does not match the constraint dimension.
pub fn adjoint_grad_g<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    v: &SymMat<T>,
) -> DVector<T> {
    assert_eq!(
        v.dim(),
        p.constraint_dim(),
        "adjoint_grad_g dimension mismatch"
    );
    DVector::from_fn(p.num_vars(), |i, _| p.dg(x, i).inner(v))
}

/// Applies the constraint derivative: `∇G(x) w = Σ_i w_i ∂G/∂x_i`.
///
/// Panics if `w` does not have `n` entries.
pub fn apply_grad_g<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    w: &DVector<T>,
) -> SymMat<T> {
    assert_eq!(w.len(), p.num_vars(), "apply_grad_g dimension mismatch");
    let mut out = SymMat::zeros(p.constraint_dim());
    for i in 0..p.num_vars() {
        out.axpy(w[i], &p.dg(x, i));
    }
    out
}

/// Gradient of the Lagrangian: `∇_x L(x, Λ) = ∇f(x) − ∇G(x)* Λ`.
pub fn grad_lagrangian<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
) -> DVector<T> {
    p.grad_f(x) - adjoint_grad_g(p, x, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::NollProblem;
    use crate::testutil::{random_sym, random_vec};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adjoint_on_noll_matches_closed_form() {
        // For the Noll constraint, ∇G(x)* V = 2 (V₁₂, V₂₃).
        let p = NollProblem;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let x = random_vec(2, &mut rng);
            let v = random_sym(3, &mut rng);
            let a = adjoint_grad_g(&p, &x, &v);
            assert_relative_eq!(a[0], 2.0 * v.get(0, 1), epsilon = 1e-15);
            assert_relative_eq!(a[1], 2.0 * v.get(1, 2), epsilon = 1e-15);
        }

        let zero = SymMat::zeros(3);
        let a = adjoint_grad_g(&p, &random_vec(2, &mut rng), &zero);
        assert_eq!(a.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn adjointness_identity() {
        // ⟨∇G(x) w, V⟩ = w · ∇G(x)* V
        let p = NollProblem;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let x = random_vec(2, &mut rng);
            let w = random_vec(2, &mut rng);
            let v = random_sym(3, &mut rng);
            let lhs = apply_grad_g(&p, &x, &w).inner(&v);
            let rhs = w.dot(&adjoint_grad_g(&p, &x, &v));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn lagrangian_gradient_matches_finite_differences() {
        let p = NollProblem;
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let h = 1e-6;
        for _ in 0..30 {
            let x = random_vec(2, &mut rng);
            let lambda = random_sym(3, &mut rng);
            let analytic = grad_lagrangian(&p, &x, &lambda);
            let fd = crate::gradcheck::central_diff_vec(
                |xx| Ok(p.eval_f(xx) - p.eval_g(xx).inner(&lambda)),
                &x,
                h,
            )
            .unwrap();
            let rel = (&fd - &analytic).norm() / (1.0 + analytic.norm());
            assert!(rel < 1e-6, "relative error {rel}");
        }
    }

    #[test]
    fn lagrangian_gradient_hand_value() {
        // Noll at x = (2, 0) with Λ₁₂ = −1, Λ₂₃ = 0:
        // ∇f = (−2, 0) and ∇G*Λ = 2(−1, 0), so ∇_x L = 0.
        let p = NollProblem;
        let x = DVector::from_vec(vec![2.0, 0.0]);
        let mut lambda = SymMat::zeros(3);
        lambda.set(0, 1, -1.0);
        let g = grad_lagrangian(&p, &x, &lambda);
        assert_relative_eq!(g[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-15);

        // Λ = 0 reduces to ∇f.
        let g = grad_lagrangian(&p, &x, &SymMat::zeros(3));
        assert_relative_eq!(g[0], -2.0, epsilon = 1e-15);
    }
}
