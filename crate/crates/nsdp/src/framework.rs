//! Generalized augmented Lagrangian `A_c = f + α_c φ(G, β_c Λ) + γ` with
//! pluggable coefficient functions, used to cross-validate the concrete merit
//! function and to express the classical (non-exact) variant.

use nalgebra::DVector;

use crate::error::Error;
use crate::merit::GammaTerm;
use crate::problem::{adjoint_grad_g, NsdpProblem};
use crate::scalar::Scalar;
use crate::symcore::SymMat;

/// `φ(Y, Z) = ‖P(Z/2 − Y)‖² − ‖Z‖²/4`.
///
/// Vanishes on complementary PSD pairs and is nonpositive whenever `Y` is
/// PSD. Panics if dimensions differ.
pub fn phi<T: Scalar>(y: &SymMat<T>, z: &SymMat<T>) -> Result<T, Error> {
    assert_eq!(y.dim(), z.dim(), "phi dimension mismatch");
    let shifted = &z.scaled(T::of(0.5)) - y;
    let proj = shifted.psd_project()?;
    Ok(proj.inner(&proj) - z.inner(z) * T::of(0.25))
}

/// Coefficient functions `(α_c, β_c, γ)` of the generalized merit, together
/// with their analytic gradients.
///
/// `α_c` must be positive at feasible points. The gradients are consumed
/// symbolically by [`ac_grad_x`]/[`ac_grad_lambda`]; user-defined plugins are
/// accepted but nothing checks the exactness conditions for them.
pub trait MeritPlugins<T: Scalar> {
    /// `α_c(x, Λ)`.
    fn alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<T, Error>;
    /// `∇_x α_c(x, Λ)`.
    fn grad_x_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<DVector<T>, Error>;
    /// `∇_Λ α_c(x, Λ)`.
    fn grad_lambda_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<SymMat<T>, Error>;

    /// `β_c(x, Λ)`.
    fn beta(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<T, Error>;
    /// `∇_x β_c(x, Λ)`.
    fn grad_x_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<DVector<T>, Error>;
    /// `∇_Λ β_c(x, Λ)`.
    fn grad_lambda_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        c: T,
    ) -> Result<SymMat<T>, Error>;

    /// `γ(x, Λ)`; independent of `c`.
    fn gamma(&self, p: &dyn NsdpProblem<T>, x: &DVector<T>, lambda: &SymMat<T>)
        -> Result<T, Error>;
    /// `∇_x γ(x, Λ)`.
    fn grad_x_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
    ) -> Result<DVector<T>, Error>;
    /// `∇_Λ γ(x, Λ)`.
    fn grad_lambda_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
    ) -> Result<SymMat<T>, Error>;
}

/// The classical augmented Lagrangian coefficients: `α = c/2`, `β = 2/c`,
/// `γ = 0`. Not exact: minimizers only approach solutions as `c` grows.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClassicalPlugins;

impl<T: Scalar> MeritPlugins<T> for ClassicalPlugins {
    fn alpha(
        &self,
        _p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        c: T,
    ) -> Result<T, Error> {
        Ok(c * T::of(0.5))
    }

    fn grad_x_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<DVector<T>, Error> {
        Ok(DVector::zeros(p.num_vars()))
    }

    fn grad_lambda_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<SymMat<T>, Error> {
        Ok(SymMat::zeros(p.constraint_dim()))
    }

    fn beta(
        &self,
        _p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        c: T,
    ) -> Result<T, Error> {
        Ok(T::of(2.0) / c)
    }

    fn grad_x_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<DVector<T>, Error> {
        Ok(DVector::zeros(p.num_vars()))
    }

    fn grad_lambda_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<SymMat<T>, Error> {
        Ok(SymMat::zeros(p.constraint_dim()))
    }

    fn gamma(&self, _p: &dyn NsdpProblem<T>, _x: &DVector<T>, _l: &SymMat<T>) -> Result<T, Error> {
        Ok(T::zero())
    }

    fn grad_x_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
    ) -> Result<DVector<T>, Error> {
        Ok(DVector::zeros(p.num_vars()))
    }

    fn grad_lambda_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
    ) -> Result<SymMat<T>, Error> {
        Ok(SymMat::zeros(p.constraint_dim()))
    }
}

/// The exact coefficients: classical `α`, `β` plus the multiplier-tracking
/// term `γ(x, Λ) = ‖N(x)(Λ(x) − Λ)‖²`. With these, `A_c` coincides with the
/// concrete merit `L_c`.
#[derive(Clone, Copy, Debug)]
pub struct ExactPlugins<T: Scalar> {
    zeta1: T,
    zeta2: T,
}

impl<T: Scalar> ExactPlugins<T> {
    /// Builds the plugin set with the given regularizer weights.
    pub fn new(zeta1: T, zeta2: T) -> Result<Self, Error> {
        for (name, v) in [("zeta1", zeta1), ("zeta2", zeta2)] {
            if !(v.finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {:?}",
                    v.to_f64()
                )));
            }
        }
        Ok(ExactPlugins { zeta1, zeta2 })
    }
}

impl<T: Scalar> MeritPlugins<T> for ExactPlugins<T> {
    fn alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        l: &SymMat<T>,
        c: T,
    ) -> Result<T, Error> {
        ClassicalPlugins.alpha(p, x, l, c)
    }

    fn grad_x_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<DVector<T>, Error> {
        Ok(DVector::zeros(p.num_vars()))
    }

    fn grad_lambda_alpha(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<SymMat<T>, Error> {
        Ok(SymMat::zeros(p.constraint_dim()))
    }

    fn beta(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        l: &SymMat<T>,
        c: T,
    ) -> Result<T, Error> {
        ClassicalPlugins.beta(p, x, l, c)
    }

    fn grad_x_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<DVector<T>, Error> {
        Ok(DVector::zeros(p.num_vars()))
    }

    fn grad_lambda_beta(
        &self,
        p: &dyn NsdpProblem<T>,
        _x: &DVector<T>,
        _l: &SymMat<T>,
        _c: T,
    ) -> Result<SymMat<T>, Error> {
        Ok(SymMat::zeros(p.constraint_dim()))
    }

    fn gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
    ) -> Result<T, Error> {
        Ok(GammaTerm::new(p, x, lambda, self.zeta1, self.zeta2)?.value())
    }

    fn grad_x_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
    ) -> Result<DVector<T>, Error> {
        let term = GammaTerm::new(p, x, lambda, self.zeta1, self.zeta2)?;
        Ok(term.grad_x(p, x, lambda, self.zeta1, self.zeta2))
    }

    fn grad_lambda_gamma(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
    ) -> Result<SymMat<T>, Error> {
        let term = GammaTerm::new(p, x, lambda, self.zeta1, self.zeta2)?;
        Ok(term.grad_lambda(self.zeta1, self.zeta2))
    }
}

fn require_positive_c<T: Scalar>(c: T) -> Result<(), Error> {
    if !(c.finite() && c > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "penalty c must be positive and finite, got {:?}",
            c.to_f64()
        )));
    }
    Ok(())
}

/// Value of the generalized merit `A_c(x, Λ) = f(x) + α_c φ(G(x), β_c Λ) + γ(x, Λ)`.
pub fn ac_value<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    c: T,
    plugins: &dyn MeritPlugins<T>,
) -> Result<T, Error> {
    require_positive_c(c)?;
    let alpha = plugins.alpha(p, x, lambda, c)?;
    let beta = plugins.beta(p, x, lambda, c)?;
    let gamma = plugins.gamma(p, x, lambda)?;
    let g = p.eval_g(x);
    Ok(p.eval_f(x) + alpha * phi(&g, &lambda.scaled(beta))? + gamma)
}

/// Gradient of `A_c` with respect to `x`:
///
/// `∇f + φ ∇_x α − 2α ∇G* P(βΛ/2 − G) + α ⟨Λ, P(βΛ/2 − G)⟩ ∇_x β
///  − ½ α β ‖Λ‖² ∇_x β + ∇_x γ`.
pub fn ac_grad_x<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    c: T,
    plugins: &dyn MeritPlugins<T>,
) -> Result<DVector<T>, Error> {
    require_positive_c(c)?;
    let alpha = plugins.alpha(p, x, lambda, c)?;
    let beta = plugins.beta(p, x, lambda, c)?;
    let g = p.eval_g(x);
    let proj = {
        let shifted = &lambda.scaled(beta * T::of(0.5)) - &g;
        shifted.psd_project()?
    };
    let phi_val = proj.inner(&proj) - lambda.inner(lambda) * beta * beta * T::of(0.25);
    let lam_norm2 = lambda.inner(lambda);
    let two = T::of(2.0);
    let half = T::of(0.5);

    let mut out = p.grad_f(x);
    out += plugins.grad_x_alpha(p, x, lambda, c)? * phi_val;
    out -= adjoint_grad_g(p, x, &proj) * (two * alpha);
    let beta_coeff = alpha * lambda.inner(&proj) - half * alpha * beta * lam_norm2;
    out += plugins.grad_x_beta(p, x, lambda, c)? * beta_coeff;
    out += plugins.grad_x_gamma(p, x, lambda)?;
    Ok(out)
}

/// Gradient of `A_c` with respect to `Λ`:
///
/// `φ ∇_Λ α + α [ ⟨Λ, P(βΛ/2 − G)⟩ ∇_Λ β + β P(βΛ/2 − G)
///  − ½ β ‖Λ‖² ∇_Λ β − ½ β² Λ ] + ∇_Λ γ`.
pub fn ac_grad_lambda<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    c: T,
    plugins: &dyn MeritPlugins<T>,
) -> Result<SymMat<T>, Error> {
    require_positive_c(c)?;
    let alpha = plugins.alpha(p, x, lambda, c)?;
    let beta = plugins.beta(p, x, lambda, c)?;
    let g = p.eval_g(x);
    let proj = {
        let shifted = &lambda.scaled(beta * T::of(0.5)) - &g;
        shifted.psd_project()?
    };
    let phi_val = proj.inner(&proj) - lambda.inner(lambda) * beta * beta * T::of(0.25);
    let half = T::of(0.5);

    let mut out = plugins.grad_lambda_alpha(p, x, lambda, c)?.scaled(phi_val);
    let grad_beta = plugins.grad_lambda_beta(p, x, lambda, c)?;
    let beta_coeff = lambda.inner(&proj) - half * beta * lambda.inner(lambda);
    out.axpy(alpha * beta_coeff, &grad_beta);
    out.axpy(alpha * beta, &proj);
    out.axpy(-alpha * half * beta * beta, lambda);
    out.axpy(T::one(), &plugins.grad_lambda_gamma(p, x, lambda)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merit::{lc_grad_lambda, lc_grad_x, lc_value, MeritParams};
    use crate::problem::KktPair;
    use crate::problems::NollProblem;
    use crate::symcore::SymMat;
    use crate::testutil::{complementary_psd_pair, random_sym, random_vec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_hand_values() {
        // φ(I, 0) = ‖P(−I)‖² = 0
        let y = SymMat::<f64>::identity(3);
        let z = SymMat::zeros(3);
        assert_relative_eq!(phi(&y, &z).unwrap(), 0.0, epsilon = 1e-14);

        // complementary PSD pair: φ = 0
        let y = SymMat::from_diagonal(&[1.0, 0.0]);
        let z = SymMat::from_diagonal(&[0.0, 2.0]);
        assert_relative_eq!(phi(&y, &z).unwrap(), 0.0, epsilon = 1e-14);

        // φ(I₂, diag(4,0)) = ‖P(diag(1,−1))‖² − 4 = −3
        let y = SymMat::<f64>::identity(2);
        let z = SymMat::from_diagonal(&[4.0, 0.0]);
        assert_relative_eq!(phi(&y, &z).unwrap(), -3.0, epsilon = 1e-12);
    }

    #[test]
    fn phi_on_complementary_pairs_and_psd_first_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = rng.random_range(2..7);
            let (y, z) = complementary_psd_pair(m, &mut rng);
            assert!(phi(&y, &z).unwrap().abs() <= 1e-9);
        }
        for _ in 0..100 {
            let m = rng.random_range(2..7);
            let (y, _) = complementary_psd_pair(m, &mut rng);
            let z = random_sym(m, &mut rng);
            assert!(phi(&y, &z).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn classical_value_at_kkt_pair_is_objective() {
        let p = NollProblem;
        let KktPair { x: xs, lambda: ls } = NollProblem::optimal_pair::<f64>();
        for c in [0.5, 1.0, 10.0, 1000.0] {
            let v = ac_value(&p, &xs, &ls, c, &ClassicalPlugins).unwrap();
            assert_relative_eq!(v, -2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn classical_gradients_vanish_at_kkt_pair() {
        let p = NollProblem;
        let KktPair { x: xs, lambda: ls } = NollProblem::optimal_pair::<f64>();
        for c in [1.0, 100.0] {
            let gx = ac_grad_x(&p, &xs, &ls, c, &ClassicalPlugins).unwrap();
            let gl = ac_grad_lambda(&p, &xs, &ls, c, &ClassicalPlugins).unwrap();
            assert!(gx.amax() <= 1e-9);
            assert!(gl.norm() <= 1e-9);
        }
    }

    #[test]
    fn classical_grad_lambda_with_zero_multiplier_at_feasible_point() {
        // ∇_Λ A_c = (c/2) (2/c) P(−G(x)) = P(−G(x)) = 0 at feasible x.
        let p = NollProblem;
        let x = nalgebra::DVector::from_vec(vec![1.0, 0.2]);
        let gl = ac_grad_lambda(&p, &x, &SymMat::zeros(3), 3.0, &ClassicalPlugins).unwrap();
        assert!(gl.norm() <= 1e-13);
    }

    #[test]
    fn exact_plugins_reproduce_the_concrete_merit() {
        let p = NollProblem;
        let plugins = ExactPlugins::new(1.0, 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let x = random_vec(2, &mut rng);
            let lam = random_sym(3, &mut rng);
            let c: f64 = rng.random_range(0.2..200.0);
            let params = MeritParams::new(c, 1.0, 1e-4).unwrap();

            let av = ac_value(&p, &x, &lam, c, &plugins).unwrap();
            let lv = lc_value(&p, &x, &lam, &params).unwrap();
            assert_relative_eq!(av, lv, epsilon = 1e-10, max_relative = 1e-10);

            let agx = ac_grad_x(&p, &x, &lam, c, &plugins).unwrap();
            let lgx = lc_grad_x(&p, &x, &lam, &params).unwrap();
            assert!((agx - &lgx).amax() <= 1e-9 * (1.0 + lgx.amax()));

            let agl = ac_grad_lambda(&p, &x, &lam, c, &plugins).unwrap();
            let lgl = lc_grad_lambda(&p, &x, &lam, &params).unwrap();
            assert!((&agl - &lgl).norm() <= 1e-9 * (1.0 + lgl.norm()));
        }
    }

    #[test]
    fn feasible_value_bounded_by_objective() {
        // With γ = 0, A_c(x, Λ) ≤ f(x) at feasible x for any Λ and c.
        let p = NollProblem;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            // feasible region of the Noll block: |x₁ − 1| and |x₂| small
            let x = nalgebra::DVector::from_vec(vec![
                1.0 + rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ]);
            let lam = random_sym(3, &mut rng);
            let c: f64 = rng.random_range(0.2..100.0);
            let v = ac_value(&p, &x, &lam, c, &ClassicalPlugins).unwrap();
            assert!(v <= p.eval_f(&x) + 1e-10);
        }
    }

    #[test]
    fn rejects_nonpositive_penalty() {
        let p = NollProblem;
        let x = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
        let l = SymMat::zeros(3);
        assert!(ac_value(&p, &x, &l, 0.0, &ClassicalPlugins).is_err());
        assert!(ac_grad_x(&p, &x, &l, -1.0, &ClassicalPlugins).is_err());
    }
}
