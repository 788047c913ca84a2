//! The exact augmented Lagrangian: feasibility residual, the regularizing
//! operator `N(x)`, the multiplier estimate, the complementarity measure
//! `Y_c`, the merit value `L_c`, and both analytic gradients in the form that
//! never solves for the multiplier estimate.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::problem::{adjoint_grad_g, apply_grad_g, NsdpProblem};
use crate::scalar::Scalar;
use crate::symcore::{tri_len, SVec, SymMat};

/// Parameters of the merit function: the penalty `c` and the two regularizer
/// weights. All three must be positive and finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeritParams<T: Scalar> {
    c: T,
    zeta1: T,
    zeta2: T,
}

impl<T: Scalar> MeritParams<T> {
    /// Validates and builds the parameter set.
    pub fn new(c: T, zeta1: T, zeta2: T) -> Result<Self, Error> {
        for (name, v) in [("c", c), ("zeta1", zeta1), ("zeta2", zeta2)] {
            if !(v.finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {:?}",
                    v.to_f64()
                )));
            }
        }
        Ok(MeritParams { c, zeta1, zeta2 })
    }

    /// Penalty parameter.
    pub fn c(&self) -> T {
        self.c
    }

    /// Weight of the Jordan-operator term in `N(x)`.
    pub fn zeta1(&self) -> T {
        self.zeta1
    }

    /// Weight of the residual-scaled identity term in `N(x)`.
    pub fn zeta2(&self) -> T {
        self.zeta2
    }

    /// Same regularizer weights with a different penalty.
    pub fn with_c(&self, c: T) -> Result<Self, Error> {
        Self::new(c, self.zeta1, self.zeta2)
    }
}

fn adjoint_from_partials<T: Scalar>(dgs: &[SymMat<T>], v: &SymMat<T>) -> DVector<T> {
    DVector::from_fn(dgs.len(), |i, _| dgs[i].inner(v))
}

fn apply_from_partials<T: Scalar>(dgs: &[SymMat<T>], w: &DVector<T>, m: usize) -> SymMat<T> {
    let mut out = SymMat::zeros(m);
    for (i, dg) in dgs.iter().enumerate() {
        out.axpy(w[i], dg);
    }
    out
}

/// Feasibility residual `r(x) = ½ ‖P(−G(x))‖²`; zero exactly at feasible
/// points.
pub fn residual<T: Scalar>(p: &dyn NsdpProblem<T>, x: &DVector<T>) -> Result<T, Error> {
    let proj = (-&p.eval_g(x)).psd_project()?;
    Ok(T::of(0.5) * proj.inner(&proj))
}

/// Gradient of the residual: `∇r(x) = −∇G(x)* P(−G(x))`.
pub fn grad_residual<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
) -> Result<DVector<T>, Error> {
    let proj = (-&p.eval_g(x)).psd_project()?;
    Ok(-adjoint_grad_g(p, x, &proj))
}

/// Scaled complementarity-and-feasibility measure
/// `Y_c(x, Λ) = P(Λ/c − G(x)) − Λ/c`.
///
/// Its Frobenius norm vanishes exactly when `G(x)` and `Λ` are both PSD and
/// complementary; the solver uses it as the penalty-update trigger.
pub fn y_c<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<SymMat<T>, Error> {
    let lam_over_c = lambda.scaled(T::one() / params.c());
    let shifted = &lam_over_c - &p.eval_g(x);
    Ok(&shifted.psd_project()? - &lam_over_c)
}

/// The operator `N(x) = ∇G(x)∇G(x)* + ζ₁² L²_{G(x)} + ζ₂² r(x) I`, assembled
/// as a dense matrix over orthonormal (svec) coordinates and factored once.
///
/// `N(x)` is self-adjoint, and positive definite whenever the constraint is
/// nondegenerate at `x`; assembly fails with
/// [`Error::NotPositiveDefinite`] otherwise.
pub struct NOperator<T: Scalar> {
    mat: DMatrix<T>,
    chol: nalgebra::Cholesky<T, nalgebra::Dyn>,
    mat_dim: usize,
}

impl<T: Scalar> NOperator<T> {
    /// Dimension `m` of the symmetric matrices the operator acts on.
    pub fn mat_dim(&self) -> usize {
        self.mat_dim
    }

    /// Dimension `d = m(m+1)/2` of the coordinate space.
    pub fn coord_dim(&self) -> usize {
        self.mat.nrows()
    }

    /// The assembled coordinate matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.mat
    }

    /// Applies the operator through the assembled matrix.
    pub fn apply(&self, z: &SymMat<T>) -> SymMat<T> {
        assert_eq!(
            z.dim(),
            self.mat_dim,
            "operator application dimension mismatch"
        );
        let coords = &self.mat * z.svec().coords();
        SVec::from_coords(&coords)
            .expect("coordinate dimension preserved")
            .to_symmat()
    }

    /// Solves `N(x) W = rhs` through the cached Cholesky factor.
    pub fn solve(&self, rhs: &SymMat<T>) -> SymMat<T> {
        assert_eq!(rhs.dim(), self.mat_dim, "operator solve dimension mismatch");
        let coords = self.chol.solve(&rhs.svec().coords());
        SVec::from_coords(&coords)
            .expect("coordinate dimension preserved")
            .to_symmat()
    }
}

/// Assembles and factors `N(x)`; see [`NOperator`].
pub fn n_assemble<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    params: &MeritParams<T>,
) -> Result<NOperator<T>, Error> {
    let m = p.constraint_dim();
    let n = p.num_vars();
    let d = tri_len(m);
    let g = p.eval_g(x);
    let r = residual(p, x)?;

    let mut b = DMatrix::<T>::zeros(d, n);
    for i in 0..n {
        b.set_column(i, &p.dg(x, i).svec().coords());
    }
    let mut mat = &b * b.transpose();

    // Matrix of L_G in the same coordinates, one basis element at a time.
    let mut ml = DMatrix::<T>::zeros(d, d);
    for k in 0..d {
        let mut e = DVector::zeros(d);
        e[k] = T::one();
        let basis = SVec::from_coords(&e).expect("d is triangular").to_symmat();
        ml.set_column(k, &g.jordan(&basis).svec().coords());
    }
    let z1 = params.zeta1();
    let z2 = params.zeta2();
    mat += &ml * &ml * (z1 * z1);
    for k in 0..d {
        mat[(k, k)] += z2 * z2 * r;
    }

    let chol = nalgebra::Cholesky::new(mat.clone()).ok_or(Error::NotPositiveDefinite)?;
    Ok(NOperator {
        mat,
        chol,
        mat_dim: m,
    })
}

/// Applies `N(x)` to `z` directly from its definition, without assembling the
/// coordinate matrix: `∇G(∇G* z) + ζ₁² G∘(G∘z) + ζ₂² r(x) z`.
pub fn n_apply_direct<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    z: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<SymMat<T>, Error> {
    let g = p.eval_g(x);
    let r = residual(p, x)?;
    let z1 = params.zeta1();
    let z2 = params.zeta2();
    let mut out = apply_grad_g(p, x, &adjoint_grad_g(p, x, z));
    out.axpy(z1 * z1, &g.jordan(&g.jordan(z)));
    out.axpy(z2 * z2 * r, z);
    Ok(out)
}

/// The multiplier estimate `Λ(x) = N(x)⁻¹ ∇G(x) ∇f(x)`, the unique minimizer
/// of the regularized least-squares multiplier problem. At a KKT pair it
/// recovers the exact multiplier.
pub fn multiplier_estimate<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    params: &MeritParams<T>,
) -> Result<SymMat<T>, Error> {
    let op = n_assemble(p, x, params)?;
    let rhs = apply_grad_g(p, x, &p.grad_f(x));
    Ok(op.solve(&rhs))
}

/// Shared sub-expressions of the merit value and its gradients at one point
/// `(x, Λ)`: the constraint value, its partials, the feasibility projection,
/// and the estimate-free difference `N(x)(Λ(x) − Λ)`.
struct MeritPieces<T: Scalar> {
    g: SymMat<T>,
    dgs: Vec<SymMat<T>>,
    proj_neg_g: SymMat<T>,
    r: T,
    grad_xl: DVector<T>,
    g_jordan_lambda: SymMat<T>,
    nld: SymMat<T>,
}

impl<T: Scalar> MeritPieces<T> {
    fn new(
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        grad_f: &DVector<T>,
        zeta1: T,
        zeta2: T,
    ) -> Result<Self, Error> {
        assert_eq!(
            lambda.dim(),
            p.constraint_dim(),
            "multiplier dimension mismatch"
        );
        let n = p.num_vars();
        let g = p.eval_g(x);
        let dgs: Vec<SymMat<T>> = (0..n).map(|i| p.dg(x, i)).collect();
        let proj_neg_g = (-&g).psd_project()?;
        let r = T::of(0.5) * proj_neg_g.inner(&proj_neg_g);
        let grad_xl = grad_f - adjoint_from_partials(&dgs, lambda);

        // N(x)(Λ(x) − Λ) = ∇G ∇_x L(x,Λ) − ζ₁² L²_G(Λ) − ζ₂² r(x) Λ,
        // which needs no linear solve.
        let g_jordan_lambda = g.jordan(lambda);
        let mut nld = apply_from_partials(&dgs, &grad_xl, g.dim());
        nld.axpy(-zeta1 * zeta1, &g.jordan(&g_jordan_lambda));
        nld.axpy(-zeta2 * zeta2 * r, lambda);

        Ok(MeritPieces {
            g,
            dgs,
            proj_neg_g,
            r,
            grad_xl,
            g_jordan_lambda,
            nld,
        })
    }

    /// `∇_x ‖N(x)(Λ(x) − Λ)‖²`: the chain rule through the x-dependence of
    /// the estimate-free difference.
    fn quad_grad_x(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        zeta1: T,
        zeta2: T,
    ) -> DVector<T> {
        let n = p.num_vars();
        let two = T::of(2.0);

        let adj_nld = adjoint_from_partials(&self.dgs, &self.nld);
        let mut hess_l = p.hess_f(x);
        if !p.constraint_is_affine() {
            for i in 0..n {
                for j in 0..n {
                    hess_l[(i, j)] -= p.d2g(x, i, j).inner(lambda);
                }
            }
        }
        let mut out = (hess_l * &adj_nld) * two;

        if !p.constraint_is_affine() {
            let weights = DMatrix::from_fn(n, n, |i, j| p.d2g(x, i, j).inner(&self.nld));
            out += (weights * &self.grad_xl) * two;
        }

        for i in 0..n {
            let term = self.dgs[i].jordan(&self.g_jordan_lambda).inner(&self.nld)
                + self.g.jordan(&self.dgs[i].jordan(lambda)).inner(&self.nld);
            out[i] -= two * zeta1 * zeta1 * term;
        }

        let grad_r = -adjoint_from_partials(&self.dgs, &self.proj_neg_g);
        out - grad_r * (two * zeta2 * zeta2 * lambda.inner(&self.nld))
    }

    /// `∇_Λ ‖N(x)(Λ(x) − Λ)‖² = −2 N(x)(N(x)(Λ(x) − Λ))`, one direct operator
    /// application on the cached difference.
    fn quad_grad_lambda(&self, zeta1: T, zeta2: T) -> SymMat<T> {
        let mut napplied = apply_from_partials(
            &self.dgs,
            &adjoint_from_partials(&self.dgs, &self.nld),
            self.g.dim(),
        );
        napplied.axpy(zeta1 * zeta1, &self.g.jordan(&self.g.jordan(&self.nld)));
        napplied.axpy(zeta2 * zeta2 * self.r, &self.nld);
        napplied.scale_mut(-T::of(2.0));
        napplied
    }
}

/// Value of the multiplier-tracking term `γ(x, Λ) = ‖N(x)(Λ(x) − Λ)‖²` and
/// its gradients, shared with the generalized-merit plugins.
pub(crate) struct GammaTerm<T: Scalar>(MeritPieces<T>);

impl<T: Scalar> GammaTerm<T> {
    pub(crate) fn new(
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        zeta1: T,
        zeta2: T,
    ) -> Result<Self, Error> {
        Ok(GammaTerm(MeritPieces::new(
            p,
            x,
            lambda,
            &p.grad_f(x),
            zeta1,
            zeta2,
        )?))
    }

    pub(crate) fn value(&self) -> T {
        self.0.nld.inner(&self.0.nld)
    }

    pub(crate) fn grad_x(
        &self,
        p: &dyn NsdpProblem<T>,
        x: &DVector<T>,
        lambda: &SymMat<T>,
        zeta1: T,
        zeta2: T,
    ) -> DVector<T> {
        self.0.quad_grad_x(p, x, lambda, zeta1, zeta2)
    }

    pub(crate) fn grad_lambda(&self, zeta1: T, zeta2: T) -> SymMat<T> {
        self.0.quad_grad_lambda(zeta1, zeta2)
    }
}

/// The estimate-free difference `N(x)(Λ(x) − Λ)`, computed without forming
/// the multiplier estimate or solving any linear system.
pub fn n_lambda_diff<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<SymMat<T>, Error> {
    let pieces = MeritPieces::new(p, x, lambda, &p.grad_f(x), params.zeta1(), params.zeta2())?;
    Ok(pieces.nld)
}

/// One evaluation of the merit function at `(x, Λ)`: the value is computed on
/// construction, the gradients on demand from the cached sub-expressions.
///
/// The merit function is
/// `L_c(x, Λ) = f(x) + (1/2c)(‖P(Λ − cG(x))‖² − ‖Λ‖²) + ‖N(x)(Λ(x) − Λ)‖²`.
pub struct LcEvaluation<'p, T: Scalar> {
    p: &'p dyn NsdpProblem<T>,
    params: MeritParams<T>,
    x: DVector<T>,
    lambda: SymMat<T>,
    f: T,
    pieces: MeritPieces<T>,
    y_c: SymMat<T>,
    value: T,
}

impl<'p, T: Scalar> LcEvaluation<'p, T> {
    /// Evaluates `L_c` and caches everything its gradients reuse.
    pub fn new(
        p: &'p dyn NsdpProblem<T>,
        x: DVector<T>,
        lambda: SymMat<T>,
        params: &MeritParams<T>,
    ) -> Result<Self, Error> {
        assert_eq!(x.len(), p.num_vars(), "point dimension mismatch");
        let c = params.c();
        let f = p.eval_f(&x);
        let grad_f = p.grad_f(&x);
        let pieces = MeritPieces::new(p, &x, &lambda, &grad_f, params.zeta1(), params.zeta2())?;

        // P(Λ − cG) = c P(Λ/c − G); one projection serves both the penalty
        // term and Y_c.
        let lam_over_c = lambda.scaled(T::one() / c);
        let proj_scaled = (&lam_over_c - &pieces.g).psd_project()?;
        let y_c = &proj_scaled - &lam_over_c;

        let half_c = T::of(0.5) * c;
        let penalty = half_c * (proj_scaled.inner(&proj_scaled) - lam_over_c.inner(&lam_over_c));
        let value = f + penalty + pieces.nld.inner(&pieces.nld);

        Ok(LcEvaluation {
            p,
            params: *params,
            x,
            lambda,
            f,
            pieces,
            y_c,
            value,
        })
    }

    /// Merit value `L_c(x, Λ)`.
    pub fn value(&self) -> T {
        self.value
    }

    /// Objective value `f(x)`.
    pub fn objective(&self) -> T {
        self.f
    }

    /// Feasibility residual `r(x)`.
    pub fn residual(&self) -> T {
        self.pieces.r
    }

    /// The measure `Y_c(x, Λ)`.
    pub fn y_c(&self) -> &SymMat<T> {
        &self.y_c
    }

    /// `‖Y_c(x, Λ)‖_F`, the penalty-update trigger.
    pub fn y_norm(&self) -> T {
        self.y_c.norm()
    }

    /// Gradient of the residual at `x`, from cached pieces.
    pub fn grad_residual(&self) -> DVector<T> {
        -adjoint_from_partials(&self.pieces.dgs, &self.pieces.proj_neg_g)
    }

    /// KKT residual of the pair; see [`kkt_residual`].
    pub fn kkt_residual(&self) -> Result<T, Error> {
        let fixed_point_gap = {
            let shifted = &self.lambda - &self.pieces.g;
            (&self.lambda - &shifted.psd_project()?).norm()
        };
        Ok(self.pieces.grad_xl.amax().max(fixed_point_gap))
    }

    /// `∇_x L_c(x, Λ)`: the Lagrangian gradient, the penalty pull-back
    /// `−c ∇G* Y_c`, and the chain rule through `‖N(x)(Λ(x) − Λ)‖²`.
    pub fn grad_x(&self) -> DVector<T> {
        let c = self.params.c();
        let mut out = self.pieces.grad_xl.clone();
        out -= adjoint_from_partials(&self.pieces.dgs, &self.y_c) * c;
        out += self.pieces.quad_grad_x(
            self.p,
            &self.x,
            &self.lambda,
            self.params.zeta1(),
            self.params.zeta2(),
        );
        out
    }

    /// `∇_Λ L_c(x, Λ) = Y_c(x, Λ) − 2 N(x)²(Λ(x) − Λ)`.
    pub fn grad_lambda(&self) -> SymMat<T> {
        let mut out = self.y_c.clone();
        out.axpy(
            T::one(),
            &self
                .pieces
                .quad_grad_lambda(self.params.zeta1(), self.params.zeta2()),
        );
        out
    }
}

/// Merit value `L_c(x, Λ)`.
pub fn lc_value<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<T, Error> {
    Ok(LcEvaluation::new(p, x.clone(), lambda.clone(), params)?.value())
}

/// Gradient of the merit with respect to `x`.
pub fn lc_grad_x<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<DVector<T>, Error> {
    Ok(LcEvaluation::new(p, x.clone(), lambda.clone(), params)?.grad_x())
}

/// Gradient of the merit with respect to `Λ`.
pub fn lc_grad_lambda<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
    params: &MeritParams<T>,
) -> Result<SymMat<T>, Error> {
    Ok(LcEvaluation::new(p, x.clone(), lambda.clone(), params)?.grad_lambda())
}

/// Scalar measure of how far `(x, Λ)` is from satisfying the KKT conditions:
///
/// `max( ‖∇_x L(x, Λ)‖_∞ , ‖Λ − P(Λ − G(x))‖_F )`.
///
/// The fixed-point gap is zero exactly when `G(x)` and `Λ` are both PSD and
/// complementary, so the measure vanishes iff the pair is a KKT pair.
pub fn kkt_residual<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x: &DVector<T>,
    lambda: &SymMat<T>,
) -> Result<T, Error> {
    let grad_xl = crate::problem::grad_lagrangian(p, x, lambda);
    let shifted = lambda - &p.eval_g(x);
    let gap = (lambda - &shifted.psd_project()?).norm();
    Ok(grad_xl.amax().max(gap))
}
