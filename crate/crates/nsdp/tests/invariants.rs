//! Cross-module invariants: finite-difference consistency of every analytic
//! gradient (including the second-order constraint terms exercised by a
//! non-affine problem), operator self-adjointness and definiteness, and the
//! spectral-function derivative identities.

mod common;

use common::{random_correlation_matrix, random_sym, random_vec};
use nalgebra::{DMatrix, DVector};
use nsdp::framework::phi;
use nsdp::gradcheck::{central_diff_sym, central_diff_vec, check_constraint_derivatives};
use nsdp::merit::{lc_grad_lambda, lc_grad_x, lc_value, n_assemble, MeritParams};
use nsdp::problem::{adjoint_grad_g, NsdpProblem};
use nsdp::problems::{random_correlation_target, CorrelationProblem, NollProblem};
use nsdp::SymMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err_vec(fd: &DVector<f64>, analytic: &DVector<f64>) -> f64 {
    (fd - analytic).norm() / (1.0 + analytic.norm())
}

fn rel_err_sym(fd: &SymMat<f64>, analytic: &SymMat<f64>) -> f64 {
    (fd - analytic).norm() / (1.0 + analytic.norm())
}

/// FD consistency of both merit gradients at fixed penalties, on a problem.
fn merit_gradients_match_fd(p: &dyn NsdpProblem<f64>, points: usize, seed: u64, tol: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.num_vars();
    let m = p.constraint_dim();
    let h = 1e-6;
    for c in [1.0, 50.0, 1000.0] {
        let params = MeritParams::new(c, 1.0, 1e-4).unwrap();
        for _ in 0..points {
            let x = random_vec(n, &mut rng);
            let lambda = SymMat::from_fn(m, |_, _| rng.random_range(-1.0..1.0));

            let analytic = lc_grad_x(p, &x, &lambda, &params).unwrap();
            let fd = central_diff_vec(|xx| lc_value(p, xx, &lambda, &params), &x, h).unwrap();
            let rel = rel_err_vec(&fd, &analytic);
            assert!(rel < tol, "grad_x rel err {rel} at c={c}");

            let analytic = lc_grad_lambda(p, &x, &lambda, &params).unwrap();
            let fd = central_diff_sym(|ll| lc_value(p, &x, ll, &params), &lambda, h).unwrap();
            let rel = rel_err_sym(&fd, &analytic);
            assert!(rel < tol, "grad_lambda rel err {rel} at c={c}");
        }
    }
}

#[test]
fn merit_gradients_match_fd_on_noll() {
    merit_gradients_match_fd(&NollProblem, 34, 101, 1e-5);
}

#[test]
fn merit_gradients_match_fd_on_correlation() {
    let h = random_correlation_target::<f64>(4, 7).unwrap();
    let p = CorrelationProblem::new(h).unwrap();
    merit_gradients_match_fd(&p, 34, 102, 1e-5);
}

/// Two variables, 2×2 constraint, quadratic in `x`: exercises the
/// second-derivative terms of the merit gradient that affine problems skip.
struct QuadraticBlock;

impl NsdpProblem<f64> for QuadraticBlock {
    fn num_vars(&self) -> usize {
        2
    }

    fn constraint_dim(&self) -> usize {
        2
    }

    fn eval_f(&self, x: &DVector<f64>) -> f64 {
        0.25 * (x[0].powi(4) + x[1].powi(4)) + x[0] * x[1]
    }

    fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![x[0].powi(3) + x[1], x[1].powi(3) + x[0]])
    }

    fn hess_f(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[3.0 * x[0] * x[0], 1.0, 1.0, 3.0 * x[1] * x[1]])
    }

    fn eval_g(&self, x: &DVector<f64>) -> SymMat<f64> {
        SymMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => 1.0 + x[0] * x[0],
            (1, 1) => 1.0 + x[1] * x[1],
            _ => x[0] * x[1] - 0.3,
        })
    }

    fn dg(&self, x: &DVector<f64>, i: usize) -> SymMat<f64> {
        let mut d = SymMat::zeros(2);
        match i {
            0 => {
                d.set(0, 0, 2.0 * x[0]);
                d.set(0, 1, x[1]);
            }
            1 => {
                d.set(1, 1, 2.0 * x[1]);
                d.set(0, 1, x[0]);
            }
            _ => unreachable!(),
        }
        d
    }

    fn d2g(&self, _x: &DVector<f64>, i: usize, j: usize) -> SymMat<f64> {
        let mut d = SymMat::zeros(2);
        match (i, j) {
            (0, 0) => d.set(0, 0, 2.0),
            (1, 1) => d.set(1, 1, 2.0),
            _ => d.set(0, 1, 1.0),
        }
        d
    }
}

#[test]
fn nonaffine_problem_derivatives_are_consistent() {
    let max_rel = check_constraint_derivatives(&QuadraticBlock, 30, 1e-6, 11).unwrap();
    assert!(max_rel < 1e-6, "constraint derivative rel err {max_rel}");
    merit_gradients_match_fd(&QuadraticBlock, 25, 103, 1e-5);
}

#[test]
fn residual_gradient_matches_spectral_identity() {
    // ψ(x) = ‖P(−G(x))‖² has gradient −2 ∇G* P(−G(x)).
    let p = NollProblem;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let x = random_vec(2, &mut rng);
        let analytic = {
            let proj = (-&NsdpProblem::<f64>::eval_g(&p, &x))
                .psd_project()
                .unwrap();
            adjoint_grad_g(&p, &x, &proj) * -2.0
        };
        let fd = central_diff_vec(
            |xx| {
                let proj = (-&NsdpProblem::<f64>::eval_g(&p, xx)).psd_project()?;
                Ok(proj.inner(&proj))
            },
            &x,
            1e-6,
        )
        .unwrap();
        assert!(rel_err_vec(&fd, &analytic) < 1e-5);
    }
}

#[test]
fn phi_gradients_match_fd_in_both_arguments() {
    // ∇_Y φ = −2 P(Z/2 − Y) and ∇_Z φ = P(Z/2 − Y) − Z/2.
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..30 {
        let m = rng.random_range(2..5);
        let y = random_sym(m, &mut rng);
        let z = random_sym(m, &mut rng);
        let proj = (&z.scaled(0.5) - &y).psd_project().unwrap();

        let analytic_y = proj.scaled(-2.0);
        let fd_y = central_diff_sym(|yy| phi(yy, &z), &y, 1e-6).unwrap();
        assert!(rel_err_sym(&fd_y, &analytic_y) < 1e-5);

        let analytic_z = &proj - &z.scaled(0.5);
        let fd_z = central_diff_sym(|zz| phi(&y, zz), &z, 1e-6).unwrap();
        assert!(rel_err_sym(&fd_z, &analytic_z) < 1e-5);
    }
}

#[test]
fn n_operator_positive_definite_at_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params = MeritParams::new(1.0, 1.0, 1e-4).unwrap();
    for _ in 0..100 {
        let m = rng.random_range(3..6);
        let feasible = random_correlation_matrix(m, &mut rng);
        let p = CorrelationProblem::new(SymMat::identity(m)).unwrap();
        let x = p.pack(&feasible);
        let op = n_assemble(&p, &x, &params).unwrap();
        let min_eig = SymMat::try_from_dense(op.matrix(), 1e-10)
            .unwrap()
            .min_eigenvalue()
            .unwrap();
        assert!(min_eig > 0.0, "min eigenvalue {min_eig} at m={m}");
    }
}
