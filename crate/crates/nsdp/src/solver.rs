//! Unconstrained minimization of the merit function over `(x, Λ)` by BFGS
//! with Armijo backtracking, plus the adaptive penalty schedule.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::merit::{multiplier_estimate, LcEvaluation, MeritParams};
use crate::problem::NsdpProblem;
use crate::scalar::Scalar;
use crate::symcore::{tri_len, SVec, SymMat};

/// How the initial penalty is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyInit<T: Scalar> {
    /// Computed from the start point; see [`initial_penalty`].
    Auto,
    /// A fixed value, clamped into `[c_min, c_max]`.
    Fixed(T),
}

/// Initial multiplier choice.
#[derive(Clone, Debug)]
pub enum LambdaStart<T: Scalar> {
    /// Use the multiplier estimate at the start point (the one place the
    /// explicit estimate solve is performed).
    Estimate,
    /// A caller-supplied multiplier.
    Given(SymMat<T>),
}

/// Solver parameters. Defaults follow the reference experiment setup:
/// `τ = 0.9`, `ρ = 1.1`, `c ∈ [0.1, 1000]`, `ζ₁ = 1`, `ζ₂ = 1e-4`,
/// tolerance `1e-5`, at most 5000 iterations.
#[derive(Clone, Debug)]
pub struct SolverConfig<T: Scalar> {
    /// Penalty trigger threshold in (0, 1): increase `c` when the
    /// complementarity measure shrank by less than this factor.
    pub tau: T,
    /// Penalty growth factor, > 1.
    pub rho: T,
    /// Lower clamp for the initial penalty.
    pub c_min: T,
    /// Penalty ceiling.
    pub c_max: T,
    /// Weight of the Jordan-operator term in `N(x)`.
    pub zeta1: T,
    /// Weight of the residual-scaled identity term in `N(x)`.
    pub zeta2: T,
    /// Stopping tolerance on the KKT residual and the merit gradient.
    pub tol: T,
    /// Iteration cap.
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_sigma: T,
    /// Step shrink factor per backtrack, in (0, 1).
    pub backtrack_factor: T,
    /// Smallest admissible line-search step.
    pub min_step: T,
    /// Reset the BFGS matrix when the penalty changes. The curvature pair
    /// spanning the change is always discarded; a full reset additionally
    /// drops the accumulated approximation, which roughly triples the
    /// iteration count on the built-in problems for no observed gain in
    /// robustness, so this is off by default.
    pub reset_bfgs_on_penalty_change: bool,
    /// Initial penalty rule.
    pub c0: PenaltyInit<T>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            tau: T::of(0.9),
            rho: T::of(1.1),
            c_min: T::of(0.1),
            c_max: T::of(1000.0),
            zeta1: T::one(),
            zeta2: T::of(1e-4),
            tol: T::of(1e-5),
            max_iter: 5000,
            armijo_sigma: T::of(1e-4),
            backtrack_factor: T::of(0.5),
            min_step: T::of(1e-16),
            reset_bfgs_on_penalty_change: false,
            c0: PenaltyInit::Auto,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.tau > T::zero() && self.tau < T::one()) {
            return bad("tau must lie in (0, 1)");
        }
        if self.rho <= T::one() {
            return bad("rho must exceed 1");
        }
        if !(self.c_min > T::zero() && self.c_min <= self.c_max) {
            return bad("penalty bounds must satisfy 0 < c_min <= c_max");
        }
        if self.zeta1 <= T::zero() || self.zeta2 <= T::zero() {
            return bad("zeta1 and zeta2 must be positive");
        }
        if self.tol <= T::zero() {
            return bad("tol must be positive");
        }
        if !(self.armijo_sigma > T::zero() && self.armijo_sigma < T::one()) {
            return bad("armijo_sigma must lie in (0, 1)");
        }
        if !(self.backtrack_factor > T::zero() && self.backtrack_factor < T::one()) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if self.min_step <= T::zero() {
            return bad("min_step must be positive");
        }
        if let PenaltyInit::Fixed(c) = self.c0 {
            if !(c.finite() && c > T::zero()) {
                return bad("fixed initial penalty must be positive and finite");
            }
        }
        Ok(())
    }
}

/// Why the solver stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// KKT residual or merit gradient fell below the tolerance.
    Converged,
    /// Iteration cap reached.
    MaxIterations,
    /// No acceptable step, even along steepest descent.
    LineSearchFailure,
    /// The iterate is a stationary point of the feasibility residual that is
    /// not feasible.
    InfeasibleStationary,
}

impl SolveStatus {
    /// Stable textual form, used in reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::LineSearchFailure => "LineSearchFailure",
            SolveStatus::InfeasibleStationary => "InfeasibleStationary",
        }
    }
}

/// One row of the per-iteration trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry<T: Scalar> {
    /// Merit value at the iterate.
    pub lc_value: T,
    /// Max-norm of the merit gradient over `(x, Λ)`.
    pub grad_norm: T,
    /// `‖Y_c‖_F` at the iterate.
    pub y_norm: T,
    /// Penalty in effect during the step.
    pub c: T,
}

/// Result of a solve.
#[derive(Clone, Debug)]
pub struct SolveReport<T: Scalar> {
    /// Why the solver stopped.
    pub status: SolveStatus,
    /// Final primal point.
    pub x_final: DVector<T>,
    /// Final multiplier.
    pub lambda_final: SymMat<T>,
    /// Objective at the final point.
    pub f_final: T,
    /// KKT residual at the final pair.
    pub kkt_residual_final: T,
    /// Accepted BFGS iterations.
    pub iterations: usize,
    /// Evaluations of the problem functions (objective, constraint, and their
    /// gradients are always evaluated together, so one count covers all).
    pub evaluations: usize,
    /// Penalty at the start.
    pub c_initial: T,
    /// Penalty at the end.
    pub c_final: T,
    /// Wall-clock duration of the solve.
    pub wall_time_seconds: f64,
    /// Per-iteration trace, including the initial point.
    pub trace: Vec<TraceEntry<T>>,
}

/// The start-point penalty rule
/// `c₀ = max(c_min, min(c_max, 10 max(1, |f(x⁰)|) / max(1, ½‖G(x⁰)‖²)))`.
pub fn initial_penalty<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    x0: &DVector<T>,
    config: &SolverConfig<T>,
) -> T {
    let f = p.eval_f(x0).abs();
    let g = p.eval_g(x0);
    let half_gnorm2 = T::of(0.5) * g.inner(&g);
    let raw = T::of(10.0) * f.max(T::one()) / half_gnorm2.max(T::one());
    raw.min(config.c_max).max(config.c_min)
}

/// Penalty schedule: grow by `rho` (capped at `c_max`) when the
/// complementarity measure did not shrink by at least the factor `tau`,
/// otherwise keep the penalty.
pub fn update_penalty<T: Scalar>(
    c_prev: T,
    ynorm_now: T,
    ynorm_prev: T,
    config: &SolverConfig<T>,
) -> T {
    if ynorm_now > config.tau * ynorm_prev {
        (config.rho * c_prev).min(config.c_max)
    } else {
        c_prev
    }
}

/// Accepted step of a backtracking line search.
#[derive(Debug)]
pub struct LineSearchOutcome<T: Scalar, P> {
    /// Accepted step length.
    pub step: T,
    /// Merit value at the accepted point.
    pub value: T,
    /// Whatever the merit closure produced at the accepted point.
    pub payload: P,
    /// Number of merit evaluations performed.
    pub trials: usize,
}

/// Armijo backtracking: the largest `t` in `{1, β, β², ...}` with
/// `merit(z + t d) ≤ merit(z) + σ t (g·d)`.
///
/// The direction must point downhill (`g·d < 0`); a non-descent direction is
/// a contract violation and reports [`Error::LineSearchFailed`] immediately,
/// so callers reset to steepest descent first. Evaluation errors at a trial
/// point (e.g. overflow far along the ray) reject that trial and
/// backtracking continues.
pub fn armijo_search<T, P, F>(
    mut merit: F,
    z: &DVector<T>,
    direction: &DVector<T>,
    grad: &DVector<T>,
    value_at_z: T,
    config: &SolverConfig<T>,
) -> Result<LineSearchOutcome<T, P>, Error>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> Result<(T, P), Error>,
{
    let slope = grad.dot(direction);
    // Also trips on NaN slopes, not just nonnegative ones.
    if !matches!(
        slope.partial_cmp(&T::zero()),
        Some(std::cmp::Ordering::Less)
    ) {
        return Err(Error::LineSearchFailed);
    }
    let mut t = T::one();
    let mut trials = 0;
    while t >= config.min_step {
        let trial = z + direction * t;
        trials += 1;
        if let Ok((value, payload)) = merit(&trial) {
            if value.finite() && value <= value_at_z + config.armijo_sigma * t * slope {
                return Ok(LineSearchOutcome {
                    step: t,
                    value,
                    payload,
                    trials,
                });
            }
        }
        t *= config.backtrack_factor;
    }
    Err(Error::LineSearchFailed)
}

fn pack_point<T: Scalar>(x: &DVector<T>, lambda: &SymMat<T>) -> DVector<T> {
    let coords = lambda.svec().coords();
    let mut z = DVector::zeros(x.len() + coords.len());
    z.rows_mut(0, x.len()).copy_from(x);
    z.rows_mut(x.len(), coords.len()).copy_from(&coords);
    z
}

fn unpack_point<T: Scalar>(z: &DVector<T>, n: usize) -> (DVector<T>, SymMat<T>) {
    let x = z.rows(0, n).into_owned();
    let coords = z.rows(n, z.len() - n).into_owned();
    let lambda = SVec::from_coords(&coords)
        .expect("lambda block is triangular")
        .to_symmat();
    (x, lambda)
}

fn pack_gradient<T: Scalar>(eval: &LcEvaluation<'_, T>, n: usize, d: usize) -> DVector<T> {
    let gx = eval.grad_x();
    let gl = eval.grad_lambda().svec().coords();
    let mut g = DVector::zeros(n + d);
    g.rows_mut(0, n).copy_from(&gx);
    g.rows_mut(n, d).copy_from(&gl);
    g
}

/// Applies the inverse-BFGS update to `h` with the pair `(s, y)`.
/// Skipped when the curvature `sᵀy` is not safely positive.
fn bfgs_update<T: Scalar>(h: &mut DMatrix<T>, s: &DVector<T>, y: &DVector<T>, fresh: bool) {
    let sy = s.dot(y);
    if sy <= T::of(1e-10) * s.norm() * y.norm() {
        return;
    }
    if fresh {
        // Scale a freshly reset matrix to the curvature of the first pair.
        let yy = y.dot(y);
        if yy > T::zero() {
            *h *= sy / yy;
        }
    }
    let hy = &*h * y;
    let yhy = y.dot(&hy);
    let coeff = (sy + yhy) / (sy * sy);
    let dim = h.nrows();
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] += coeff * s[i] * s[j] - (s[i] * hy[j] + hy[i] * s[j]) / sy;
        }
    }
}

/// Termination test at an iterate. A KKT residual within tolerance converges.
/// A vanishing merit gradient alone only stops the run in the
/// infeasible-stationary alternative; otherwise iteration continues until the
/// KKT residual itself is within tolerance, so a reported convergence always
/// carries a certified pair.
fn stop_status<T: Scalar>(
    eval: &LcEvaluation<'_, T>,
    grad: &DVector<T>,
    kkt: T,
    config: &SolverConfig<T>,
) -> Option<SolveStatus> {
    if kkt <= config.tol {
        return Some(SolveStatus::Converged);
    }
    if grad.amax() <= config.tol
        && eval.residual() > config.tol
        && eval.grad_residual().norm() <= config.tol
    {
        return Some(SolveStatus::InfeasibleStationary);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn build_report<T: Scalar>(
    status: SolveStatus,
    f_final: T,
    kkt: T,
    iterations: usize,
    evaluations: usize,
    c_initial: T,
    c_final: T,
    wall_time_seconds: f64,
    trace: Vec<TraceEntry<T>>,
    z: &DVector<T>,
    n: usize,
) -> SolveReport<T> {
    let (x_final, lambda_final) = unpack_point(z, n);
    SolveReport {
        status,
        x_final,
        lambda_final,
        f_final,
        kkt_residual_final: kkt,
        iterations,
        evaluations,
        c_initial,
        c_final,
        wall_time_seconds,
        trace,
    }
}

/// Minimizes the merit function over `(x, Λ)`.
///
/// The iterate lives in `ℝ^{n + m(m+1)/2}` as `(x, svec(Λ))`. After every
/// accepted step the penalty schedule runs; when the penalty changes the
/// merit is re-evaluated with the new penalty and the curvature pair spanning
/// the change is discarded. Termination follows [`stop_status`]: `Converged`
/// certifies `kkt_residual <= tol`, while a vanishing merit gradient at an
/// infeasible stationary point of the residual reports
/// `InfeasibleStationary`.
///
/// Iteration failures are reported through [`SolveReport::status`]; `Err` is
/// reserved for invalid inputs and a failed initial evaluation.
pub fn solve<'p, T: Scalar>(
    p: &'p dyn NsdpProblem<T>,
    x0: &DVector<T>,
    lambda0: LambdaStart<T>,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, Error> {
    config.validate()?;
    let n = p.num_vars();
    let m = p.constraint_dim();
    let d = tri_len(m);
    if x0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "start point has {} entries, problem has {n} variables",
            x0.len()
        )));
    }
    if !x0.iter().all(|v| v.finite()) {
        return Err(Error::NonFinite("start point"));
    }

    let started = Instant::now();
    let c0 = match config.c0 {
        PenaltyInit::Auto => initial_penalty(p, x0, config),
        PenaltyInit::Fixed(c) => c.min(config.c_max).max(config.c_min),
    };
    let mut params = MeritParams::new(c0, config.zeta1, config.zeta2)?;
    let mut evaluations = 0usize;

    let lambda0 = match lambda0 {
        LambdaStart::Estimate => {
            evaluations += 1;
            multiplier_estimate(p, x0, &params)?
        }
        LambdaStart::Given(l) => {
            if l.dim() != m {
                return Err(Error::InvalidParameter(format!(
                    "initial multiplier is {}x{}, constraint is {m}x{m}",
                    l.dim(),
                    l.dim()
                )));
            }
            l
        }
    };

    let mut z = pack_point(x0, &lambda0);
    let mut eval = LcEvaluation::new(p, x0.clone(), lambda0, &params)?;
    evaluations += 1;
    let mut grad = pack_gradient(&eval, n, d);
    let mut value = eval.value();
    let mut ynorm_prev = eval.y_norm();
    let mut c = c0;
    let mut iterations = 0usize;

    let mut trace = vec![TraceEntry {
        lc_value: value,
        grad_norm: grad.amax(),
        y_norm: ynorm_prev,
        c,
    }];

    // Entry check: the start may already be a KKT pair.
    let kkt = eval.kkt_residual()?;
    if let Some(status) = stop_status(&eval, &grad, kkt, config) {
        return Ok(build_report(
            status,
            eval.objective(),
            kkt,
            0,
            evaluations,
            c0,
            c,
            started.elapsed().as_secs_f64(),
            trace,
            &z,
            n,
        ));
    }

    let mut h = DMatrix::<T>::identity(n + d, n + d);
    let mut h_fresh = true;

    while iterations < config.max_iter {
        let mut direction = -(&h * &grad);
        let mut steepest = false;
        if direction.dot(&grad) >= T::zero() {
            h = DMatrix::identity(n + d, n + d);
            h_fresh = true;
            direction = -grad.clone();
            steepest = true;
        }

        let search = |zt: &DVector<T>| -> Result<(T, LcEvaluation<'p, T>), Error> {
            let (x_t, lambda_t) = unpack_point(zt, n);
            let e = LcEvaluation::new(p, x_t, lambda_t, &params)?;
            Ok((e.value(), e))
        };
        let counted = &mut evaluations;
        let outcome = armijo_search(
            |zt| {
                *counted += 1;
                search(zt)
            },
            &z,
            &direction,
            &grad,
            value,
            config,
        );

        let outcome = match outcome {
            Ok(o) => o,
            Err(Error::LineSearchFailed) if !steepest => {
                // Retry once along steepest descent before giving up.
                h = DMatrix::identity(n + d, n + d);
                h_fresh = true;
                direction = -grad.clone();
                let counted = &mut evaluations;
                let retried = armijo_search(
                    |zt| {
                        *counted += 1;
                        search(zt)
                    },
                    &z,
                    &direction,
                    &grad,
                    value,
                    config,
                );
                match retried {
                    Ok(o) => o,
                    Err(_) => {
                        let kkt = eval.kkt_residual()?;
                        return Ok(build_report(
                            SolveStatus::LineSearchFailure,
                            eval.objective(),
                            kkt,
                            iterations,
                            evaluations,
                            c0,
                            c,
                            started.elapsed().as_secs_f64(),
                            trace,
                            &z,
                            n,
                        ));
                    }
                }
            }
            Err(_) => {
                let kkt = eval.kkt_residual()?;
                return Ok(build_report(
                    SolveStatus::LineSearchFailure,
                    eval.objective(),
                    kkt,
                    iterations,
                    evaluations,
                    c0,
                    c,
                    started.elapsed().as_secs_f64(),
                    trace,
                    &z,
                    n,
                ));
            }
        };

        let z_new = &z + &direction * outcome.step;
        let mut eval_new = outcome.payload;
        let mut value_new = outcome.value;
        let mut grad_new = pack_gradient(&eval_new, n, d);
        iterations += 1;

        let ynorm_now = eval_new.y_norm();
        trace.push(TraceEntry {
            lc_value: value_new,
            grad_norm: grad_new.amax(),
            y_norm: ynorm_now,
            c,
        });

        // Stopping tests at the new iterate.
        let kkt = eval_new.kkt_residual()?;
        if let Some(status) = stop_status(&eval_new, &grad_new, kkt, config) {
            return Ok(build_report(
                status,
                eval_new.objective(),
                kkt,
                iterations,
                evaluations,
                c0,
                c,
                started.elapsed().as_secs_f64(),
                trace,
                &z_new,
                n,
            ));
        }

        // Penalty schedule, once per accepted step.
        let c_next = update_penalty(c, ynorm_now, ynorm_prev, config);
        ynorm_prev = ynorm_now;
        if c_next != c {
            c = c_next;
            params = params.with_c(c).expect("penalty stays positive");
            let (x_new, lambda_new) = unpack_point(&z_new, n);
            eval_new = LcEvaluation::new(p, x_new, lambda_new, &params)?;
            evaluations += 1;
            value_new = eval_new.value();
            grad_new = pack_gradient(&eval_new, n, d);
            if config.reset_bfgs_on_penalty_change {
                h = DMatrix::identity(n + d, n + d);
                h_fresh = true;
            }
        } else {
            let s = &z_new - &z;
            let y = &grad_new - &grad;
            bfgs_update(&mut h, &s, &y, h_fresh);
            h_fresh = false;
        }

        z = z_new;
        grad = grad_new;
        value = value_new;
        eval = eval_new;
    }

    let kkt = eval.kkt_residual()?;
    Ok(build_report(
        SolveStatus::MaxIterations,
        eval.objective(),
        kkt,
        iterations,
        evaluations,
        c0,
        c,
        started.elapsed().as_secs_f64(),
        trace,
        &z,
        n,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{random_correlation_target, CorrelationProblem, NollProblem};
    use approx::assert_relative_eq;

    #[test]
    fn initial_penalty_cases() {
        let config = SolverConfig::<f64>::default();
        // f(1,0) = −0.5, ‖G‖² = 3: c₀ = 10·1/1.5
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let c0 = initial_penalty(&NollProblem, &x0, &config);
        assert_relative_eq!(c0, 10.0 / 1.5, epsilon = 1e-12);

        // Large objective clamps at c_max.
        struct Big;
        impl NsdpProblem<f64> for Big {
            fn num_vars(&self) -> usize {
                1
            }
            fn constraint_dim(&self) -> usize {
                1
            }
            fn eval_f(&self, _x: &DVector<f64>) -> f64 {
                1e6
            }
            fn grad_f(&self, _x: &DVector<f64>) -> DVector<f64> {
                DVector::zeros(1)
            }
            fn hess_f(&self, _x: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::zeros(1, 1)
            }
            fn eval_g(&self, _x: &DVector<f64>) -> SymMat<f64> {
                SymMat::from_diagonal(&[1e-3])
            }
            fn dg(&self, _x: &DVector<f64>, _i: usize) -> SymMat<f64> {
                SymMat::zeros(1)
            }
        }
        assert_relative_eq!(initial_penalty(&Big, &DVector::zeros(1), &config), 1000.0);

        // Tiny objective with a huge constraint clamps at c_min.
        struct Flat;
        impl NsdpProblem<f64> for Flat {
            fn num_vars(&self) -> usize {
                1
            }
            fn constraint_dim(&self) -> usize {
                1
            }
            fn eval_f(&self, _x: &DVector<f64>) -> f64 {
                0.0
            }
            fn grad_f(&self, _x: &DVector<f64>) -> DVector<f64> {
                DVector::zeros(1)
            }
            fn hess_f(&self, _x: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::zeros(1, 1)
            }
            fn eval_g(&self, _x: &DVector<f64>) -> SymMat<f64> {
                SymMat::from_diagonal(&[1e4])
            }
            fn dg(&self, _x: &DVector<f64>, _i: usize) -> SymMat<f64> {
                SymMat::zeros(1)
            }
        }
        assert_relative_eq!(initial_penalty(&Flat, &DVector::zeros(1), &config), 0.1);
    }

    #[test]
    fn update_penalty_cases() {
        let config = SolverConfig::<f64>::default();
        assert_relative_eq!(update_penalty(100.0, 1.0, 1.0, &config), 110.0);
        assert_relative_eq!(update_penalty(100.0, 0.5, 1.0, &config), 100.0);
        assert_relative_eq!(update_penalty(950.0, 1.0, 1.0, &config), 1000.0);
    }

    #[test]
    fn armijo_accepts_unit_step_on_a_quadratic() {
        let config = SolverConfig::<f64>::default();
        let z = DVector::from_vec(vec![1.0, 0.0]);
        let d = -z.clone();
        let g = z.clone();
        let merit = |v: &DVector<f64>| Ok((0.5 * v.dot(v), ()));
        let out = armijo_search(merit, &z, &d, &g, 0.5, &config).unwrap();
        assert_relative_eq!(out.step, 1.0);
        assert_eq!(out.trials, 1);
    }

    #[test]
    fn armijo_backtracks_over_a_cliff() {
        // Descending ramp with a cliff at −0.3 along the ray: t = 1 and
        // t = 0.5 land past the cliff, t = 0.25 is accepted.
        let config = SolverConfig::<f64>::default();
        let z = DVector::from_vec(vec![0.0]);
        let d = DVector::from_vec(vec![-1.0]);
        let g = DVector::from_vec(vec![1.0]);
        let merit = |v: &DVector<f64>| {
            let x = v[0];
            Ok((if x < -0.3 { x + 100.0 } else { x }, ()))
        };
        let out = armijo_search(merit, &z, &d, &g, 0.0, &config).unwrap();
        assert_relative_eq!(out.step, 0.25);
        assert_eq!(out.trials, 3);
    }

    #[test]
    fn armijo_fails_on_ascent_directions() {
        let config = SolverConfig::<f64>::default();
        let z = DVector::from_vec(vec![1.0]);
        let d = DVector::from_vec(vec![1.0]); // uphill for ½z²
        let g = DVector::from_vec(vec![1.0]);
        let merit = |v: &DVector<f64>| Ok((0.5 * v.dot(v), ()));
        assert_eq!(
            armijo_search(merit, &z, &d, &g, 0.5, &config).unwrap_err(),
            Error::LineSearchFailed
        );
    }

    #[test]
    fn solves_noll_from_the_reference_start() {
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let config = SolverConfig::<f64>::default();
        let report = solve(&NollProblem, &x0, LambdaStart::Estimate, &config).unwrap();
        assert_eq!(report.status, SolveStatus::Converged, "{report:?}");
        assert!(
            (report.f_final + 2.0).abs() <= 1e-4,
            "f = {}",
            report.f_final
        );
        assert!((report.x_final[0] - 2.0).abs() <= 1e-3);
        assert!(report.x_final[1].abs() <= 1e-3);
        assert!(report.kkt_residual_final <= 1e-5);
        assert_relative_eq!(report.c_initial, 10.0 / 1.5, epsilon = 1e-10);
        assert!(report.evaluations >= report.iterations);
    }

    #[test]
    fn kkt_start_terminates_immediately() {
        let xs = NollProblem::optimal_pair::<f64>().x;
        let config = SolverConfig::<f64>::default();
        let report = solve(&NollProblem, &xs, LambdaStart::Estimate, &config).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn descent_between_penalty_changes_and_monotone_penalties() {
        let h = random_correlation_target::<f64>(4, 21).unwrap();
        let p = CorrelationProblem::new(h).unwrap();
        let x0 = p.all_ones_start();
        let config = SolverConfig::<f64>::default();
        let report = solve(&p, &x0, LambdaStart::Estimate, &config).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);

        for w in report.trace.windows(2) {
            assert!(w[1].c >= w[0].c, "penalty must be non-decreasing");
            assert!(w[1].c <= config.c_max);
            if w[1].c == w[0].c {
                assert!(
                    w[1].lc_value <= w[0].lc_value + 1e-12,
                    "merit must not increase while the penalty is constant"
                );
            }
        }
    }

    #[test]
    fn deterministic_given_identical_inputs() {
        let h = random_correlation_target::<f64>(4, 33).unwrap();
        let p = CorrelationProblem::new(h).unwrap();
        let x0 = p.all_ones_start();
        let config = SolverConfig::<f64>::default();
        let a = solve(&p, &x0, LambdaStart::Estimate, &config).unwrap();
        let b = solve(&p, &x0, LambdaStart::Estimate, &config).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.x_final, b.x_final);
    }

    #[test]
    fn fixed_initial_penalty_is_clamped() {
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let config = SolverConfig {
            c0: PenaltyInit::Fixed(5000.0),
            ..Default::default()
        };
        let report = solve(&NollProblem, &x0, LambdaStart::Estimate, &config).unwrap();
        assert_relative_eq!(report.c_initial, 1000.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let config = SolverConfig::<f64>::default();
        let bad_x0 = DVector::from_vec(vec![1.0]);
        assert!(solve(&NollProblem, &bad_x0, LambdaStart::Estimate, &config).is_err());

        let bad_config = SolverConfig {
            tau: 1.5,
            ..SolverConfig::<f64>::default()
        };
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        assert!(solve(&NollProblem, &x0, LambdaStart::Estimate, &bad_config).is_err());

        let wrong_lambda = LambdaStart::Given(SymMat::zeros(2));
        assert!(solve(&NollProblem, &x0, wrong_lambda, &config).is_err());
    }

    #[test]
    fn solves_in_f32_at_loose_tolerance() {
        let x0 = nalgebra::DVector::<f32>::from_vec(vec![1.0, 0.0]);
        let config = SolverConfig::<f32> {
            tol: 1e-3,
            min_step: 1e-7,
            ..Default::default()
        };
        let report = solve(&NollProblem, &x0, LambdaStart::Estimate, &config).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert!(
            (report.f_final + 2.0).abs() < 0.05,
            "f = {}",
            report.f_final
        );
    }
}
