//! Central-difference checks of analytic gradients, used by the test suite
//! and the `check-grad` command.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::framework::{ac_grad_lambda, ac_grad_x, ac_value, ClassicalPlugins, ExactPlugins};
use crate::merit::{lc_grad_lambda, lc_grad_x, lc_value, MeritParams};
use crate::problem::NsdpProblem;
use crate::scalar::Scalar;
use crate::symcore::SymMat;

/// Central difference of a scalar function of a vector.
pub fn central_diff_vec<T, F>(mut f: F, x: &DVector<T>, h: T) -> Result<DVector<T>, Error>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> Result<T, Error>,
{
    let mut out = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp)?;
        xp[i] = x[i] - h;
        let fm = f(&xp)?;
        xp[i] = x[i];
        out[i] = (fp - fm) / (h + h);
    }
    Ok(out)
}

/// Central difference of a scalar function of a symmetric matrix, with the
/// convention `dψ = ⟨∇ψ, dΛ⟩`.
///
/// Perturbing an off-diagonal entry moves both mirrored positions, so the
/// measured slope is twice the gradient entry there; this is divided out.
pub fn central_diff_sym<T, F>(mut f: F, z: &SymMat<T>, h: T) -> Result<SymMat<T>, Error>
where
    T: Scalar,
    F: FnMut(&SymMat<T>) -> Result<T, Error>,
{
    let m = z.dim();
    let half = T::of(0.5);
    let mut out = SymMat::zeros(m);
    let mut zp = z.clone();
    for i in 0..m {
        for j in i..m {
            let orig = z.get(i, j);
            zp.set(i, j, orig + h);
            let fp = f(&zp)?;
            zp.set(i, j, orig - h);
            let fm = f(&zp)?;
            zp.set(i, j, orig);
            let slope = (fp - fm) / (h + h);
            out.set(i, j, if i == j { slope } else { slope * half });
        }
    }
    Ok(out)
}

/// Checks `dg` and `d2g` of a problem against central differences of `eval_g`
/// and `dg` at random points; returns the worst relative error.
pub fn check_constraint_derivatives<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    points: usize,
    h: T,
    seed: u64,
) -> Result<T, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.num_vars();
    let m = p.constraint_dim();
    let mut worst = T::zero();
    for _ in 0..points {
        let x = DVector::from_fn(n, |_, _| T::of(rng.random_range(-2.0..2.0)));
        for i in 0..n {
            let analytic = p.dg(&x, i);
            let mut xp = x.clone();
            xp[i] = x[i] + h;
            let gp = p.eval_g(&xp);
            xp[i] = x[i] - h;
            let gm = p.eval_g(&xp);
            let mut fd = &gp - &gm;
            fd.scale_mut(T::one() / (h + h));
            let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
            worst = worst.max(rel);

            for j in 0..n {
                let analytic2 = p.d2g(&x, i, j);
                let sym_check = (&analytic2 - &p.d2g(&x, j, i)).norm();
                worst = worst.max(sym_check);
                let mut xp = x.clone();
                xp[j] = x[j] + h;
                let dp = p.dg(&xp, i);
                xp[j] = x[j] - h;
                let dm = p.dg(&xp, i);
                let mut fd2 = &dp - &dm;
                fd2.scale_mut(T::one() / (h + h));
                let rel2 = (&fd2 - &analytic2).norm() / (T::one() + analytic2.norm());
                worst = worst.max(rel2);
            }
        }
        let _ = m;
    }
    Ok(worst)
}

/// One gradient comparison within a [`GradCheckReport`].
#[derive(Clone, Debug)]
pub struct GradCheckEntry {
    /// Which gradient was compared.
    pub label: &'static str,
    /// Worst relative error over all points.
    pub max_rel_err: f64,
    /// Points at or above the failure threshold.
    pub failures: usize,
    /// Points above the warning threshold but below failure.
    pub warnings: usize,
}

/// Outcome of [`check_merit_gradients`].
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Per-gradient results.
    pub entries: Vec<GradCheckEntry>,
    /// Number of sample points.
    pub points: usize,
    /// Failure threshold on the relative error.
    pub fail_tol: f64,
    /// Warning threshold on the relative error.
    pub warn_tol: f64,
}

impl GradCheckReport {
    /// True when no comparison reached the failure threshold.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.failures == 0)
    }
}

/// Compares the analytic merit gradients (concrete, exact-plugin, and
/// classical-plugin forms) against central finite differences at random
/// `(x, Λ, c)` samples.
///
/// Sampling: `x` uniform in (−2, 2)ⁿ, `Λ` entrywise uniform in (−1, 1), and
/// `c` log-uniform in [0.1, 1000], all from a ChaCha8 stream seeded with
/// `seed`. The relative error is `‖fd − analytic‖ / (1 + ‖analytic‖)`.
pub fn check_merit_gradients<T: Scalar>(
    p: &dyn NsdpProblem<T>,
    points: usize,
    h: T,
    seed: u64,
    fail_tol: f64,
    warn_tol: f64,
) -> Result<GradCheckReport, Error> {
    let zeta1 = T::one();
    let zeta2 = T::of(1e-4);
    let exact = ExactPlugins::new(zeta1, zeta2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.num_vars();
    let m = p.constraint_dim();

    let mut entries: Vec<GradCheckEntry> = [
        "lc_grad_x",
        "lc_grad_lambda",
        "ac_grad_x (exact)",
        "ac_grad_lambda (exact)",
        "ac_grad_x (classical)",
        "ac_grad_lambda (classical)",
    ]
    .iter()
    .map(|label| GradCheckEntry {
        label,
        max_rel_err: 0.0,
        failures: 0,
        warnings: 0,
    })
    .collect();

    let tally = |entry_idx: usize, rel: T, entries: &mut Vec<GradCheckEntry>| {
        let rel = rel.to_f64().unwrap_or(f64::INFINITY);
        let e = &mut entries[entry_idx];
        e.max_rel_err = e.max_rel_err.max(rel);
        if rel >= fail_tol {
            e.failures += 1;
        } else if rel > warn_tol {
            e.warnings += 1;
        }
    };

    for _ in 0..points {
        let x = DVector::from_fn(n, |_, _| T::of(rng.random_range(-2.0..2.0)));
        let lambda = SymMat::from_fn(m, |_, _| T::of(rng.random_range(-1.0..1.0)));
        let c = T::of(10.0f64.powf(rng.random_range(-1.0..3.0)));
        let params = MeritParams::new(c, zeta1, zeta2)?;

        let analytic = lc_grad_x(p, &x, &lambda, &params)?;
        let fd = central_diff_vec(|xx| lc_value(p, xx, &lambda, &params), &x, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(0, rel, &mut entries);

        let analytic = lc_grad_lambda(p, &x, &lambda, &params)?;
        let fd = central_diff_sym(|ll| lc_value(p, &x, ll, &params), &lambda, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(1, rel, &mut entries);

        let analytic = ac_grad_x(p, &x, &lambda, c, &exact)?;
        let fd = central_diff_vec(|xx| ac_value(p, xx, &lambda, c, &exact), &x, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(2, rel, &mut entries);

        let analytic = ac_grad_lambda(p, &x, &lambda, c, &exact)?;
        let fd = central_diff_sym(|ll| ac_value(p, &x, ll, c, &exact), &lambda, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(3, rel, &mut entries);

        let analytic = ac_grad_x(p, &x, &lambda, c, &ClassicalPlugins)?;
        let fd = central_diff_vec(|xx| ac_value(p, xx, &lambda, c, &ClassicalPlugins), &x, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(4, rel, &mut entries);

        let analytic = ac_grad_lambda(p, &x, &lambda, c, &ClassicalPlugins)?;
        let fd = central_diff_sym(|ll| ac_value(p, &x, ll, c, &ClassicalPlugins), &lambda, h)?;
        let rel = (&fd - &analytic).norm() / (T::one() + analytic.norm());
        tally(5, rel, &mut entries);
    }

    Ok(GradCheckReport {
        entries,
        points,
        fail_tol,
        warn_tol,
    })
}
