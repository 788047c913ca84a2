//! The closest-correlation-matrix problem, reformulated over the strict upper
//! triangle of the unknown matrix.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::problem::NsdpProblem;
use crate::scalar::Scalar;
use crate::symcore::SymMat;

/// Index of the pair `(i, j)`, `i < j`, in row-major strict-upper-triangle
/// order.
#[inline]
pub(crate) fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Given a target `H` with unit diagonal, find the closest correlation matrix:
///
/// minimize `Σ_{i<j} (H_ij − x_ij)²`  subject to
/// `I + Σ_{i<j} A^{ij} x_ij` positive semidefinite,
///
/// where `A^{ij}` has 1 in entries `(i, j)` and `(j, i)` and 0 elsewhere. The
/// variable `x` is the strict upper triangle of the unknown matrix, so
/// `n = m(m−1)/2`.
#[derive(Clone, Debug)]
pub struct CorrelationProblem<T: Scalar> {
    h: SymMat<T>,
    h_upper: DVector<T>,
    partials: Vec<SymMat<T>>,
}

impl<T: Scalar> CorrelationProblem<T> {
    /// Validates and wraps a target matrix: `H` must be at least 2×2 with a
    /// unit diagonal (within 1e-12). Symmetry is structural in [`SymMat`];
    /// dense input should go through [`SymMat::try_from_dense`] first.
    pub fn new(h: SymMat<T>) -> Result<Self, Error> {
        let m = h.dim();
        if m < 2 {
            return Err(Error::InvalidMatrix(format!(
                "correlation target must be at least 2x2, got {m}x{m}"
            )));
        }
        let tol = T::of(1e-12);
        for i in 0..m {
            if (h.get(i, i) - T::one()).abs() > tol {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({}, {}) is {:?}, expected 1",
                    i + 1,
                    i + 1,
                    h.get(i, i).to_f64()
                )));
            }
        }
        let n = m * (m - 1) / 2;
        let mut h_upper = DVector::zeros(n);
        let mut partials = Vec::with_capacity(n);
        for i in 0..m {
            for j in (i + 1)..m {
                h_upper[pair_index(m, i, j)] = h.get(i, j);
                let mut a = SymMat::zeros(m);
                a.set(i, j, T::one());
                partials.push(a);
            }
        }
        Ok(CorrelationProblem {
            h,
            h_upper,
            partials,
        })
    }

    /// The target matrix.
    pub fn target(&self) -> &SymMat<T> {
        &self.h
    }

    /// The paper-conventional start point: the all-ones matrix, i.e.
    /// `x_ij = 1` for every pair.
    pub fn all_ones_start(&self) -> DVector<T> {
        DVector::from_element(self.num_vars_inner(), T::one())
    }

    /// Packs a unit-diagonal symmetric matrix into the variable vector.
    pub fn pack(&self, z: &SymMat<T>) -> DVector<T> {
        let m = self.h.dim();
        assert_eq!(z.dim(), m, "pack dimension mismatch");
        let mut x = DVector::zeros(self.num_vars_inner());
        for i in 0..m {
            for j in (i + 1)..m {
                x[pair_index(m, i, j)] = z.get(i, j);
            }
        }
        x
    }

    fn num_vars_inner(&self) -> usize {
        let m = self.h.dim();
        m * (m - 1) / 2
    }
}

impl<T: Scalar> NsdpProblem<T> for CorrelationProblem<T> {
    fn num_vars(&self) -> usize {
        self.num_vars_inner()
    }

    fn constraint_dim(&self) -> usize {
        self.h.dim()
    }

    fn eval_f(&self, x: &DVector<T>) -> T {
        let d = x - &self.h_upper;
        d.dot(&d)
    }

    fn grad_f(&self, x: &DVector<T>) -> DVector<T> {
        (x - &self.h_upper) * T::of(2.0)
    }

    fn hess_f(&self, _x: &DVector<T>) -> DMatrix<T> {
        DMatrix::identity(self.num_vars_inner(), self.num_vars_inner()) * T::of(2.0)
    }

    fn eval_g(&self, x: &DVector<T>) -> SymMat<T> {
        let m = self.h.dim();
        SymMat::from_fn(m, |i, j| {
            if i == j {
                T::one()
            } else {
                x[pair_index(m, i, j)]
            }
        })
    }

    fn dg(&self, _x: &DVector<T>, i: usize) -> SymMat<T> {
        self.partials[i].clone()
    }

    fn constraint_is_affine(&self) -> bool {
        true
    }
}

/// Generates a random target: unit diagonal, off-diagonal entries uniform in
/// (−1, 1).
///
/// The stream is fixed: a ChaCha8 generator seeded with `seed` filling the
/// strict upper triangle in row-major order, one `f64` draw per entry, so
/// instances are reproducible across builds and scalar types.
pub fn random_correlation_target<T: Scalar>(m: usize, seed: u64) -> Result<SymMat<T>, Error> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation targets need m >= 2, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = SymMat::identity(m);
    for i in 0..m {
        for j in (i + 1)..m {
            h.set(i, j, T::of(rng.random_range(-1.0..1.0)));
        }
    }
    Ok(h)
}

/// Parses a target matrix from CSV text: `m` rows of `m` comma-separated
/// decimal floats. Requires symmetry within 1e-12 and a unit diagonal within
/// 1e-12; parse errors report the 1-based row and column.
pub fn parse_h_csv<T: Scalar>(text: &str) -> Result<SymMat<T>, Error> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (r, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (c, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|e| Error::CsvParse {
                row: r + 1,
                col: c + 1,
                msg: format!("{e} (got {:?})", cell.trim()),
            })?;
            row.push(T::of(v));
        }
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 {
        return Err(Error::InvalidMatrix("empty csv".to_string()));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::InvalidMatrix(format!(
                "row {} has {} columns, expected {} (matrix must be square)",
                r + 1,
                row.len(),
                m
            )));
        }
    }
    let dense = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let h = SymMat::try_from_dense(&dense, T::of(1e-12))?;
    let tol = T::of(1e-12);
    for i in 0..m {
        if (h.get(i, i) - T::one()).abs() > tol {
            return Err(Error::InvalidMatrix(format!(
                "diagonal entry ({0}, {0}) must be 1",
                i + 1
            )));
        }
    }
    Ok(h)
}

/// Reads a target matrix from a CSV file; see [`parse_h_csv`].
pub fn load_h_csv<T: Scalar>(path: &Path) -> Result<SymMat<T>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidMatrix(format!("cannot read {}: {e}", path.display())))?;
    parse_h_csv(&text)
}
