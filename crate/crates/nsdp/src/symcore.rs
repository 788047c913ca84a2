//! Symmetric-matrix algebra: packed storage, Frobenius inner products,
//! symmetric vectorization, the Jordan product, and projection onto the
//! positive semidefinite cone.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::scalar::Scalar;

/// Packed length of the upper triangle of an `m`-dimensional symmetric matrix.
#[inline]
pub fn tri_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Inverse of [`tri_len`]: the matrix dimension whose packed triangle has
/// length `d`, or `None` if `d` is not a triangular number.
pub fn tri_dim(d: usize) -> Option<usize> {
    let s = 8 * d + 1;
    let k = s.isqrt();
    if k * k == s {
        Some((k - 1) / 2)
    } else {
        None
    }
}

/// Dense real symmetric matrix storing only the upper triangle (row-major,
/// diagonal included), so that `Z == Zᵀ` holds exactly by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat<T: Scalar> {
    dim: usize,
    data: Vec<T>,
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < dim);
    i * (2 * dim - i - 1) / 2 + j
}

impl<T: Scalar> SymMat<T> {
    /// The zero matrix. Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "symmetric matrices must have dimension >= 1");
        SymMat {
            dim,
            data: vec![T::zero(); tri_len(dim)],
        }
    }

    /// The identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut z = Self::zeros(dim);
        for i in 0..dim {
            z.set(i, i, T::one());
        }
        z
    }

    /// Builds a matrix from a function evaluated on the upper triangle
    /// (`i <= j`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut z = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                z.set(i, j, f(i, j));
            }
        }
        z
    }

    /// Builds a matrix with the given diagonal and zeros elsewhere.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut z = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            z.set(i, i, v);
        }
        z
    }

    /// Reads a square dense matrix, averaging `(i,j)` and `(j,i)`.
    ///
    /// Panics if the input is not square. Use [`SymMat::try_from_dense`] to
    /// reject asymmetric input instead of repairing it.
    pub fn from_dense_symmetrized(mat: &DMatrix<T>) -> Self {
        assert!(mat.is_square(), "expected a square matrix");
        let half = T::of(0.5);
        Self::from_fn(mat.nrows(), |i, j| (mat[(i, j)] + mat[(j, i)]) * half)
    }

    /// Reads a square dense matrix, requiring `|Z_ij - Z_ji| <= tol`.
    pub fn try_from_dense(mat: &DMatrix<T>, tol: T) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                if (mat[(i, j)] - mat[(j, i)]).abs() > tol {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({},{}): {:?} vs {:?}",
                        i + 1,
                        j + 1,
                        mat[(i, j)].to_f64(),
                        mat[(j, i)].to_f64()
                    )));
                }
            }
        }
        Ok(Self::from_fn(mat.nrows(), |i, j| mat[(i, j)]))
    }

    /// Matrix dimension `m`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)`; order of the indices does not matter.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.dim, i, j)]
    }

    /// Sets entry `(i, j)` (and its mirror).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.dim, i, j)] = v;
    }

    /// The packed upper triangle, row-major.
    #[inline]
    pub fn packed(&self) -> &[T] {
        &self.data
    }

    /// Expands to a full dense matrix.
    pub fn to_dense(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Frobenius inner product `⟨Y, Z⟩ = tr(YZ)`.
    ///
    /// Panics if dimensions differ.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "inner product dimension mismatch");
        let two = T::of(2.0);
        let mut diag = T::zero();
        let mut off = T::zero();
        for i in 0..self.dim {
            diag += self.get(i, i) * other.get(i, i);
            for j in (i + 1)..self.dim {
                off += self.get(i, j) * other.get(i, j);
            }
        }
        diag + two * off
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.inner(self).max(T::zero()).sqrt()
    }

    /// Trace.
    pub fn trace(&self) -> T {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(T::zero(), |a, b| a + b)
    }

    /// `self + a * other`, in place. Panics if dimensions differ.
    pub fn axpy(&mut self, a: T, other: &Self) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (s, o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += a * *o;
        }
    }

    /// `self * a`, in place.
    pub fn scale_mut(&mut self, a: T) {
        for s in self.data.iter_mut() {
            *s *= a;
        }
    }

    /// `self * a`.
    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        out.scale_mut(a);
        out
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.finite())
    }

    /// Symmetric vectorization of this matrix; see [`svec`].
    pub fn svec(&self) -> SVec<T> {
        SVec {
            dim: self.dim,
            data: self.data.clone(),
        }
    }

    /// Jordan product `Y ∘ Z = (YZ + ZY) / 2`.
    ///
    /// Commutative, and bilinear in both arguments. Panics if dimensions
    /// differ.
    pub fn jordan(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "jordan product dimension mismatch");
        let prod = self.to_dense() * other.to_dense();
        // (YZ + ZY)/2 has (i,j) entry ((YZ)_ij + (YZ)_ji)/2 for symmetric Y, Z.
        let half = T::of(0.5);
        Self::from_fn(self.dim, |i, j| (prod[(i, j)] + prod[(j, i)]) * half)
    }

    /// Eigenvalues (unordered).
    pub fn eigenvalues(&self) -> Result<DVector<T>, Error> {
        Ok(self.symmetric_eigen()?.eigenvalues)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<T, Error> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().copied().reduce(T::min).expect("dim >= 1"))
    }

    /// Projection onto the positive semidefinite cone.
    ///
    /// Eigendecomposes `Z = U diag(λ) Uᵀ` and clamps negative eigenvalues at
    /// exactly zero. Returns an error if the matrix contains non-finite
    /// entries or the eigendecomposition fails.
    pub fn psd_project(&self) -> Result<Self, Error> {
        let mut eig = self.symmetric_eigen()?;
        for v in eig.eigenvalues.iter_mut() {
            *v = v.max(T::zero());
        }
        let rec = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues)
            * eig.eigenvectors.transpose();
        Ok(Self::from_dense_symmetrized(&rec))
    }

    fn symmetric_eigen(&self) -> Result<nalgebra::SymmetricEigen<T, nalgebra::Dyn>, Error> {
        if !self.is_finite() {
            return Err(Error::NonFinite("symmetric eigendecomposition input"));
        }
        // max_niter == 0 lets the QR iteration run to convergence, which is
        // guaranteed for finite symmetric input.
        nalgebra::SymmetricEigen::try_new(self.to_dense(), T::default_epsilon(), 0)
            .ok_or(Error::EigenFailed)
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for SymMat<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.data[packed_index(self.dim, i, j)]
    }
}

impl<T: Scalar> std::ops::Add for &SymMat<T> {
    type Output = SymMat<T>;

    fn add(self, rhs: &SymMat<T>) -> SymMat<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Scalar> std::ops::Sub for &SymMat<T> {
    type Output = SymMat<T>;

    fn sub(self, rhs: &SymMat<T>) -> SymMat<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Scalar> std::ops::Neg for &SymMat<T> {
    type Output = SymMat<T>;

    fn neg(self) -> SymMat<T> {
        self.scaled(-T::one())
    }
}

/// Coordinates of a symmetric matrix in an orthonormal basis of the space of
/// symmetric matrices: diagonal entries as-is, off-diagonal entries scaled by
/// √2, in row-major upper-triangle order.
///
/// The raw triangle is kept unscaled internally so that [`smat`]`(`[`svec`]`(Z)) == Z`
/// holds bit-for-bit; the √2 scaling is applied when materializing coordinate
/// vectors, and removed (with one rounding) when reading them back via
/// [`SVec::from_coords`].
#[derive(Clone, Debug, PartialEq)]
pub struct SVec<T: Scalar> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SVec<T> {
    /// Length `d = m(m+1)/2` of the coordinate vector.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; symmetric matrices have dimension at least one.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Dimension `m` of the underlying matrix.
    #[inline]
    pub fn mat_dim(&self) -> usize {
        self.dim
    }

    /// The scaled coordinate vector `(Z₁₁, √2 Z₁₂, ..., Z₂₂, √2 Z₂₃, ...)`.
    pub fn coords(&self) -> DVector<T> {
        let rt2 = T::of(std::f64::consts::SQRT_2);
        let mut out = DVector::zeros(self.data.len());
        let mut k = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                out[k] = if i == j {
                    self.data[k]
                } else {
                    self.data[k] * rt2
                };
                k += 1;
            }
        }
        out
    }

    /// Reads a scaled coordinate vector back into an [`SVec`].
    ///
    /// Fails with [`Error::NotTriangular`] when the length is not of the form
    /// m(m+1)/2.
    pub fn from_coords(v: &DVector<T>) -> Result<Self, Error> {
        let dim = tri_dim(v.len()).ok_or(Error::NotTriangular(v.len()))?;
        let rt2 = T::of(std::f64::consts::SQRT_2);
        let mut data = vec![T::zero(); v.len()];
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                data[k] = if i == j { v[k] } else { v[k] / rt2 };
                k += 1;
            }
        }
        Ok(SVec { dim, data })
    }

    /// Dot product; equals the Frobenius inner product of the matrices.
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "svec dot dimension mismatch");
        let two = T::of(2.0);
        let mut k = 0;
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { T::one() } else { two };
                acc += w * self.data[k] * other.data[k];
                k += 1;
            }
        }
        acc
    }

    /// Inverse vectorization; see [`smat`].
    pub fn to_symmat(&self) -> SymMat<T> {
        SymMat {
            dim: self.dim,
            data: self.data.clone(),
        }
    }
}

/// Symmetric vectorization `svec(Z) = (Z₁₁, √2 Z₁₂, ..., Z₂₂, √2 Z₂₃, ...)`.
///
/// The scaling makes it an isometry: `svec(Y) · svec(Z) = ⟨Y, Z⟩`.
pub fn svec<T: Scalar>(z: &SymMat<T>) -> SVec<T> {
    z.svec()
}

/// Inverse of [`svec`]; `smat(svec(Z)) == Z` exactly.
pub fn smat<T: Scalar>(v: &SVec<T>) -> SymMat<T> {
    v.to_symmat()
}
