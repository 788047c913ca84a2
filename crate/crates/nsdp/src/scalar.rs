//! Scalar abstraction: the whole library is generic over `f32`/`f64`.

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type used by all core computations.
///
/// Implemented for `f32` and `f64`. The bound combines nalgebra's `RealField`
/// (which drives the eigendecomposition and Cholesky backends) with the
/// num-traits conversion traits used for constants and reporting.
pub trait Scalar: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Default {
    /// Whether the value is neither NaN nor infinite.
    fn finite(self) -> bool;

    /// Shorthand for converting an `f64` constant; never fails for `f32`/`f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant must convert into the scalar type")
    }
}

impl Scalar for f32 {
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn finite(self) -> bool {
        self.is_finite()
    }
}
