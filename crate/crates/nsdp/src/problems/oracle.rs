//! Independent nearest-correlation-matrix oracle: alternating projections
//! with Dykstra's correction, used only to cross-check solver output.

use crate::error::Error;
use crate::scalar::Scalar;
use crate::symcore::SymMat;

const MAX_SWEEPS: usize = 100_000;

/// Finds the correlation matrix (unit diagonal, positive semidefinite)
/// closest to `h` in Frobenius norm.
///
/// Alternates projections onto the PSD cone and the unit-diagonal affine
/// subspace, with Dykstra's correction applied to the cone projection, until
/// the two projections agree within `tol`. The returned matrix has an exact
/// unit diagonal and minimum eigenvalue bounded below by `-tol`.
///
/// This path shares only the spectral projection with the rest of the
/// library; it never touches the merit or solver code.
pub fn nearest_correlation_oracle<T: Scalar>(h: &SymMat<T>, tol: T) -> Result<SymMat<T>, Error> {
    if !h.is_finite() {
        return Err(Error::NonFinite("nearest-correlation target"));
    }
    if tol <= T::zero() {
        return Err(Error::InvalidParameter(
            "oracle tolerance must be positive".into(),
        ));
    }
    let m = h.dim();
    let mut y = h.clone();
    let mut correction = SymMat::zeros(m);
    for _ in 0..MAX_SWEEPS {
        let shifted = &y - &correction;
        let x = shifted.psd_project()?;
        correction = &x - &shifted;
        let mut y_next = x.clone();
        for i in 0..m {
            y_next.set(i, i, T::one());
        }
        let gap = (&y_next - &x).norm();
        y = y_next;
        if gap <= tol {
            return Ok(y);
        }
    }
    Err(Error::OracleStalled(MAX_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::random_correlation_target;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_point_on_valid_correlation_matrices() {
        let mut h = SymMat::<f64>::identity(3);
        h.set(0, 1, 0.2);
        h.set(0, 2, -0.1);
        h.set(1, 2, 0.3);
        assert!(h.min_eigenvalue().unwrap() > 0.0);
        let x = nearest_correlation_oracle(&h, 1e-10).unwrap();
        assert!((&x - &h).norm() < 1e-9);
    }

    #[test]
    fn two_by_two_closed_form() {
        // The nearest unit-diagonal PSD matrix to [[1,2],[2,1]] clamps the
        // off-diagonal to 1.
        let mut h = SymMat::<f64>::identity(2);
        h.set(0, 1, 2.0);
        let x = nearest_correlation_oracle(&h, 1e-10).unwrap();
        assert_relative_eq!(x.get(0, 1), 1.0, epsilon = 1e-8);
        assert_relative_eq!(x.get(0, 0), 1.0);
        assert_relative_eq!(x.get(1, 1), 1.0);
    }

    #[test]
    fn output_contract_on_random_targets() {
        for seed in 0..10u64 {
            let h: SymMat<f64> = random_correlation_target(5, seed).unwrap();
            let x = nearest_correlation_oracle(&h, 1e-10).unwrap();
            for i in 0..5 {
                assert_eq!(x.get(i, i), 1.0);
            }
            assert!(x.min_eigenvalue().unwrap() >= -1e-9);
            // stationary under one more sweep
            let again = nearest_correlation_oracle(&x, 1e-10).unwrap();
            assert!((&again - &x).norm() < 1e-7);
        }
    }
}
