//! Nonlinear semidefinite programming — minimize `f(x)` subject to `G(x)`
//! positive semidefinite — by unconstrained minimization of a continuously
//! differentiable *exact* augmented Lagrangian over the joint space of primal
//! variables and multipliers.
//!
//! The merit function augments the classical augmented Lagrangian with a
//! multiplier-tracking term `‖N(x)(Λ(x) − Λ)‖²` built from a regularized
//! least-squares multiplier estimate; above a finite penalty threshold its
//! unconstrained minimizers are solutions of the constrained problem, so a
//! single BFGS run with an adaptive penalty recovers a KKT pair.
//!
//! Everything is generic over the scalar type through [`Scalar`] (`f32` or
//! `f64`); the `*32`/`*64` aliases at the crate root pick one concretely.
//!
//! ```
//! use nalgebra::DVector;
//! use nsdp::problems::NollProblem;
//! use nsdp::solver::{solve, LambdaStart, SolverConfig};
//!
//! let report = solve(
//!     &NollProblem,
//!     &DVector::from_vec(vec![1.0, 0.0]),
//!     LambdaStart::Estimate,
//!     &SolverConfig::<f64>::default(),
//! )
//! .unwrap();
//! assert!((report.f_final + 2.0).abs() < 1e-4);
//! ```

#![warn(missing_docs)]

mod error;
mod scalar;

pub mod framework;
pub mod gradcheck;
pub mod merit;
pub mod problem;
pub mod problems;
pub mod solver;
pub mod symcore;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;
pub use problem::{KktPair, NsdpProblem};
pub use scalar::Scalar;
pub use symcore::{smat, svec, SVec, SymMat};

/// Symmetric matrix over `f32`.
pub type SymMat32 = symcore::SymMat<f32>;
/// Symmetric matrix over `f64`.
pub type SymMat64 = symcore::SymMat<f64>;
/// Symmetric vectorization over `f32`.
pub type SVec32 = symcore::SVec<f32>;
/// Symmetric vectorization over `f64`.
pub type SVec64 = symcore::SVec<f64>;
/// Merit parameters over `f64`.
pub type MeritParams64 = merit::MeritParams<f64>;
/// Solver configuration over `f64`.
pub type SolverConfig64 = solver::SolverConfig<f64>;
/// Solve report over `f64`.
pub type SolveReport64 = solver::SolveReport<f64>;
