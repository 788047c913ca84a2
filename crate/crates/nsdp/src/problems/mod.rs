//! Built-in problems: Noll's example and the closest-correlation-matrix
//! problem, plus the seeded instance generator and an independent
//! alternating-projections oracle.

mod correlation;
mod noll;
mod oracle;

pub use correlation::{load_h_csv, parse_h_csv, random_correlation_target, CorrelationProblem};
pub use noll::NollProblem;
pub use oracle::nearest_correlation_oracle;
