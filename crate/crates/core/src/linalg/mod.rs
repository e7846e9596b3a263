//! Dense kernels for the small matrices that parameterize a MAP.

mod expm;
mod lu;
mod matrix;
mod stationary;

pub use expm::expm;
pub use lu::{inverse, solve_linear, Lu, SOLVE_RESIDUAL};
pub use matrix::SquareMatrix;
pub(crate) use matrix::{dot, ones};
pub use stationary::{closed_subset, left_null_prob_vector};
pub(crate) use stationary::left_null_prob_vector_nonneg;
