//! Second-order analysis of Markovian arrival processes.
//!
//! A MAP is given by a pair `(C, D)` with generator `Q = C + D`. This crate
//! computes its stationary quantities, interval moments and SCV, the
//! deviation matrix and index of dispersion of counts, hazard rates of the
//! first inter-event time, and the stochastic-order gap between the time-
//! and event-stationary versions of that time. Closed-form oracles, a
//! Monte Carlo simulator and a randomized sweep harness sit on top.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! simulator and sweeps work in `f64`.
//!
//! ```
//! use mapburst::{Matrix, Model};
//!
//! let q = Matrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
//! let m = Model::mmpp(&q, &[1.0, 3.0]).unwrap();
//! let d2 = mapburst::metrics::dispersion_index(&m).unwrap();
//! assert!((d2 - 1.5).abs() < 1e-12);
//! ```

pub mod closed_forms;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod map;
pub mod metrics;
pub mod prob;
pub mod scalar;
pub mod simulate;
pub mod tolerance;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::SquareMatrix<f64>;
pub type MatrixF32 = linalg::SquareMatrix<f32>;
pub type Model = map::MapModel<f64>;
pub type ModelF32 = map::MapModel<f32>;
pub type Prob = prob::ProbVector<f64>;
pub type Report = metrics::MetricsReport<f64>;
pub type Hazard = metrics::HazardCurve<f64>;
pub type Mmpp2 = closed_forms::Mmpp2Params<f64>;
