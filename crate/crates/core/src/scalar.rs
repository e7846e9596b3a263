//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All matrix kernels and model metrics are written against [`Scalar`], so
//! the same code runs in `f64` (the default everywhere) or `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::tolerance::Tolerances;

/// Floating point type usable by the kernels: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerances appropriate for this precision.
    fn default_tolerances() -> Tolerances {
        Tolerances::for_epsilon(Self::epsilon().as_f64())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
