use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nonnegative vector summing to one.
///
/// Used for the time-stationary phase distribution π, the event-stationary
/// distribution α, and arbitrary initial distributions η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound = "T: Scalar")]
pub struct ProbVector<T>(Vec<T>);

impl<T: Scalar> ProbVector<T> {
    /// Normalizes a nonnegative weight vector. Entries in `[-1e-12, 0)` are
    /// treated as rounding noise and clamped to zero.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        let noise = T::of(1e-12);
        let mut w = weights;
        for (i, v) in w.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidProbability(format!("entry {i} is not finite")));
            }
            if *v < T::zero() {
                if *v >= -noise {
                    *v = T::zero();
                } else {
                    return Err(Error::InvalidProbability(format!("entry {i} is negative ({v})")));
                }
            }
        }
        let total: T = w.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::InvalidProbability("entries sum to zero".into()));
        }
        w.iter_mut().for_each(|v| *v /= total);
        Ok(Self(w))
    }

    /// Point mass on `phase`.
    pub fn unit(order: usize, phase: usize) -> Result<Self> {
        if phase >= order {
            return Err(Error::DimensionMismatch {
                expected: order,
                found: phase,
            });
        }
        let mut v = vec![T::zero(); order];
        v[phase] = T::one();
        Ok(Self(v))
    }

    pub fn uniform(order: usize) -> Self {
        Self(vec![T::one() / T::of(order as f64); order])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn cast<U: Scalar>(&self) -> ProbVector<U> {
        ProbVector(self.0.iter().map(|v| U::of(v.as_f64())).collect())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &[T]) -> T {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<usize> for ProbVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for ProbVector<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<ProbVector<T>> for Vec<T> {
    fn from(p: ProbVector<T>) -> Self {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes() {
        let p = ProbVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_negative_and_zero() {
        assert!(ProbVector::new(vec![1.0, -0.5]).is_err());
        assert!(ProbVector::new(vec![0.0, 0.0]).is_err());
        assert!(ProbVector::<f64>::new(vec![]).is_err());
        assert!(ProbVector::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn clamps_rounding_noise() {
        let p = ProbVector::new(vec![1.0, -1e-17]).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn unit_vector_bounds() {
        assert!(ProbVector::<f64>::unit(3, 3).is_err());
        assert_eq!(ProbVector::<f64>::unit(3, 1).unwrap().as_slice(), &[0.0, 1.0, 0.0]);
    }
}
