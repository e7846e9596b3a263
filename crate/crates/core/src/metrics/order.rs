use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{dot, expm, ones, SquareMatrix};
use crate::metrics::{check_grid, MapAnalysis};
use crate::scalar::Scalar;

/// `(π − α)e^{Ct}𝟙 = P(T₁^π > t) − P(T₁^α > t)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderGap<T> {
    pub points: Vec<(T, T)>,
    pub min: T,
    pub argmin: T,
}

impl<T: Scalar> MapAnalysis<'_, T> {
    pub(crate) fn gap_with(&self, e: &SquareMatrix<T>) -> T {
        let diff: Vec<T> = self
            .pi()
            .as_slice()
            .iter()
            .zip(self.alpha().as_slice())
            .map(|(&p, &a)| p - a)
            .collect();
        dot(&diff, &e.mul_vec(&ones(e.order())))
    }

    pub fn stochastic_order_gap(&self, grid: &[T]) -> Result<OrderGap<T>> {
        check_grid(grid)?;
        let mut points = Vec::with_capacity(grid.len());
        for &t in grid {
            points.push((t, self.gap_with(&expm(self.c(), t)?)));
        }
        let (argmin, min) = points
            .iter()
            .copied()
            .fold((T::zero(), T::infinity()), |b, p| if p.1 < b.1 { p } else { b });
        Ok(OrderGap {
            points,
            min,
            argmin,
        })
    }
}
