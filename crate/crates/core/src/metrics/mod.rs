//! Second-order quantities of a MAP and the four burstiness properties.
//!
//! | property | statement | margin reported |
//! |---|---|---|
//! | I   | `d² ≥ 1`              | `πD D♯ D𝟙` |
//! | II  | `T₁^α` has DHR        | `−max_t [αCe^{Ct}(−C)𝟙 · αe^{Ct}𝟙 + (αCe^{Ct}𝟙)²]` |
//! | III | `c² ≥ 1`              | `πC𝟙 · πC⁻¹𝟙 − 1` |
//! | IV  | `T₁^π ≥_st T₁^α`      | `min_t (π − α)e^{Ct}𝟙` |
//!
//! [`MapAnalysis`] caches the stationary pair and the factorization of `−C`
//! so a full report costs one linear solve per quantity and one matrix
//! exponential per grid point. The free functions are thin wrappers for
//! one-off use.

mod deviation;
mod hazard;
mod moments;
mod order;
mod report;

pub use deviation::{DeviationMatrix, DeviationResiduals};
pub use hazard::{Dip, HazardCurve, HazardSample};
pub use moments::ScvRoutes;
pub use order::OrderGap;
pub use report::{MetricsReport, Property, Verdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, SquareMatrix};
use crate::map::{stationary_pair, MapModel, StationaryPair};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Evenly spaced time points `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for TimeGrid {
    /// `{0, 0.2, …, 10}`.
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 10.0,
            step: 0.2,
        }
    }
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step.is_finite()
            && self.start >= 0.0
            && self.stop >= self.start
            && self.step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "time grid needs 0 <= start <= stop and step > 0, got {}:{}:{}",
                self.start, self.stop, self.step
            )))
        }
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points computed as `start + i·step` to avoid accumulated drift.
    pub fn points<T: Scalar>(&self) -> Vec<T> {
        (0..self.len())
            .map(|i| T::of(self.start + i as f64 * self.step))
            .collect()
    }
}

pub(crate) fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.iter().any(|t| !(*t >= T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid contains a negative or non-finite point".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be sorted ascending".into()));
    }
    Ok(())
}

/// Cached analysis context for one model.
#[derive(Debug, Clone)]
pub struct MapAnalysis<'a, T> {
    model: &'a MapModel<T>,
    pair: StationaryPair<T>,
    minus_c: Lu<T>,
}

impl<'a, T: Scalar> MapAnalysis<'a, T> {
    pub fn new(model: &'a MapModel<T>) -> Result<Self> {
        let pair = stationary_pair(model)?;
        let minus_c = Lu::new(&model.c().scale(-T::one()))?;
        Ok(Self {
            model,
            pair,
            minus_c,
        })
    }

    pub fn model(&self) -> &MapModel<T> {
        self.model
    }

    pub fn stationary(&self) -> &StationaryPair<T> {
        &self.pair
    }

    pub fn pi(&self) -> &ProbVector<T> {
        &self.pair.pi
    }

    pub fn alpha(&self) -> &ProbVector<T> {
        &self.pair.alpha
    }

    pub fn lambda_star(&self) -> T {
        self.pair.lambda_star
    }

    fn c(&self) -> &SquareMatrix<T> {
        self.model.c()
    }
}

/// `M_k = k! α(−C)^{−k}𝟙`.
pub fn interval_moment<T: Scalar>(m: &MapModel<T>, k: u32) -> Result<T> {
    MapAnalysis::new(m)?.moment(k)
}

/// Squared coefficient of variation of the event-stationary inter-event time.
pub fn scv<T: Scalar>(m: &MapModel<T>) -> Result<T> {
    MapAnalysis::new(m)?.scv()
}

pub fn deviation_matrix<T: Scalar>(m: &MapModel<T>) -> Result<DeviationMatrix<T>> {
    MapAnalysis::new(m)?.deviation_matrix()
}

/// Limiting index of dispersion of counts, `d²`.
pub fn dispersion_index<T: Scalar>(m: &MapModel<T>) -> Result<T> {
    MapAnalysis::new(m)?.dispersion_index()
}

/// `(t, E[N(t)], Var N(t))` for the time-stationary process.
pub fn variance_curve<T: Scalar>(m: &MapModel<T>, grid: &[T]) -> Result<Vec<(T, T, T)>> {
    MapAnalysis::new(m)?.variance_curve(grid)
}

pub fn hazard_curve<T: Scalar>(
    m: &MapModel<T>,
    eta: &ProbVector<T>,
    grid: &[T],
) -> Result<HazardCurve<T>> {
    MapAnalysis::new(m)?.hazard_curve(eta, grid)
}

/// `(π − α)e^{Ct}𝟙` on the grid.
pub fn stochastic_order_gap<T: Scalar>(m: &MapModel<T>, grid: &[T]) -> Result<OrderGap<T>> {
    MapAnalysis::new(m)?.stochastic_order_gap(grid)
}

/// Evaluates properties (I)–(IV) and assembles the full report.
pub fn property_verdicts<T: Scalar>(
    m: &MapModel<T>,
    grid: &[T],
    tolerance: T,
) -> Result<MetricsReport<T>> {
    MapAnalysis::new(m)?.report(grid, tolerance)
}
