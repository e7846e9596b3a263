//! Centralized tolerance policy.
//!
//! Every threshold used by validation, cross-checks and verdicts lives here.
//! The constants are the `f64` defaults; [`Tolerances::for_epsilon`] widens
//! them for lower precision scalars.

use serde::{Deserialize, Serialize};

/// Zero row sums of `Q = C + D`, relative to the largest entry of the row.
pub const ROW_SUM: f64 = 1e-12;
/// Pivot threshold relative to `‖A‖∞` below which a matrix is singular.
pub const PIVOT: f64 = 1e-13;
/// Residual bound for stationary vectors, relative to `max(1, ‖Q‖∞)`.
pub const STATIONARY_RESIDUAL: f64 = 1e-12;
/// Agreement between two algebraic routes to the same quantity.
pub const CROSS_CHECK: f64 = 1e-9;
/// Default margin below zero still accepted as "holds" by the verdicts.
pub const VERDICT: f64 = 1e-12;
/// Margins below `-HARD_VIOLATION` are reported as genuine violations.
pub const HARD_VIOLATION: f64 = 1e-9;
/// Survival probability below which hazard evaluation is truncated.
pub const SURVIVAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub row_sum: f64,
    pub pivot: f64,
    pub stationary_residual: f64,
    pub cross_check: f64,
    pub verdict: f64,
    pub hard_violation: f64,
    pub survival_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            row_sum: ROW_SUM,
            pivot: PIVOT,
            stationary_residual: STATIONARY_RESIDUAL,
            cross_check: CROSS_CHECK,
            verdict: VERDICT,
            hard_violation: HARD_VIOLATION,
            survival_floor: SURVIVAL_FLOOR,
        }
    }
}

impl Tolerances {
    /// Scales the `f64` defaults by `epsilon / f64::EPSILON`. The survival
    /// floor becomes a small multiple of the smallest normal value instead.
    pub fn for_epsilon(epsilon: f64) -> Self {
        let factor = (epsilon / f64::EPSILON).max(1.0);
        if factor == 1.0 {
            return Self::default();
        }
        let widen = |x: f64| (x * factor).min(0.1);
        Self {
            row_sum: widen(ROW_SUM),
            pivot: widen(PIVOT),
            stationary_residual: widen(STATIONARY_RESIDUAL),
            cross_check: widen(CROSS_CHECK),
            verdict: widen(VERDICT),
            hard_violation: widen(HARD_VIOLATION),
            survival_floor: (f32::MIN_POSITIVE as f64) * 1e3,
        }
    }
}
