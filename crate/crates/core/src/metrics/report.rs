use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::expm;
use crate::metrics::{check_grid, MapAnalysis};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    /// `d² ≥ 1`
    I,
    /// decreasing hazard rate of `T₁^α`
    II,
    /// `c² ≥ 1`
    III,
    /// `T₁^π ≥_st T₁^α`
    IV,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::I => "(I) d^2 >= 1",
            Property::II => "(II) DHR",
            Property::III => "(III) c^2 >= 1",
            Property::IV => "(IV) stochastic order",
        };
        f.write_str(s)
    }
}

/// Outcome for one property. `margin ≥ −tolerance` means the property holds;
/// `worst_t` is set for the grid-based properties (II) and (IV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Verdict<T> {
    pub property: Property,
    pub holds: bool,
    pub worst_t: Option<T>,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricsReport<T> {
    pub lambda_star: T,
    pub m1: T,
    pub m2: T,
    pub scv: T,
    pub d2: T,
    pub verdicts: Vec<Verdict<T>>,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn verdict(&self, p: Property) -> &Verdict<T> {
        self.verdicts
            .iter()
            .find(|v| v.property == p)
            .expect("report carries all four verdicts")
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

impl<T: Scalar> MapAnalysis<'_, T> {
    pub fn report(&self, grid: &[T], tolerance: T) -> Result<MetricsReport<T>> {
        check_grid(grid)?;
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        let scv = self.scv()?;
        let dev = self.deviation_matrix()?;
        let od_margin = {
            let pi_d = self.model().d().vec_mul(self.pi().as_slice());
            crate::linalg::dot(&dev.matrix().vec_mul(&pi_d), &self.model().event_rates())
        };
        let d2 = T::one() + T::of(2.0) * od_margin / self.lambda_star();

        // (II) tracks the largest numerator, (IV) the smallest gap.
        let mut dhr_worst = (T::zero(), T::neg_infinity());
        let mut gap_worst = (T::zero(), T::infinity());
        for &t in grid {
            let e = expm(self.c(), t)?;
            let expr = self.dhr_expression_with(&e);
            if expr > dhr_worst.1 {
                dhr_worst = (t, expr);
            }
            let gap = self.gap_with(&e);
            if gap < gap_worst.1 {
                gap_worst = (t, gap);
            }
        }

        let verdict = |property, worst_t, margin: T| Verdict {
            property,
            holds: margin >= -tolerance,
            worst_t,
            margin,
        };
        let mut verdicts = vec![
            verdict(Property::I, None, od_margin),
            verdict(Property::III, None, self.scv_product() - T::one()),
        ];
        if !grid.is_empty() {
            verdicts.insert(1, verdict(Property::II, Some(dhr_worst.0), -dhr_worst.1));
            verdicts.push(verdict(Property::IV, Some(gap_worst.0), gap_worst.1));
        }

        Ok(MetricsReport {
            lambda_star: self.lambda_star(),
            m1,
            m2,
            scv,
            d2,
            verdicts,
        })
    }
}
