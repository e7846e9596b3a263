use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, expm, ones};
use crate::metrics::{check_grid, MapAnalysis};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardSample<T> {
    pub t: T,
    /// `h(t) = ηe^{Ct}D𝟙 / ηe^{Ct}𝟙`
    pub h: T,
    /// Closed-form derivative of `h`.
    pub dh: T,
    /// Central finite difference of `h`, for cross-checking `dh`.
    pub dh_fd: T,
}

/// Hazard rate of `PH(η, C)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HazardCurve<T> {
    pub eta: ProbVector<T>,
    pub samples: Vec<HazardSample<T>>,
    /// First grid time at which the survival fell below the floor; the
    /// curve stops just before it.
    pub truncated_at: Option<T>,
}

/// Witness of non-monotonicity: `h` falls from `t_high` to `t_low`, then
/// rises again by `t_peak`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip<T> {
    pub t_high: T,
    pub t_low: T,
    pub t_peak: T,
    pub fall: T,
    pub rise: T,
}

impl<T: Scalar> HazardCurve<T> {
    /// Largest `|dh − dh_fd|` measured against `max(1e-6, 1e-4·|dh|)`;
    /// values at most 1 mean every sample passes.
    pub fn derivative_check_ratio(&self) -> T {
        self.samples
            .iter()
            .map(|s| {
                let allowed = T::of(1e-6).max(T::of(1e-4) * s.dh.abs());
                (s.dh - s.dh_fd).abs() / allowed
            })
            .fold(T::zero(), T::max)
    }

    /// True when consecutive samples never increase by more than `tol`.
    pub fn is_nonincreasing(&self, tol: T) -> bool {
        self.samples.windows(2).all(|w| w[1].h <= w[0].h + tol)
    }

    /// The most pronounced fall-then-rise in `h` with both legs above `margin`.
    pub fn find_dip(&self, margin: T) -> Option<Dip<T>> {
        let n = self.samples.len();
        if n < 3 {
            return None;
        }
        let h: Vec<T> = self.samples.iter().map(|s| s.h).collect();
        let mut prefix = vec![0usize; n];
        for j in 1..n {
            prefix[j] = if h[j - 1] >= h[prefix[j - 1]] { j - 1 } else { prefix[j - 1] };
        }
        let mut suffix = vec![n - 1; n];
        for j in (0..n - 2).rev() {
            suffix[j] = if h[j + 1] >= h[suffix[j + 1]] { j + 1 } else { suffix[j + 1] };
        }
        let mut best: Option<Dip<T>> = None;
        for j in 1..n - 1 {
            let (i, k) = (prefix[j], suffix[j]);
            let fall = h[i] - h[j];
            let rise = h[k] - h[j];
            if fall > margin && rise > margin {
                let score = fall.min(rise);
                if best.map_or(true, |b| score > b.fall.min(b.rise)) {
                    best = Some(Dip {
                        t_high: self.samples[i].t,
                        t_low: self.samples[j].t,
                        t_peak: self.samples[k].t,
                        fall,
                        rise,
                    });
                }
            }
        }
        best
    }
}

struct HazardPoint<T> {
    survival: T,
    h: T,
    dh: T,
}

impl<T: Scalar> MapAnalysis<'_, T> {
    fn hazard_point(&self, eta: &[T], eta_c: &[T], t: T) -> Result<HazardPoint<T>> {
        let n = self.model().order();
        let e = expm(self.c(), t)?;
        let exit: Vec<T> = self.c().row_sums().into_iter().map(|s| -s).collect();
        let u = e.mul_vec(&ones(n));
        let v = e.mul_vec(&exit);
        let w = e.mul_vec(&self.model().event_rates());
        let survival = dot(eta, &u);
        let h = dot(eta, &w) / survival;
        // h' = [ηCe^{Ct}(−C)𝟙 · ηe^{Ct}𝟙 − ηCe^{Ct}𝟙 · ηe^{Ct}(−C)𝟙] / (ηe^{Ct}𝟙)²
        let num = dot(eta_c, &v) * survival - dot(eta_c, &u) * dot(eta, &v);
        Ok(HazardPoint {
            survival,
            h,
            dh: num / (survival * survival),
        })
    }

    fn finite_difference(&self, eta: &[T], eta_c: &[T], t: T) -> Result<T> {
        let delta = T::of(1e-4);
        let h = |s: T| self.hazard_point(eta, eta_c, s).map(|p| p.h);
        if t >= delta {
            Ok((h(t + delta)? - h(t - delta)?) / (T::of(2.0) * delta))
        } else {
            // one-sided second-order stencil near the origin
            let (h0, h1, h2) = (h(t)?, h(t + delta)?, h(t + T::of(2.0) * delta)?);
            Ok((T::of(-3.0) * h0 + T::of(4.0) * h1 - h2) / (T::of(2.0) * delta))
        }
    }

    pub fn hazard_curve(&self, eta: &ProbVector<T>, grid: &[T]) -> Result<HazardCurve<T>> {
        check_grid(grid)?;
        if eta.len() != self.model().order() {
            return Err(Error::DimensionMismatch {
                expected: self.model().order(),
                found: eta.len(),
            });
        }
        let floor = T::of(T::default_tolerances().survival_floor);
        let eta_s = eta.as_slice();
        let eta_c = self.c().vec_mul(eta_s);
        let mut samples = Vec::with_capacity(grid.len());
        let mut truncated_at = None;
        for &t in grid {
            let p = self.hazard_point(eta_s, &eta_c, t)?;
            if !(p.survival >= floor) || !p.h.is_finite() {
                truncated_at = Some(t);
                break;
            }
            samples.push(HazardSample {
                t,
                h: p.h,
                dh: p.dh,
                dh_fd: self.finite_difference(eta_s, &eta_c, t)?,
            });
        }
        Ok(HazardCurve {
            eta: eta.clone(),
            samples,
            truncated_at,
        })
    }

    /// `αCe^{Ct}(−C)𝟙 · αe^{Ct}𝟙 + (αCe^{Ct}𝟙)²`, the numerator of the
    /// event-stationary hazard derivative. Nonpositive for all `t` iff DHR.
    pub fn dhr_expression(&self, t: T) -> Result<T> {
        let e = expm(self.c(), t)?;
        Ok(self.dhr_expression_with(&e))
    }

    pub(crate) fn dhr_expression_with(&self, e: &crate::linalg::SquareMatrix<T>) -> T {
        let n = self.model().order();
        let alpha = self.alpha().as_slice();
        let alpha_c = self.c().vec_mul(alpha);
        let exit: Vec<T> = self.c().row_sums().into_iter().map(|s| -s).collect();
        let u = e.mul_vec(&ones(n));
        let v = e.mul_vec(&exit);
        let a = dot(&alpha_c, &v);
        let b = dot(alpha, &u);
        let c = dot(&alpha_c, &u);
        a * b + c * c
    }
}
