//! Closed-form expressions for the two-state MMPP and the MSPP SCV band.
//!
//! These are evaluated directly from their explicit formulas and never call
//! into the matrix pipeline, so they can serve as an independent check on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::map::{MapClass, MapModel};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Two-state MMPP with event rates `λ₁, λ₂` and switching rates `σ₁` (1→2), `σ₂` (2→1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mmpp2Params<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub sigma1: T,
    pub sigma2: T,
}

/// Scalar summaries of a two-state MMPP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mmpp2Metrics<T> {
    pub scv: T,
    pub dispersion: T,
    /// `h′(t)·S(t)² = hazard_sign_factor · e^{−Bt}`; never positive.
    pub hazard_sign_factor: T,
}

impl<T: Scalar> Mmpp2Params<T> {
    pub fn new(lambda1: T, lambda2: T, sigma1: T, sigma2: T) -> Result<Self> {
        let p = Self {
            lambda1,
            lambda2,
            sigma1,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.sigma1, self.sigma2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("MMPP2 parameters must be finite".into()));
        }
        if !(self.sigma1 > T::zero() && self.sigma2 > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "switching rates must be positive, got sigma1 = {}, sigma2 = {}",
                self.sigma1, self.sigma2
            )));
        }
        if self.lambda1 < T::zero() || self.lambda2 < T::zero() {
            return Err(Error::InvalidParameter("event rates must be nonnegative".into()));
        }
        if self.lambda1 == T::zero() && self.lambda2 == T::zero() {
            return Err(Error::NoEvents);
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<MapModel<T>> {
        self.validate()?;
        let q = SquareMatrix::from_rows(vec![
            vec![-self.sigma1, self.sigma1],
            vec![self.sigma2, -self.sigma2],
        ])?;
        MapModel::mmpp(&q, &[self.lambda1, self.lambda2])
    }

    /// `σ₁σ₂(λ₁ − λ₂)²`, the factor shared by every deviation from Poisson.
    fn spread(&self) -> T {
        let dl = self.lambda1 - self.lambda2;
        self.sigma1 * self.sigma2 * dl * dl
    }

    fn sigma_sum(&self) -> T {
        self.sigma1 + self.sigma2
    }

    /// `σ₂λ₁ + σ₁λ₂`
    fn weighted_rate(&self) -> T {
        self.sigma2 * self.lambda1 + self.sigma1 * self.lambda2
    }

    pub fn lambda_star(&self) -> T {
        self.weighted_rate() / self.sigma_sum()
    }

    /// `B = σ₁ + σ₂ + λ₁ + λ₂`
    pub fn b(&self) -> T {
        self.sigma1 + self.sigma2 + self.lambda1 + self.lambda2
    }

    /// `A = σ₂λ₁ + λ₂(σ₁ + λ₁) = det(−C)`
    pub fn a(&self) -> T {
        self.sigma2 * self.lambda1 + self.lambda2 * (self.sigma1 + self.lambda1)
    }

    pub fn scv(&self) -> T {
        let s = self.sigma_sum();
        let two = T::of(2.0);
        T::one()
            + two * self.spread()
                / (s * s * (self.lambda2 * self.sigma1 + self.lambda1 * (self.lambda2 + self.sigma2)))
    }

    pub fn dispersion(&self) -> T {
        let s = self.sigma_sum();
        T::one() + T::of(2.0) * self.spread() / (s * s * self.weighted_rate())
    }

    /// `Var N(t) / E N(t)` for the time-stationary process, `t > 0`.
    pub fn variance_ratio(&self, t: T) -> T {
        let s = self.sigma_sum();
        let transient = T::of(2.0) * self.spread() / (s * s * s * self.weighted_rate() * t)
            * (T::one() - (-s * t).exp());
        self.dispersion() - transient
    }

    /// `h′(t)·S(t)²` for `T₁` started from `α`.
    pub fn hazard_numerator(&self, t: T) -> T {
        let w = self.weighted_rate();
        -self.a() * (-self.b() * t).exp() * self.spread() / (w * w)
    }

    /// `P(T₁^π > t) − P(T₁^α > t)`.
    pub fn gap(&self, t: T) -> T {
        let (a, b) = (self.a(), self.b());
        let disc = b * b - T::of(4.0) * a;
        assert!(
            disc >= T::zero(),
            "B^2 - 4A = {disc} must be nonnegative for a valid MMPP2"
        );
        let r = disc.sqrt();
        let half = T::of(0.5);
        if r == T::zero() {
            // limit of (e^{tR} − 1)/R as R → 0
            return (-half * t * b).exp() * t * self.spread()
                / (self.sigma_sum() * self.weighted_rate());
        }
        (-half * t * (b + r)).exp() * (t * r).exp_m1() * self.spread()
            / (self.sigma_sum() * self.weighted_rate() * r)
    }

    /// Time-stationary phase distribution, proportional to `(σ₂, σ₁)`.
    pub fn pi(&self) -> ProbVector<T> {
        ProbVector::new(vec![self.sigma2, self.sigma1]).expect("positive switching rates")
    }

    /// Event-stationary phase distribution, proportional to `(σ₂λ₁, σ₁λ₂)`.
    pub fn alpha(&self) -> ProbVector<T> {
        ProbVector::new(vec![self.sigma2 * self.lambda1, self.sigma1 * self.lambda2])
            .expect("at least one positive event rate")
    }

    /// The weighting `(σ₁λ₁, σ₂λ₂)`.
    ///
    /// This is *not* the event-stationary distribution; it differs from
    /// [`alpha`](Self::alpha) whenever `σ₁ ≠ σ₂` and both rates are positive,
    /// and neither [`gap`](Self::gap) nor [`hazard_numerator`](Self::hazard_numerator)
    /// is reproduced when it is used in place of `α`.
    pub fn swapped_alpha(&self) -> ProbVector<T> {
        ProbVector::new(vec![self.sigma1 * self.lambda1, self.sigma2 * self.lambda2])
            .expect("at least one positive event rate")
    }

    pub fn metrics(&self) -> Mmpp2Metrics<T> {
        let w = self.weighted_rate();
        Mmpp2Metrics {
            scv: self.scv(),
            dispersion: self.dispersion(),
            hazard_sign_factor: -self.a() * self.spread() / (w * w),
        }
    }
}

pub fn mmpp2_metrics<T: Scalar>(p: &Mmpp2Params<T>) -> Result<Mmpp2Metrics<T>> {
    p.validate()?;
    Ok(p.metrics())
}

/// Band `[1, 2κ²/γ² − 1]` for the SCV of an MSPP with exit rates `c_i = −C_ii`,
/// where `κ` is the arithmetic and `γ` the geometric mean of the extreme rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MsppScvBounds<T> {
    pub kappa: T,
    pub gamma: T,
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> MsppScvBounds<T> {
    pub fn from_rates(rates: &[T]) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Empty);
        }
        if rates.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidParameter("MSPP exit rates must be positive".into()));
        }
        let lo = rates.iter().copied().fold(T::infinity(), T::min);
        let hi = rates.iter().copied().fold(T::zero(), T::max);
        let kappa = (lo + hi) * T::of(0.5);
        let gamma = (lo * hi).sqrt();
        let upper = (T::of(2.0) * kappa * kappa / (gamma * gamma) - T::one()).max(T::one());
        Ok(Self {
            kappa,
            gamma,
            lower: T::one(),
            upper,
        })
    }

    pub fn contains(&self, scv: T, tolerance: T) -> bool {
        scv >= self.lower - tolerance && scv <= self.upper + tolerance
    }
}

pub fn mspp_scv_bounds<T: Scalar>(m: &MapModel<T>) -> Result<MsppScvBounds<T>> {
    if m.class() != MapClass::Mspp {
        return Err(Error::WrongClass {
            expected: MapClass::Mspp.name(),
            found: m.class().name(),
        });
    }
    let rates: Vec<T> = m.c().diagonal().into_iter().map(|c| -c).collect();
    MsppScvBounds::from_rates(&rates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l1: f64, l2: f64, s1: f64, s2: f64) -> Mmpp2Params<f64> {
        Mmpp2Params::new(l1, l2, s1, s2).unwrap()
    }

    #[test]
    fn hand_values() {
        let q = p(1.0, 3.0, 1.0, 1.0);
        assert!((q.scv() - 9.0 / 7.0).abs() < 1e-15);
        assert!((q.dispersion() - 1.5).abs() < 1e-15);
        assert_eq!(q.b(), 6.0);
        assert_eq!(q.a(), 7.0);
        assert!((q.lambda_star() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equal_rates_are_poisson() {
        let q = p(2.0, 2.0, 0.3, 1.7);
        assert_eq!(q.scv(), 1.0);
        assert_eq!(q.dispersion(), 1.0);
        for t in [0.0, 0.5, 4.0] {
            assert_eq!(q.gap(t), 0.0);
            assert_eq!(q.hazard_numerator(t), 0.0);
        }
        assert_eq!(q.variance_ratio(2.0), 1.0);
    }

    #[test]
    fn gap_shape() {
        let q = p(1.3, 0.4, 0.7, 2.1);
        assert_eq!(q.gap(0.0), 0.0);
        assert!(q.gap(1e-3) > 0.0);
        assert!(q.gap(10.0) > 0.0);
        assert!(q.hazard_numerator(1.0) < 0.0);
    }

    #[test]
    fn alpha_conventions_differ() {
        let q = p(1.3, 0.4, 0.7, 2.1);
        assert!(q.alpha().max_abs_diff(q.swapped_alpha().as_slice()) > 0.1);
        let sym = p(1.3, 0.4, 1.0, 1.0);
        assert!(sym.alpha().max_abs_diff(sym.swapped_alpha().as_slice()) < 1e-15);
    }

    #[test]
    fn one_silent_state() {
        let q = p(0.0, 5.0, 1.0, 2.0);
        assert!(q.scv() > 1.0);
        assert_eq!(q.alpha().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn invalid_params() {
        assert!(Mmpp2Params::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Mmpp2Params::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert_eq!(Mmpp2Params::new(0.0, 0.0, 1.0, 1.0), Err(Error::NoEvents));
        assert!(Mmpp2Params::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kantorovich_band() {
        let b = MsppScvBounds::from_rates(&[1.0f64, 4.0]).unwrap();
        assert_eq!((b.kappa, b.gamma), (2.5, 2.0));
        assert!((b.upper - 2.125).abs() < 1e-15);
        let b = MsppScvBounds::from_rates(&[1.0f64, 9.0, 3.0]).unwrap();
        assert!((b.upper - 41.0 / 9.0).abs() < 1e-14);
        let b = MsppScvBounds::from_rates(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(b.contains(1.0, 0.0));
        assert!(!b.contains(1.01, 1e-9));
    }

    #[test]
    fn band_requires_mspp() {
        let m = p(1.0, 3.0, 1.0, 1.0).to_model().unwrap();
        assert!(matches!(
            mspp_scv_bounds(&m),
            Err(Error::WrongClass { .. })
        ));
    }
}
