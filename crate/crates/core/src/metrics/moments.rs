use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, ones};
use crate::metrics::MapAnalysis;
use crate::scalar::Scalar;

/// The two algebraic routes to `c²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScvRoutes<T> {
    /// `M₂ / M₁² − 1`.
    pub from_moments: T,
    /// `2 (πC𝟙)(πC⁻¹𝟙) − 1`.
    pub from_product: T,
}

impl<T: Scalar> MapAnalysis<'_, T> {
    /// `(−C)^{−k}𝟙` by `k` solves against the cached factorization.
    fn minus_c_inverse_power_ones(&self, k: u32) -> Vec<T> {
        let mut x = ones(self.model().order());
        for _ in 0..k {
            x = self.minus_c.solve(&x);
        }
        x
    }

    /// `M_k = k! α(−C)^{−k}𝟙`.
    pub fn moment(&self, k: u32) -> Result<T> {
        if k == 0 {
            return Err(Error::InvalidParameter("moment order must be positive".into()));
        }
        let x = self.minus_c_inverse_power_ones(k);
        let factorial = (1..=k).fold(T::one(), |acc, i| acc * T::of(i as f64));
        Ok(factorial * dot(self.alpha().as_slice(), &x))
    }

    /// `πC𝟙 · πC⁻¹𝟙`; equals `(c² + 1) / 2`.
    pub fn scv_product(&self) -> T {
        let pi = self.pi().as_slice();
        let pi_c_one = dot(&self.c().vec_mul(pi), &ones(pi.len()));
        let pi_c_inv_one = -dot(pi, &self.minus_c_inverse_power_ones(1));
        pi_c_one * pi_c_inv_one
    }

    pub fn scv_routes(&self) -> Result<ScvRoutes<T>> {
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        Ok(ScvRoutes {
            from_moments: m2 / (m1 * m1) - T::one(),
            from_product: T::of(2.0) * self.scv_product() - T::one(),
        })
    }

    /// Moment-based `c²`, cross-checked against the product form.
    pub fn scv(&self) -> Result<T> {
        let routes = self.scv_routes()?;
        let tol = T::of(T::default_tolerances().cross_check);
        let scale = T::one() + routes.from_moments.abs();
        if (routes.from_moments - routes.from_product).abs() > tol * scale {
            return Err(Error::RouteDisagreement {
                quantity: "scv",
                first: routes.from_moments.as_f64(),
                second: routes.from_product.as_f64(),
            });
        }
        Ok(routes.from_moments)
    }

    /// `E[T₁^π] = π(−C)⁻¹𝟙`, the mean wait to the first event from a
    /// time-stationary start.
    pub fn mean_first_time_stationary(&self) -> T {
        dot(self.pi().as_slice(), &self.minus_c_inverse_power_ones(1))
    }

    /// `½ λ* E[(T₁^α)²] = λ* α(−C)⁻²𝟙`, which equals
    /// [`mean_first_time_stationary`](Self::mean_first_time_stationary) for
    /// every stationary simple point process.
    pub fn mean_first_from_palm(&self) -> T {
        self.lambda_star() * dot(self.alpha().as_slice(), &self.minus_c_inverse_power_ones(2))
    }
}
