use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, expm, ones, Lu, SquareMatrix};
use crate::map::MapClass;
use crate::metrics::{check_grid, MapAnalysis};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Deviation matrix `D♯ = ∫₀^∞ (e^{Qu} − 𝟙π) du` of an irreducible generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DeviationMatrix<T> {
    matrix: SquareMatrix<T>,
    q: SquareMatrix<T>,
    pi: ProbVector<T>,
}

/// Residuals of the identities that characterize `D♯`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationResiduals<T> {
    /// `‖D♯𝟙‖∞`
    pub row_sums: T,
    /// `‖πD♯‖∞`
    pub pi_left: T,
    /// `‖(D♯ + 𝟙π)(𝟙π − Q) − I‖∞`
    pub inverse: T,
}

impl<T: Scalar> DeviationMatrix<T> {
    /// Builds `D♯ = (𝟙π − Q)⁻¹ − 𝟙π` and checks its defining identities.
    pub fn new(q: &SquareMatrix<T>, pi: &ProbVector<T>) -> Result<Self> {
        let n = q.order();
        let one_pi = SquareMatrix::outer(&ones(n), pi.as_slice());
        let fundamental = Lu::new(&(&one_pi - q))?.inverse();
        let dev = Self {
            matrix: &fundamental - &one_pi,
            q: q.clone(),
            pi: pi.clone(),
        };
        let r = dev.residuals();
        let worst = r.row_sums.max(r.pi_left).max(r.inverse);
        let tol = T::of(T::default_tolerances().cross_check) * T::one().max(dev.matrix.norm_inf());
        if worst > tol {
            return Err(Error::NumericFailure {
                context: "deviation matrix identities",
                magnitude: worst.as_f64(),
            });
        }
        Ok(dev)
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.matrix
    }

    pub fn generator(&self) -> &SquareMatrix<T> {
        &self.q
    }

    pub fn pi(&self) -> &ProbVector<T> {
        &self.pi
    }

    /// `Q⁻ = D♯ + 𝟙π = (𝟙π − Q)⁻¹`.
    pub fn fundamental(&self) -> SquareMatrix<T> {
        let n = self.q.order();
        &self.matrix + &SquareMatrix::outer(&ones(n), self.pi.as_slice())
    }

    /// `D♯(t) = ∫₀ᵗ (e^{Qu} − 𝟙π) du = D♯ − e^{Qt} D♯`.
    pub fn transient(&self, t: T) -> Result<SquareMatrix<T>> {
        let e = expm(&self.q, t)?;
        Ok(&self.matrix - &e.matmul(&self.matrix))
    }

    pub fn residuals(&self) -> DeviationResiduals<T> {
        let n = self.q.order();
        let inf = |v: Vec<T>| v.into_iter().map(|x| x.abs()).fold(T::zero(), T::max);
        let one_pi = SquareMatrix::outer(&ones(n), self.pi.as_slice());
        let prod = self.fundamental().matmul(&(&one_pi - &self.q));
        DeviationResiduals {
            row_sums: inf(self.matrix.row_sums()),
            pi_left: inf(self.matrix.vec_mul(self.pi.as_slice())),
            inverse: prod.max_abs_diff(&SquareMatrix::identity(n)),
        }
    }
}

impl<T: Scalar> MapAnalysis<'_, T> {
    pub fn deviation_matrix(&self) -> Result<DeviationMatrix<T>> {
        DeviationMatrix::new(self.model().q(), self.pi())
    }

    /// `πD D♯ D𝟙`, the margin of property (I).
    pub fn overdispersion_margin(&self) -> Result<T> {
        let dev = self.deviation_matrix()?;
        Ok(self.overdispersion_margin_with(&dev))
    }

    fn overdispersion_margin_with(&self, dev: &DeviationMatrix<T>) -> T {
        let pi_d = self.model().d().vec_mul(self.pi().as_slice());
        dot(&dev.matrix().vec_mul(&pi_d), &self.model().event_rates())
    }

    /// Same quantity written through `−C`: `π(−C) D♯ (−C)𝟙`. Agrees with
    /// [`overdispersion_margin`](Self::overdispersion_margin) for every MAP.
    pub fn overdispersion_margin_via_c(&self) -> Result<T> {
        let dev = self.deviation_matrix()?;
        let minus_c = self.model().c().scale(-T::one());
        let left = minus_c.vec_mul(self.pi().as_slice());
        let right = minus_c.mul_vec(&ones(self.model().order()));
        Ok(dot(&dev.matrix().vec_mul(&left), &right))
    }

    /// `d² = 1 + (2/λ*) πD D♯ D𝟙`.
    pub fn dispersion_index(&self) -> Result<T> {
        let margin = self.overdispersion_margin()?;
        let d2 = T::one() + T::of(2.0) * margin / self.lambda_star();
        if matches!(self.model().class(), MapClass::Mmpp | MapClass::Mspp) && d2 < T::one() - T::of(1e-12) {
            log::warn!(
                "{} with d² = {} below 1; the class guarantees d² ≥ 1",
                self.model().class(),
                d2
            );
        }
        Ok(d2)
    }

    /// `(t, E[N(t)], Var N(t))` with
    /// `Var N(t) = (λ* + 2πD D♯ D𝟙) t − 2 πD D♯ D♯(t) D𝟙`.
    pub fn variance_curve(&self, grid: &[T]) -> Result<Vec<(T, T, T)>> {
        check_grid(grid)?;
        let dev = self.deviation_matrix()?;
        let lambda = self.lambda_star();
        let pi_d = self.model().d().vec_mul(self.pi().as_slice());
        let a = dev.matrix().vec_mul(&pi_d);
        let b = self.model().event_rates();
        let linear = lambda + T::of(2.0) * dot(&a, &b);
        let dev_b = dev.matrix().mul_vec(&b);
        grid.iter()
            .map(|&t| {
                // D♯(t) b = D♯b − e^{Qt} D♯b
                let tail = expm(self.model().q(), t)?.mul_vec(&dev_b);
                let transient: Vec<T> = dev_b.iter().zip(&tail).map(|(&x, &y)| x - y).collect();
                let var = linear * t - T::of(2.0) * dot(&a, &transient);
                Ok((t, lambda * t, var))
            })
            .collect()
    }
}
