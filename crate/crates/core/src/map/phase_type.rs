use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, expm, ones, Lu, SquareMatrix};
use crate::map::{stationary_pair, MapModel};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Initial phase convention for the first inter-event time `T₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound = "T: Scalar")]
pub enum Start<T> {
    /// η = π: the counting process has stationary increments.
    TimeStationary,
    /// η = α: the clock starts at an event epoch.
    EventStationary,
    Custom(ProbVector<T>),
}

/// Phase-type distribution `PH(η, C)`: `P(T > t) = η e^{Ct} 𝟙`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTypeDist<T> {
    eta: ProbVector<T>,
    c: SquareMatrix<T>,
    exit: Vec<T>,
}

impl<T: Scalar> PhaseTypeDist<T> {
    /// `c` must be a sub-generator; the exit vector is `−C𝟙`.
    pub fn new(eta: ProbVector<T>, c: SquareMatrix<T>) -> Result<Self> {
        if eta.len() != c.order() {
            return Err(Error::DimensionMismatch {
                expected: c.order(),
                found: eta.len(),
            });
        }
        let exit = c.row_sums().into_iter().map(|s| -s).collect();
        Ok(Self { eta, c, exit })
    }

    pub fn eta(&self) -> &ProbVector<T> {
        &self.eta
    }

    pub fn sub_generator(&self) -> &SquareMatrix<T> {
        &self.c
    }

    /// `η e^{Ct}` as a row vector.
    pub fn phase_weights(&self, t: T) -> Result<Vec<T>> {
        Ok(expm(&self.c, t)?.vec_mul(self.eta.as_slice()))
    }

    pub fn survival(&self, t: T) -> Result<T> {
        Ok(self.phase_weights(t)?.into_iter().sum())
    }

    pub fn cdf(&self, t: T) -> Result<T> {
        Ok(T::one() - self.survival(t)?)
    }

    pub fn density(&self, t: T) -> Result<T> {
        Ok(dot(&self.phase_weights(t)?, &self.exit))
    }

    pub fn hazard(&self, t: T) -> Result<T> {
        let w = self.phase_weights(t)?;
        let s: T = w.iter().copied().sum();
        Ok(dot(&w, &self.exit) / s)
    }

    /// `k! η (−C)^{−k} 𝟙` by iterated solves.
    pub fn moment(&self, k: u32) -> Result<T> {
        if k == 0 {
            return Ok(T::one());
        }
        let lu = Lu::new(&self.c.scale(-T::one()))?;
        let mut x = ones(self.c.order());
        let mut factorial = T::one();
        for i in 1..=k {
            x = lu.solve(&x);
            factorial *= T::of(i as f64);
        }
        Ok(factorial * dot(self.eta.as_slice(), &x))
    }
}

/// Distribution of `T₁` under the requested start.
pub fn ph_distribution<T: Scalar>(m: &MapModel<T>, start: &Start<T>) -> Result<PhaseTypeDist<T>> {
    let eta = match start {
        Start::TimeStationary => stationary_pair(m)?.pi,
        Start::EventStationary => stationary_pair(m)?.alpha,
        Start::Custom(v) => v.clone(),
    };
    PhaseTypeDist::new(eta, m.c().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_example() -> MapModel<f64> {
        let q = SquareMatrix::from_rows(vec![
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![1.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        MapModel::mmpp(&q, &[0.01, 0.01, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn poisson_is_exponential_either_way() {
        let m = MapModel::poisson(2.0).unwrap();
        for start in [Start::TimeStationary, Start::EventStationary] {
            let ph = ph_distribution(&m, &start).unwrap();
            assert_eq!(ph.sub_generator().to_rows(), vec![vec![-2.0]]);
            assert!((ph.survival(0.7).unwrap() - (-1.4f64).exp()).abs() < 1e-15);
            assert!((ph.hazard(3.0).unwrap() - 2.0).abs() < 1e-12);
            assert!((ph.moment(2).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn time_stationary_eta_is_pi() {
        let m = cyclic_example();
        let ph = ph_distribution(&m, &Start::TimeStationary).unwrap();
        assert_eq!(ph.eta(), &stationary_pair(&m).unwrap().pi);
    }

    #[test]
    fn event_stationary_eta_is_fixed_point() {
        let m = cyclic_example();
        let ph = ph_distribution(&m, &Start::EventStationary).unwrap();
        let p = crate::map::embedded_chain(&m).unwrap();
        let next = p.vec_mul(ph.eta().as_slice());
        assert!(ph.eta().max_abs_diff(&next) < 1e-10);
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let ph = ph_distribution(&cyclic_example(), &Start::EventStationary).unwrap();
        assert!((ph.survival(0.0).unwrap() - 1.0).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 1..=100 {
            let s = ph.survival(k as f64 * 0.25).unwrap();
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn custom_start_dimension_checked() {
        let m = cyclic_example();
        let eta = ProbVector::uniform(3);
        assert!(matches!(
            ph_distribution(&m, &Start::Custom(eta)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
