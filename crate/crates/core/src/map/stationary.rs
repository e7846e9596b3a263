use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, left_null_prob_vector, left_null_prob_vector_nonneg, ones, Lu, SquareMatrix};
use crate::map::MapModel;
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Time-stationary and event-stationary phase distributions of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StationaryPair<T> {
    /// Phase distribution at an arbitrary time: `πQ = 0`.
    pub pi: ProbVector<T>,
    /// Phase distribution just after an event: `α = πD / πD𝟙`.
    pub alpha: ProbVector<T>,
    /// Long-run event rate `πD𝟙`.
    pub lambda_star: T,
}

/// Computes π, α and λ*.
///
/// α is taken from `πD` normalized; the fixed point of the embedded chain
/// `P = (−C)⁻¹D` is solved independently and must agree within `1e-10`.
pub fn stationary_pair<T: Scalar>(m: &MapModel<T>) -> Result<StationaryPair<T>> {
    let pi = left_null_prob_vector(m.q())?;
    let pi_d = m.d().vec_mul(pi.as_slice());
    let lambda_star: T = pi_d.iter().copied().sum();
    let alpha = ProbVector::new(pi_d)?;

    let tol = T::of(T::default_tolerances().cross_check);
    let via_c = -dot(&m.c().vec_mul(pi.as_slice()), &ones(m.order()));
    if (via_c - lambda_star).abs() > tol * lambda_star {
        return Err(Error::RouteDisagreement {
            quantity: "lambda_star",
            first: lambda_star.as_f64(),
            second: via_c.as_f64(),
        });
    }

    let p = embedded_chain(m)?;
    let fixed = left_null_prob_vector_nonneg(&(&p - &SquareMatrix::identity(m.order())))?;
    let diff = alpha.max_abs_diff(fixed.as_slice());
    if diff > tol / T::of(10.0) {
        return Err(Error::RouteDisagreement {
            quantity: "alpha",
            first: 0.0,
            second: diff.as_f64(),
        });
    }

    Ok(StationaryPair {
        pi,
        alpha,
        lambda_star,
    })
}

impl<T: Scalar> StationaryPair<T> {
    /// π recovered from α as `λ* α (−C)⁻¹`.
    pub fn pi_from_alpha(&self, m: &MapModel<T>) -> Result<Vec<T>> {
        let lu = Lu::new(&m.c().scale(-T::one()))?;
        Ok(lu
            .solve_left(self.alpha.as_slice())
            .into_iter()
            .map(|v| v * self.lambda_star)
            .collect())
    }
}

/// Transition matrix `P = (−C)⁻¹D` of the phase seen just after successive events.
pub fn embedded_chain<T: Scalar>(m: &MapModel<T>) -> Result<SquareMatrix<T>> {
    let n = m.order();
    let lu = Lu::new(&m.c().scale(-T::one()))?;
    let mut p = SquareMatrix::zeros(n);
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = m.d()[(i, j)];
        }
        let x = lu.solve(&col);
        for i in 0..n {
            // clamp rounding noise; P is entrywise nonnegative
            p[(i, j)] = x[i].max(T::zero());
        }
    }
    let tol = T::of(T::default_tolerances().cross_check / 10.0);
    for s in p.row_sums() {
        if (s - T::one()).abs() > tol {
            return Err(Error::NumericFailure {
                context: "embedded chain row sum",
                magnitude: (s - T::one()).abs().as_f64(),
            });
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mmpp2(l1: f64, l2: f64, s1: f64, s2: f64) -> MapModel<f64> {
        let q = SquareMatrix::from_rows(vec![vec![-s1, s1], vec![s2, -s2]]).unwrap();
        MapModel::mmpp(&q, &[l1, l2]).unwrap()
    }

    #[test]
    fn poisson_pair() {
        let sp = stationary_pair(&MapModel::poisson(3.0f64).unwrap()).unwrap();
        assert_eq!(sp.pi.as_slice(), &[1.0]);
        assert_eq!(sp.alpha.as_slice(), &[1.0]);
        assert!((sp.lambda_star - 3.0).abs() < 1e-15);
    }

    #[test]
    fn mmpp2_pi_and_alpha() {
        let (l1, l2, s1, s2) = (1.3, 0.4, 0.7, 2.1);
        let sp = stationary_pair(&mmpp2(l1, l2, s1, s2)).unwrap();
        let pi = [s2 / (s1 + s2), s1 / (s1 + s2)];
        assert!(sp.pi.max_abs_diff(&pi) < 1e-14);
        // πD normalized: proportional to (σ2 λ1, σ1 λ2)
        let z = s2 * l1 + s1 * l2;
        assert!(sp.alpha.max_abs_diff(&[s2 * l1 / z, s1 * l2 / z]) < 1e-14);
        // and not the (σ1 λ1, σ2 λ2) weighting
        let w = s1 * l1 + s2 * l2;
        assert!(sp.alpha.max_abs_diff(&[s1 * l1 / w, s2 * l2 / w]) > 0.1);
    }

    #[test]
    fn pi_recovered_from_alpha() {
        let m = mmpp2(1.0, 3.0, 1.0, 1.0);
        let sp = stationary_pair(&m).unwrap();
        let back = sp.pi_from_alpha(&m).unwrap();
        assert!(sp.pi.max_abs_diff(&back) < 1e-12);
    }

    #[test]
    fn embedded_chain_examples() {
        let p = embedded_chain(&MapModel::poisson(2.5).unwrap()).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0]]);

        let c = SquareMatrix::from_diagonal(&[-1.0, -4.0]);
        let d = SquareMatrix::from_rows(vec![vec![0.25, 0.75], vec![3.0, 1.0]]).unwrap();
        let m = MapModel::new(c, d).unwrap();
        let p = embedded_chain(&m).unwrap();
        let want = SquareMatrix::from_rows(vec![vec![0.25, 0.75], vec![0.75, 0.25]]).unwrap();
        assert!(p.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn zero_rate_phase_has_zero_alpha() {
        let m = mmpp2(0.0, 2.0, 1.0, 1.0);
        let sp = stationary_pair(&m).unwrap();
        assert_eq!(sp.alpha[0], 0.0);
        assert!((sp.alpha[1] - 1.0).abs() < 1e-15);
    }
}
