use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

/// LU factorization with partial pivoting, `P A = L U`.
///
/// Factor once and reuse for repeated solves against the same matrix, as
/// the moment computations do with `(-C)`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: SquareMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Factorizes `a` with the default pivot tolerance.
    pub fn new(a: &SquareMatrix<T>) -> Result<Self> {
        Self::with_pivot_tolerance(a, T::default_tolerances().pivot)
    }

    /// Factorizes `a`; fails when a pivot falls below `rel_tol * ‖A‖∞`.
    pub fn with_pivot_tolerance(a: &SquareMatrix<T>, rel_tol: f64) -> Result<Self> {
        let n = a.order();
        let norm = a.norm_inf();
        let threshold = T::of(rel_tol) * norm;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs > threshold) || norm == T::zero() {
                return Err(Error::Singular {
                    column: k,
                    pivot: pivot_abs.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn order(&self) -> usize {
        self.lu.order()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.order();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `x A = b` for a row vector `x`.
    pub fn solve_left(&self, b: &[T]) -> Vec<T> {
        // xA = b  <=>  Aᵀxᵀ = bᵀ, with Aᵀ = Uᵀ Lᵀ P.
        let n = self.order();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn inverse(&self) -> SquareMatrix<T> {
        let n = self.order();
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = T::zero();
        }
        inv
    }
}

/// Solves `A x = b` by pivoted elimination.
pub fn solve_linear<T: Scalar>(a: &SquareMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            found: b.len(),
        });
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse<T: Scalar>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    Ok(Lu::new(a)?.inverse())
}

/// Residual bound promised by [`solve_linear`]: `‖Ax − b‖∞ ≤ 1e-10 (1 + ‖b‖∞)`.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &SquareMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_solve() {
        let x = solve_linear(&SquareMatrix::identity(2), &[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
    }

    #[test]
    fn diagonal_solve() {
        let a = SquareMatrix::from_diagonal(&[2.0, 4.0]);
        assert_eq!(solve_linear(&a, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn mmpp2_minus_c_residual() {
        // sigma1 = sigma2 = lambda1 = 1, lambda2 = 2
        let minus_c = SquareMatrix::from_rows(vec![vec![2.0, -1.0], vec![-1.0, 3.0]]).unwrap();
        let b = [1.0, 1.0];
        let x = solve_linear(&minus_c, &b).unwrap();
        assert!(residual(&minus_c, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0]),
            Err(Error::Singular { column: 1, .. })
        ));
        assert!(matches!(
            solve_linear(&SquareMatrix::<f64>::zeros(3), &[1.0; 3]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            solve_linear(&SquareMatrix::<f64>::identity(2), &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            n in 1usize..9,
            seed in proptest::collection::vec(-1.0f64..1.0, 81),
            rhs in proptest::collection::vec(-10.0f64..10.0, 9),
        ) {
            let mut a = SquareMatrix::from_row_major(n, seed[..n * n].to_vec()).unwrap();
            for i in 0..n {
                a[(i, i)] += n as f64 + 1.0;
            }
            let b = &rhs[..n];
            let lu = Lu::new(&a).unwrap();
            let x = lu.solve(b);
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(residual(&a, &x, b) <= SOLVE_RESIDUAL * (1.0 + bnorm));

            let y = lu.solve_left(b);
            let ya = a.vec_mul(&y);
            let r = ya.iter().zip(b).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max);
            prop_assert!(r <= SOLVE_RESIDUAL * (1.0 + bnorm));

            let prod = &a * &lu.inverse();
            prop_assert!(prod.max_abs_diff(&SquareMatrix::identity(n)) < 1e-12);
        }
    }
}
