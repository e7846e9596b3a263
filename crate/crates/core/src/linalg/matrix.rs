use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix stored row-major.
///
/// Every constructor rejects non-finite entries, so a `SquareMatrix` is
/// always finite unless mutated through `IndexMut`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound = "T: Scalar")]
pub struct SquareMatrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![T::zero(); order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from nested rows, checking squareness and finiteness.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(order * order);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != order {
                return Err(Error::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: order,
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                data.push(v);
            }
        }
        Ok(Self { order, data })
    }

    /// Builds a matrix from a flat row-major slice.
    pub fn from_row_major(order: usize, data: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Empty);
        }
        if data.len() != order * order {
            return Err(Error::DimensionMismatch {
                expected: order * order,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / order,
                col: k % order,
            });
        }
        Ok(Self { order, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.order)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.order).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.order).all(|i| (0..self.order).all(|j| i == j || self[(i, j)] == T::zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.rows().map(|r| r.iter().copied().sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let n = self.order;
        (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.order, other.order);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.order);
        self.rows().map(|r| dot(r, x)).collect()
    }

    /// `x A` for a row vector `x`.
    pub fn vec_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.order);
        let n = self.order;
        let mut out = vec![T::zero(); n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Rank-one matrix `u vᵀ`.
    pub fn outer(u: &[T], v: &[T]) -> Self {
        assert_eq!(u.len(), v.len());
        let n = u.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = u[i] * v[j];
            }
        }
        out
    }

    /// Element type conversion.
    pub fn cast<U: Scalar>(&self) -> SquareMatrix<U> {
        SquareMatrix {
            order: self.order,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn ones<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.order + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.order + j]
    }
}

impl<T: Scalar> Add for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn add(self, rhs: Self) -> SquareMatrix<T> {
        assert_eq!(self.order, rhs.order);
        SquareMatrix {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn sub(self, rhs: Self) -> SquareMatrix<T> {
        assert_eq!(self.order, rhs.order);
        SquareMatrix {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn mul(self, rhs: Self) -> SquareMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for SquareMatrix<T> {
    type Error = Error;
    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Scalar> From<SquareMatrix<T>> for Vec<Vec<T>> {
    fn from(m: SquareMatrix<T>) -> Self {
        m.to_rows()
    }
}

impl<T: fmt::Debug> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.data.chunks_exact(self.order.max(1)))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(
            err,
            Error::NotSquare {
                row: 1,
                len: 1,
                expected: 2
            }
        );
    }

    #[test]
    fn rejects_nan() {
        let err = SquareMatrix::from_rows(vec![vec![1.0, f64::NAN], vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn vector_products() {
        let a = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(a.vec_mul(&[1.0, 1.0]), vec![4.0, 6.0]);
        let sq = &a * &a;
        assert_eq!(sq.to_rows(), vec![vec![7.0, 10.0], vec![15.0, 22.0]]);
        assert_eq!(a.norm_inf(), 7.0);
        assert_eq!(a.norm_one(), 6.0);
    }

    #[test]
    fn serde_as_nested_rows() {
        let a = SquareMatrix::from_rows(vec![vec![-1.0, 1.0], vec![0.5, -0.5]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[-1.0,1.0],[0.5,-0.5]]");
        let b: SquareMatrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<SquareMatrix<f64>>("[[1.0],[2.0]]").is_err());
    }
}
