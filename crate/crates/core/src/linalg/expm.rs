//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! The approximant degree m ∈ {3, 5, 7, 9, 13} and the number of squarings
//! are chosen from the 1-norm of `A t` using the θ_m bounds that keep the
//! backward error of the `[m/m]` approximant below the `f64` unit roundoff.

use crate::error::{Error, Result};
use crate::linalg::{Lu, SquareMatrix};
use crate::scalar::Scalar;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

/// Coefficients b_j of the `[m/m]` Padé approximant to `exp`, normalized to b_0 = 1.
fn pade_coefficients<T: Scalar>(m: usize) -> Vec<T> {
    let mut b = Vec::with_capacity(m + 1);
    let mut c = 1.0f64;
    b.push(T::one());
    for j in 0..m {
        c *= (m - j) as f64 / (((2 * m - j) * (j + 1)) as f64);
        b.push(T::of(c));
    }
    b
}

/// Computes `e^{A t}` for `t ≥ 0`.
pub fn expm<T: Scalar>(a: &SquareMatrix<T>, t: T) -> Result<SquareMatrix<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "matrix exponential time must be finite and nonnegative, got {t}"
        )));
    }
    let n = a.order();
    if t == T::zero() {
        return Ok(SquareMatrix::identity(n));
    }
    let at = a.scale(t);
    if !at.is_finite() {
        return Err(Error::NumericFailure {
            context: "expm input",
            magnitude: at.max_abs().as_f64(),
        });
    }
    let norm = at.norm_one().as_f64();

    let result = match THETA[..4].iter().find(|(_, theta)| norm <= *theta) {
        Some(&(m, _)) => pade_low(&at, m)?,
        None => {
            let theta13 = THETA[4].1;
            let squarings = if norm > theta13 {
                (norm / theta13).log2().ceil() as i32
            } else {
                0
            };
            let scaled = at.scale(T::of(2f64.powi(-squarings)));
            let mut r = pade13(&scaled)?;
            for _ in 0..squarings {
                r = r.matmul(&r);
            }
            r
        }
    };

    if !result.is_finite() {
        return Err(Error::NumericFailure {
            context: "expm result",
            magnitude: norm,
        });
    }
    Ok(result)
}

fn pade_low<T: Scalar>(a: &SquareMatrix<T>, m: usize) -> Result<SquareMatrix<T>> {
    let n = a.order();
    let b = pade_coefficients::<T>(m);
    let a2 = a.matmul(a);
    // powers[k] = A^{2k}
    let mut powers = vec![SquareMatrix::identity(n), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u_inner = SquareMatrix::zeros(n);
    let mut v = SquareMatrix::zeros(n);
    for (k, p) in powers.iter().enumerate() {
        v = &v + &p.scale(b[2 * k]);
        if 2 * k < m {
            u_inner = &u_inner + &p.scale(b[2 * k + 1]);
        }
    }
    let u = a.matmul(&u_inner);
    pade_solve(&u, &v)
}

fn pade13<T: Scalar>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = a.order();
    let b = pade_coefficients::<T>(13);
    let ident = SquareMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let combo = |c6: T, c4: T, c2: T, c0: Option<T>| {
        let mut m = &(&a6.scale(c6) + &a4.scale(c4)) + &a2.scale(c2);
        if let Some(c0) = c0 {
            m = &m + &ident.scale(c0);
        }
        m
    };

    let u_hi = a6.matmul(&combo(b[13], b[11], b[9], None));
    let u = a.matmul(&(&u_hi + &combo(b[7], b[5], b[3], Some(b[1]))));
    let v_hi = a6.matmul(&combo(b[12], b[10], b[8], None));
    let v = &v_hi + &combo(b[6], b[4], b[2], Some(b[0]));
    pade_solve(&u, &v)
}

/// Solves `(V − U) R = (V + U)`.
fn pade_solve<T: Scalar>(u: &SquareMatrix<T>, v: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = u.order();
    let lu = Lu::new(&(v - u))?;
    let rhs = v + u;
    let mut out = SquareMatrix::zeros(n);
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = rhs[(i, j)];
        }
        let x = lu.solve(&col);
        for i in 0..n {
            out[(i, j)] = x[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_q() -> SquareMatrix<f64> {
        SquareMatrix::from_rows(vec![
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![1.0, 0.0, 0.0, -1.0],
        ])
        .unwrap()
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = expm(&SquareMatrix::<f64>::zeros(3), 5.0).unwrap();
        assert_eq!(e, SquareMatrix::identity(3));
    }

    #[test]
    fn at_time_zero_is_identity() {
        let e = expm(&cyclic_q(), 0.0).unwrap();
        assert!(e.max_abs_diff(&SquareMatrix::identity(4)) <= 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let e = expm(&SquareMatrix::from_diagonal(&[-1.0, -2.0]), 1.0).unwrap();
        let want = SquareMatrix::from_diagonal(&[(-1.0f64).exp(), (-2.0f64).exp()]);
        assert!(e.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn generator_rows_sum_to_one() {
        let e = expm(&cyclic_q(), 1.0).unwrap();
        for s in e.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_generator_closed_form() {
        // e^{Qt} for [[-a, a], [b, -b]] has off-diagonal a/(a+b)(1 - e^{-(a+b)t}).
        let (a, b) = (0.7f64, 2.1f64);
        let q = SquareMatrix::from_rows(vec![vec![-a, a], vec![b, -b]]).unwrap();
        for &t in &[1e-3, 0.1, 0.5, 2.0, 7.0, 40.0] {
            let e = expm(&q, t).unwrap();
            let off = a / (a + b) * (1.0 - (-(a + b) * t).exp());
            assert!((e[(0, 1)] - off).abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn nilpotent_exact() {
        // exp of a nilpotent Jordan block is the truncated series.
        let n = SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        for &t in &[0.01f64, 0.3, 1.5, 8.0] {
            let e = expm(&n, t).unwrap();
            assert!((e[(0, 1)] - t).abs() < 1e-13 * (1.0 + t));
            assert!((e[(0, 2)] - t * t / 2.0).abs() < 1e-13 * (1.0 + t * t));
        }
    }

    #[test]
    fn negative_time_rejected() {
        assert!(matches!(
            expm(&cyclic_q(), -1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn overflow_reported() {
        let a = SquareMatrix::from_diagonal(&[800.0]);
        assert!(matches!(
            expm(&a, 1.0),
            Err(Error::NumericFailure { .. })
        ));
    }

    #[test]
    fn single_precision() {
        let q: SquareMatrix<f32> = cyclic_q().cast();
        let e = expm(&q, 3.0f32).unwrap();
        for s in e.row_sums() {
            assert!((s - 1.0).abs() < 1e-5);
        }
    }
}
