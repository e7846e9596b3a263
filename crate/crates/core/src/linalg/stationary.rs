use crate::error::{Error, Result};
use crate::linalg::{Lu, SquareMatrix};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Phases reachable from `start` along positive off-diagonal entries.
fn reachable<T: Scalar>(q: &SquareMatrix<T>, start: usize) -> Vec<bool> {
    let n = q.order();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if j != i && q[(i, j)] > T::zero() && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Returns a proper closed subset of phases if the transition graph of `q`
/// (positive off-diagonal entries) is not strongly connected.
///
/// The set of phases reachable from any phase is closed under transitions,
/// so the first phase that fails to reach everything yields the witness.
pub fn closed_subset<T: Scalar>(q: &SquareMatrix<T>) -> Option<Vec<usize>> {
    (0..q.order()).find_map(|i| {
        let seen = reachable(q, i);
        if seen.iter().all(|&s| s) {
            None
        } else {
            Some(seen.iter().enumerate().filter(|(_, &s)| s).map(|(j, _)| j).collect())
        }
    })
}

/// Solves `x Q = 0`, `x 𝟙 = 1` through the augmented system in which the last
/// equation is replaced by the normalization.
fn solve_augmented<T: Scalar>(q: &SquareMatrix<T>) -> Result<Vec<T>> {
    let n = q.order();
    let mut a = q.transpose();
    for j in 0..n {
        a[(n - 1, j)] = T::one();
    }
    let mut rhs = vec![T::zero(); n];
    rhs[n - 1] = T::one();
    let lu = Lu::new(&a).map_err(|_| Error::Reducible {
        closed_subset: closed_subset(q).unwrap_or_default(),
    })?;
    Ok(lu.solve(&rhs))
}

fn check_residual<T: Scalar>(q: &SquareMatrix<T>, x: &[T]) -> Result<()> {
    let tol = T::of(T::default_tolerances().stationary_residual) * T::one().max(q.norm_inf());
    let residual = q.vec_mul(x).iter().map(|v| v.abs()).fold(T::zero(), T::max);
    if residual > tol {
        return Err(Error::NumericFailure {
            context: "stationary vector residual",
            magnitude: residual.as_f64(),
        });
    }
    Ok(())
}

/// Stationary distribution π of an irreducible generator: `πQ = 0`, `π𝟙 = 1`,
/// every entry strictly positive.
pub fn left_null_prob_vector<T: Scalar>(q: &SquareMatrix<T>) -> Result<ProbVector<T>> {
    let x = solve_augmented(q)?;
    if x.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::Reducible {
            closed_subset: closed_subset(q).unwrap_or_default(),
        });
    }
    let pi = ProbVector::new(x)?;
    check_residual(q, pi.as_slice())?;
    Ok(pi)
}

/// Like [`left_null_prob_vector`] but allows zero entries, for generators
/// with transient phases and a single closed class (e.g. `P − I` for an
/// embedded chain that never lands in some phase).
pub(crate) fn left_null_prob_vector_nonneg<T: Scalar>(q: &SquareMatrix<T>) -> Result<ProbVector<T>> {
    let x = solve_augmented(q)?;
    let pi = ProbVector::new(x)?;
    check_residual(q, pi.as_slice())?;
    Ok(pi)
}
