use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::map::MapModel;

/// A random model and the number of degenerate draws rejected on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawn {
    pub model: MapModel<f64>,
    pub redraws: u32,
}

const MAX_REDRAWS: u32 = 1000;

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "random generators need order >= 2, got {order}"
        )));
    }
    Ok(())
}

fn unit_exponential<R: Rng>(rng: &mut R) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

/// Retries `draw` until it yields a model, counting the rejects.
fn redraw<R: Rng>(rng: &mut R, mut draw: impl FnMut(&mut R) -> Option<Result<MapModel<f64>>>) -> Result<Drawn> {
    for redraws in 0..MAX_REDRAWS {
        if let Some(model) = draw(rng) {
            return Ok(Drawn {
                model: model?,
                redraws,
            });
        }
    }
    Err(Error::NumericFailure {
        context: "random generator kept producing degenerate draws",
        magnitude: MAX_REDRAWS as f64,
    })
}

/// MMPP with i.i.d. U(0,1) off-diagonal generator entries and Exp(1) event rates.
pub fn random_mmpp<R: Rng>(order: usize, rng: &mut R) -> Result<Drawn> {
    check_order(order)?;
    redraw(rng, |rng| {
        let mut q = SquareMatrix::zeros(order);
        for i in 0..order {
            for j in 0..order {
                if i != j {
                    q[(i, j)] = rng.gen::<f64>();
                }
            }
        }
        let rates: Vec<f64> = (0..order).map(|_| unit_exponential(rng)).collect();
        let degenerate = q.as_slice().iter().enumerate().any(|(k, &v)| k % (order + 1) != 0 && v == 0.0)
            || rates.contains(&0.0);
        finish_mmpp(q, &rates, degenerate)
    })
}

/// MMPP whose phase moves only `i → i+1 mod p`, with U(0,1) rates and Exp(1) event rates.
pub fn random_cyclic_mmpp<R: Rng>(order: usize, rng: &mut R) -> Result<Drawn> {
    check_order(order)?;
    redraw(rng, |rng| {
        let cycle: Vec<f64> = (0..order).map(|_| rng.gen::<f64>()).collect();
        let rates: Vec<f64> = (0..order).map(|_| unit_exponential(rng)).collect();
        let degenerate = cycle.iter().chain(&rates).any(|&v| v == 0.0);
        finish_mmpp(cyclic_generator(&cycle), &rates, degenerate)
    })
}

/// Generator with rate `cycle[i]` from `i` to `i+1 mod p` and no other transitions.
pub fn cyclic_generator(cycle: &[f64]) -> SquareMatrix<f64> {
    let p = cycle.len();
    let mut q = SquareMatrix::zeros(p);
    for (i, &r) in cycle.iter().enumerate() {
        q[(i, (i + 1) % p)] += r;
        q[(i, i)] -= r;
    }
    q
}

fn finish_mmpp(mut q: SquareMatrix<f64>, rates: &[f64], degenerate: bool) -> Option<Result<MapModel<f64>>> {
    if degenerate {
        return None;
    }
    let n = q.order();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        q[(i, i)] = -off;
    }
    Some(MapModel::mmpp(&q, rates))
}

/// MSPP with `c_i ~ U(0.1, 5)` and each row of `D` a random split of `c_i`.
pub fn random_mspp<R: Rng>(order: usize, rng: &mut R) -> Result<Drawn> {
    check_order(order)?;
    redraw(rng, |rng| {
        let exits: Vec<f64> = (0..order).map(|_| rng.gen_range(0.1..5.0)).collect();
        let mut d = SquareMatrix::zeros(order);
        let mut degenerate = false;
        for (i, &c) in exits.iter().enumerate() {
            let w: Vec<f64> = (0..order).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = w.iter().sum();
            degenerate |= w.contains(&0.0);
            let mut acc = 0.0;
            for j in 0..order - 1 {
                d[(i, j)] = c * w[j] / total;
                acc += d[(i, j)];
            }
            d[(i, order - 1)] = c - acc;
            degenerate |= d[(i, order - 1)] <= 0.0;
        }
        if degenerate {
            return None;
        }
        let c = SquareMatrix::from_diagonal(&exits.iter().map(|v| -v).collect::<Vec<_>>());
        Some(MapModel::new(c, d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{cyclic_counterexample, MapClass};
    use crate::simulate::rng_for;

    #[test]
    fn dense_draws_are_valid_mmpps() {
        let mut rng = rng_for(5, 0);
        for _ in 0..1000 {
            let d = random_mmpp(4, &mut rng).unwrap();
            assert_eq!(d.model.class(), MapClass::Mmpp);
            assert_eq!(d.redraws, 0);
        }
    }

    #[test]
    fn dense_draw_is_reproducible() {
        let a = random_mmpp(3, &mut rng_for(42, 3)).unwrap();
        let b = random_mmpp(3, &mut rng_for(42, 3)).unwrap();
        assert_eq!(a.model.to_json(), b.model.to_json());
    }

    #[test]
    fn cyclic_pattern() {
        let mut rng = rng_for(6, 0);
        for _ in 0..200 {
            let m = random_cyclic_mmpp(5, &mut rng).unwrap().model;
            assert_eq!(m.class(), MapClass::Mmpp);
            let q = m.q();
            let positive = (0..5)
                .flat_map(|i| (0..5).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && q[(i, j)] > 0.0)
                .count();
            assert_eq!(positive, 5);
            assert!((0..5).all(|i| q[(i, (i + 1) % 5)] > 0.0));
        }
    }

    #[test]
    fn unit_cycle_reproduces_counterexample() {
        let q = cyclic_generator(&[1.0; 4]);
        let m = MapModel::mmpp(&q, &[0.01, 0.01, 1.0, 1.0]).unwrap();
        assert_eq!(m, cyclic_counterexample::<f64>());
    }

    #[test]
    fn mspp_draws() {
        let mut rng = rng_for(7, 0);
        for _ in 0..500 {
            let m = random_mspp(3, &mut rng).unwrap().model;
            assert_eq!(m.class(), MapClass::Mspp);
            for c in m.c().diagonal() {
                assert!((-5.0..=-0.1).contains(&c));
            }
        }
    }

    #[test]
    fn order_one_rejected() {
        assert!(random_mmpp(1, &mut rng_for(1, 0)).is_err());
        assert!(random_cyclic_mmpp(1, &mut rng_for(1, 0)).is_err());
        assert!(random_mspp(0, &mut rng_for(1, 0)).is_err());
    }
}
