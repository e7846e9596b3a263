//! Validated MAP models and their stationary structure.

mod model;
mod phase_type;
mod stationary;

pub use model::{validate_model, validate_model_with, MapClass, MapModel, ModelFile};
pub use phase_type::{ph_distribution, PhaseTypeDist, Start};
pub use stationary::{embedded_chain, stationary_pair, StationaryPair};

use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

/// The four-phase cyclic MMPP whose event-stationary hazard rate is not monotone.
///
/// `Q` cycles 1 → 2 → 3 → 4 → 1 at unit rate; phases 1 and 2 emit events at
/// rate 0.01 and phases 3 and 4 at rate 1.
pub fn cyclic_counterexample<T: Scalar>() -> MapModel<T> {
    let one = T::one();
    let mut q = SquareMatrix::zeros(4);
    for i in 0..4 {
        q[(i, i)] = -one;
        q[(i, (i + 1) % 4)] = one;
    }
    let rates = [T::of(0.01), T::of(0.01), one, one];
    MapModel::mmpp(&q, &rates).expect("counterexample model is valid")
}
