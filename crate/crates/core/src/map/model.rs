use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{closed_subset, SquareMatrix};
use crate::scalar::Scalar;
use crate::tolerance::Tolerances;

/// Structural class of a validated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapClass {
    /// Neither `C` nor `D` is diagonal.
    GeneralMap,
    /// Diagonal `D`: Poisson rates modulated by the phase process.
    Mmpp,
    /// Diagonal `C`: every phase change is itself an event.
    Mspp,
}

impl MapClass {
    pub fn name(self) -> &'static str {
        match self {
            MapClass::GeneralMap => "general MAP",
            MapClass::Mmpp => "MMPP",
            MapClass::Mspp => "MSPP",
        }
    }
}

impl fmt::Display for MapClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// On-disk form of a model: `{"C": [[...]], "D": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelFile<T> {
    #[serde(rename = "C")]
    pub c: Vec<Vec<T>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<T>>,
}

/// A validated Markovian arrival process `(C, D)`.
///
/// Invariants established by [`validate_model`]:
/// - `C` has a strictly negative diagonal and nonnegative off-diagonal,
/// - `D ≥ 0` entrywise and `D ≠ 0`,
/// - `Q = C + D` has zero row sums and is irreducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile<T>", into = "ModelFile<T>")]
#[serde(bound = "T: Scalar")]
pub struct MapModel<T> {
    c: SquareMatrix<T>,
    d: SquareMatrix<T>,
    q: SquareMatrix<T>,
    class: MapClass,
}

impl<T: Scalar> MapModel<T> {
    pub fn new(c: SquareMatrix<T>, d: SquareMatrix<T>) -> Result<Self> {
        validate_model(c, d)
    }

    /// Poisson process of the given rate as an order-1 MAP.
    pub fn poisson(rate: T) -> Result<Self> {
        validate_model(
            SquareMatrix::from_diagonal(&[-rate]),
            SquareMatrix::from_diagonal(&[rate]),
        )
    }

    /// MMPP with modulating generator `q` and per-phase event rates.
    pub fn mmpp(q: &SquareMatrix<T>, rates: &[T]) -> Result<Self> {
        if rates.len() != q.order() {
            return Err(Error::DimensionMismatch {
                expected: q.order(),
                found: rates.len(),
            });
        }
        let d = SquareMatrix::from_diagonal(rates);
        validate_model(q - &d, d)
    }

    pub fn order(&self) -> usize {
        self.c.order()
    }

    /// Phase transitions without events.
    pub fn c(&self) -> &SquareMatrix<T> {
        &self.c
    }

    /// Transitions accompanied by an event.
    pub fn d(&self) -> &SquareMatrix<T> {
        &self.d
    }

    /// Generator `C + D` of the phase process.
    pub fn q(&self) -> &SquareMatrix<T> {
        &self.q
    }

    pub fn class(&self) -> MapClass {
        self.class
    }

    /// `D𝟙`, the event rate out of each phase.
    pub fn event_rates(&self) -> Vec<T> {
        self.d.row_sums()
    }

    pub fn to_file(&self) -> ModelFile<T> {
        ModelFile {
            c: self.c.to_rows(),
            d: self.d.to_rows(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> MapModel<U> {
        MapModel {
            c: self.c.cast(),
            d: self.d.cast(),
            q: self.q.cast(),
            class: self.class,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile<T> = serde_json::from_str(s)?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("model serializes")
    }
}

impl<T: Scalar> TryFrom<ModelFile<T>> for MapModel<T> {
    type Error = Error;
    fn try_from(f: ModelFile<T>) -> Result<Self> {
        let c = SquareMatrix::from_rows(f.c).map_err(|e| Error::Parse(format!("matrix C: {e}")))?;
        let d = SquareMatrix::from_rows(f.d).map_err(|e| Error::Parse(format!("matrix D: {e}")))?;
        validate_model(c, d)
    }
}

impl<T: Scalar> From<MapModel<T>> for ModelFile<T> {
    fn from(m: MapModel<T>) -> Self {
        m.to_file()
    }
}

/// Validates `(C, D)` with the default tolerances for `T`.
pub fn validate_model<T: Scalar>(c: SquareMatrix<T>, d: SquareMatrix<T>) -> Result<MapModel<T>> {
    validate_model_with(c, d, &T::default_tolerances())
}

pub fn validate_model_with<T: Scalar>(
    c: SquareMatrix<T>,
    d: SquareMatrix<T>,
    tol: &Tolerances,
) -> Result<MapModel<T>> {
    let p = c.order();
    if d.order() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: d.order(),
        });
    }
    for m in [&c, &d] {
        for i in 0..p {
            for j in 0..p {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
    }

    for i in 0..p {
        for j in 0..p {
            let v = c[(i, j)];
            if i == j && !(v < T::zero()) {
                return Err(Error::SignPattern {
                    matrix: "C",
                    row: i,
                    col: j,
                    value: v.as_f64(),
                    rule: "diagonal entries must be strictly negative",
                });
            }
            if i != j && v < T::zero() {
                return Err(Error::SignPattern {
                    matrix: "C",
                    row: i,
                    col: j,
                    value: v.as_f64(),
                    rule: "off-diagonal entries must be nonnegative",
                });
            }
            let w = d[(i, j)];
            if w < T::zero() {
                return Err(Error::SignPattern {
                    matrix: "D",
                    row: i,
                    col: j,
                    value: w.as_f64(),
                    rule: "entries must be nonnegative",
                });
            }
        }
    }
    if d.max_abs() == T::zero() {
        return Err(Error::NoEvents);
    }

    let q = &c + &d;
    let mut worst: Option<(usize, T, T)> = None;
    for i in 0..p {
        let row = q.row(i);
        let sum: T = row.iter().copied().sum();
        let scale = c[(i, i)].abs();
        let relative = sum.abs() / scale;
        if relative > T::of(tol.row_sum) && worst.map_or(true, |(_, _, r)| relative > r) {
            worst = Some((i, sum, relative));
        }
    }
    if let Some((row, residual, _)) = worst {
        return Err(Error::RowSum {
            row,
            residual: residual.as_f64(),
        });
    }

    if let Some(closed) = closed_subset(&q) {
        return Err(Error::Reducible {
            closed_subset: closed,
        });
    }

    let class = if d.is_diagonal() {
        MapClass::Mmpp
    } else if c.is_diagonal() {
        MapClass::Mspp
    } else {
        MapClass::GeneralMap
    };
    Ok(MapModel { c, d, q, class })
}
