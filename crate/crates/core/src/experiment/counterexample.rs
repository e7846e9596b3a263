use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::map::cyclic_counterexample;
use crate::metrics::{Dip, HazardCurve, MapAnalysis, MetricsReport, Property, TimeGrid};
use crate::tolerance;

/// `{0, 0.01, …, 10}`.
pub const COUNTEREXAMPLE_GRID: TimeGrid = TimeGrid {
    start: 0.0,
    stop: 10.0,
    step: 0.01,
};

const DIP_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub curve: HazardCurve<f64>,
    pub dip: Dip<f64>,
    /// `αD𝟙`, which `h(0)` must equal.
    pub initial_intensity: f64,
    pub report: MetricsReport<f64>,
}

/// Hazard of `T₁^α` for the four-phase cyclic MMPP with rates
/// `(0.01, 0.01, 1, 1)`, together with its property verdicts.
///
/// Fails with [`Error::Regression`] unless the hazard falls and then rises
/// by more than `1e-9`, `h(0) = αD𝟙` within `1e-10`, and (I), (III), (IV)
/// all hold.
pub fn reproduce_counterexample() -> Result<CounterexampleReport> {
    let model = cyclic_counterexample::<f64>();
    let a = MapAnalysis::new(&model)?;
    let grid: Vec<f64> = COUNTEREXAMPLE_GRID.points();
    let curve = a.hazard_curve(a.alpha(), &grid)?;
    let dip = curve.find_dip(DIP_MARGIN).ok_or_else(|| {
        Error::Regression("hazard rate of the cyclic example is monotone on [0, 10]".into())
    })?;
    let initial_intensity = dot(a.alpha().as_slice(), &model.event_rates());
    let h0 = curve.samples[0].h;
    if (h0 - initial_intensity).abs() > 1e-10 {
        return Err(Error::Regression(format!(
            "h(0) = {h0} differs from the initial event intensity {initial_intensity}"
        )));
    }
    let report = a.report(&TimeGrid::default().points(), tolerance::VERDICT)?;
    for p in [Property::I, Property::III, Property::IV] {
        if !report.verdict(p).holds {
            return Err(Error::Regression(format!("{p} fails for the cyclic example")));
        }
    }
    Ok(CounterexampleReport {
        curve,
        dip,
        initial_intensity,
        report,
    })
}
