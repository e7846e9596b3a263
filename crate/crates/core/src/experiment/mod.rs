//! Randomized sweeps over MMPP instances and the non-monotone hazard example.
//!
//! Every instance draws from its own generator stream, derived from the
//! sweep seed, the order and the instance index, so a sweep produces the same
//! records whatever the thread count.

mod counterexample;
mod generators;

pub use counterexample::{reproduce_counterexample, CounterexampleReport, COUNTEREXAMPLE_GRID};
pub use generators::{cyclic_generator, random_cyclic_mmpp, random_mmpp, random_mspp, Drawn};

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::map::MapModel;
use crate::metrics::{MapAnalysis, TimeGrid};
use crate::simulate::rng_for;
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    #[serde(alias = "dense")]
    DenseUniform,
    #[serde(alias = "cyclic")]
    CyclicUniform,
}

impl GeneratorKind {
    pub fn draw(self, order: usize, seed: u64, index: u64) -> Result<Drawn> {
        let mut rng = rng_for(seed, instance_stream(order, index));
        match self {
            GeneratorKind::DenseUniform => random_mmpp(order, &mut rng),
            GeneratorKind::CyclicUniform => random_cyclic_mmpp(order, &mut rng),
        }
    }
}

/// Stream number of instance `index` of order `order`.
pub fn instance_stream(order: usize, index: u64) -> u64 {
    ((order as u64) << 40) | index
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub orders: Vec<usize>,
    pub n_instances: usize,
    pub generator: GeneratorKind,
    pub grid: TimeGrid,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            orders: vec![3, 4, 5, 6],
            n_instances: 10_000,
            generator: GeneratorKind::DenseUniform,
            grid: TimeGrid::default(),
            tolerance: tolerance::VERDICT,
            seed: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::InvalidParameter("n_instances must be at least 1".into()));
        }
        if self.orders.is_empty() {
            return Err(Error::InvalidParameter("at least one order is required".into()));
        }
        if let Some(p) = self.orders.iter().find(|&&p| p < 2) {
            return Err(Error::InvalidParameter(format!("orders must be >= 2, got {p}")));
        }
        if !self.tolerance.is_finite() {
            return Err(Error::InvalidParameter("tolerance must be finite".into()));
        }
        self.grid.validate()
    }
}

/// Margins of (I), (III), (IV) and the mean-identity checks for one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceMargins {
    /// (I): `πD D♯ D𝟙`.
    pub dispersion_margin: f64,
    /// (III): `πC𝟙 · πC⁻¹𝟙 − 1 = (c² − 1)/2`.
    pub scv_margin: f64,
    /// (IV): `min_t (π − α)e^{Ct}𝟙`.
    pub min_gap: f64,
    pub argmin_t: f64,
    /// `E[T₁^π] − E[T₁^α]`.
    pub mean_difference: f64,
    /// `|π(−C)⁻¹𝟙 − λ*α(−C)⁻²𝟙| ≤ 1e-9·M₁`.
    pub mean_identity: bool,
    /// `sign(c² − 1) = sign(E[T₁^π] − E[T₁^α])`, or `|c² − 1| ≤ 1e-6`.
    pub mean_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub order: usize,
    pub index: u64,
    pub redraws: u32,
    #[serde(flatten)]
    pub margins: InstanceMargins,
    pub holds_i: bool,
    pub holds_iii: bool,
    pub holds_iv: bool,
}

impl InstanceRecord {
    fn margins(&self) -> [f64; 3] {
        let m = &self.margins;
        [m.dispersion_margin, m.scv_margin, m.min_gap]
    }

    pub fn hard_violation(&self) -> bool {
        self.margins().iter().any(|&m| m < -tolerance::HARD_VIOLATION)
    }

    pub fn in_noise_band(&self) -> bool {
        !self.hard_violation() && self.margins().iter().any(|&m| m < 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub order: usize,
    pub index: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub instances: usize,
    pub failures: usize,
    pub redraws: u64,
    pub min_dispersion_margin: f64,
    pub min_scv_margin: f64,
    pub min_gap: f64,
    pub flagged_i: usize,
    pub flagged_iii: usize,
    pub flagged_iv: usize,
    /// Instances with a margin below `-1e-9`.
    pub hard_violations: usize,
    /// Instances with a negative margin, all of them in `[-1e-9, 0)`.
    pub noise_band: usize,
    pub mean_identity_failures: usize,
    /// Instances where (IV) holds but (III) does not.
    pub implication_failures: usize,
}

impl SweepAggregate {
    fn from_records(records: &[InstanceRecord], failures: usize) -> Self {
        let min = |f: fn(&InstanceRecord) -> f64| records.iter().map(f).fold(f64::INFINITY, f64::min);
        let count = |f: fn(&InstanceRecord) -> bool| records.iter().filter(|r| f(r)).count();
        Self {
            instances: records.len(),
            failures,
            redraws: records.iter().map(|r| r.redraws as u64).sum(),
            min_dispersion_margin: min(|r| r.margins.dispersion_margin),
            min_scv_margin: min(|r| r.margins.scv_margin),
            min_gap: min(|r| r.margins.min_gap),
            flagged_i: count(|r| !r.holds_i),
            flagged_iii: count(|r| !r.holds_iii),
            flagged_iv: count(|r| !r.holds_iv),
            hard_violations: count(InstanceRecord::hard_violation),
            noise_band: count(InstanceRecord::in_noise_band),
            mean_identity_failures: count(|r| !(r.margins.mean_identity && r.margins.mean_sign)),
            implication_failures: count(|r| r.holds_iv && !r.holds_iii),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSummary {
    pub order: usize,
    #[serde(flatten)]
    pub aggregate: SweepAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub aggregate: SweepAggregate,
    pub per_order: Vec<OrderSummary>,
    pub instances: Vec<InstanceRecord>,
    pub failures: Vec<InstanceFailure>,
    /// Wall-clock time; not serialized, so outputs compare byte for byte.
    #[serde(skip)]
    pub runtime: Duration,
}

impl SweepOutcome {
    pub fn has_hard_violation(&self) -> bool {
        self.aggregate.hard_violations > 0
    }

    /// Writes one row per instance.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "order", "index", "scv_margin", "min_gap", "argmin_t", "holds_i", "holds_iii", "holds_iv",
        ])?;
        for r in &self.instances {
            out.write_record(&[
                r.order.to_string(),
                r.index.to_string(),
                format!("{:e}", r.margins.scv_margin),
                format!("{:e}", r.margins.min_gap),
                r.margins.argmin_t.to_string(),
                r.holds_i.to_string(),
                r.holds_iii.to_string(),
                r.holds_iv.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn evaluate_instance(model: &MapModel<f64>, grid: &[f64]) -> Result<InstanceMargins> {
    let a = MapAnalysis::new(model)?;
    let (mut argmin_t, mut min_gap) = (0.0, f64::INFINITY);
    for &t in grid {
        let gap = a.gap_with(&expm(model.c(), t)?);
        if gap < min_gap {
            min_gap = gap;
            argmin_t = t;
        }
    }
    let scv_margin = a.scv_product() - 1.0;
    let m1 = a.moment(1)?;
    let time_mean = a.mean_first_time_stationary();
    let mean_difference = time_mean - m1;
    let c2_minus_one = 2.0 * scv_margin;
    Ok(InstanceMargins {
        dispersion_margin: a.overdispersion_margin()?,
        scv_margin,
        min_gap,
        argmin_t,
        mean_difference,
        mean_identity: (time_mean - a.mean_first_from_palm()).abs() <= 1e-9 * m1,
        mean_sign: c2_minus_one.abs() <= 1e-6 || (c2_minus_one > 0.0) == (mean_difference > 0.0),
    })
}

fn sweep_instance(cfg: &SweepConfig, grid: &[f64], order: usize, index: u64) -> Result<InstanceRecord> {
    let drawn = cfg.generator.draw(order, cfg.seed, index)?;
    let margins = evaluate_instance(&drawn.model, grid)?;
    let holds = |m: f64| m >= -cfg.tolerance;
    Ok(InstanceRecord {
        order,
        index,
        redraws: drawn.redraws,
        margins,
        holds_i: holds(margins.dispersion_margin),
        holds_iii: holds(margins.scv_margin),
        holds_iv: holds(margins.min_gap),
    })
}

/// Runs the sweep; per-instance errors are collected, never propagated.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let grid: Vec<f64> = cfg.grid.points();
    let mut instances = Vec::new();
    let mut failures = Vec::new();
    let mut per_order = Vec::new();
    for &order in &cfg.orders {
        let results: Vec<Result<InstanceRecord>> = (0..cfg.n_instances as u64)
            .into_par_iter()
            .map(|index| sweep_instance(cfg, &grid, order, index))
            .collect();
        let mut records = Vec::with_capacity(results.len());
        let before = failures.len();
        for (index, r) in results.into_iter().enumerate() {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    log::warn!("order {order} instance {index}: {e}");
                    failures.push(InstanceFailure {
                        order,
                        index: index as u64,
                        error: e.to_string(),
                    });
                }
            }
        }
        per_order.push(OrderSummary {
            order,
            aggregate: SweepAggregate::from_records(&records, failures.len() - before),
        });
        instances.extend(records);
    }
    Ok(SweepOutcome {
        config: cfg.clone(),
        aggregate: SweepAggregate::from_records(&instances, failures.len()),
        per_order,
        instances,
        failures,
        runtime: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(orders: Vec<usize>, generator: GeneratorKind, n: usize) -> SweepConfig {
        SweepConfig {
            orders,
            n_instances: n,
            generator,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn dense_sweep_has_no_violations() {
        let out = run_sweep(&small(vec![3], GeneratorKind::DenseUniform, 1000)).unwrap();
        assert_eq!(out.aggregate.instances, 1000);
        assert_eq!(out.aggregate.hard_violations, 0);
        assert_eq!(out.aggregate.flagged_iii + out.aggregate.flagged_iv, 0);
        assert_eq!(out.aggregate.mean_identity_failures, 0);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn cyclic_sweep_has_no_violations() {
        let out = run_sweep(&small(vec![4], GeneratorKind::CyclicUniform, 1000)).unwrap();
        assert_eq!(out.aggregate.hard_violations, 0);
        assert_eq!(out.aggregate.flagged_iii + out.aggregate.flagged_iv, 0);
    }

    #[test]
    fn absurd_tolerance_flags_everything() {
        let cfg = SweepConfig {
            tolerance: -1.0,
            ..small(vec![3], GeneratorKind::DenseUniform, 50)
        };
        let out = run_sweep(&cfg).unwrap();
        // the gap is exactly zero at t = 0, so every instance misses (IV)
        assert_eq!(out.aggregate.flagged_iv, 50);
        let below = out.instances.iter().filter(|r| r.margins.scv_margin < 1.0).count();
        assert_eq!(out.aggregate.flagged_iii, below);
        assert_eq!(out.aggregate.hard_violations, 0);
    }

    #[test]
    fn aggregate_matches_records() {
        let out = run_sweep(&small(vec![3, 5], GeneratorKind::DenseUniform, 100)).unwrap();
        let min_gap = out.instances.iter().map(|r| r.margins.min_gap).fold(f64::INFINITY, f64::min);
        assert_eq!(out.aggregate.min_gap, min_gap);
        assert_eq!(out.per_order.len(), 2);
        assert_eq!(out.per_order[1].aggregate.instances, 100);
        assert!(out.instances[..100].iter().all(|r| r.order == 3));
    }

    #[test]
    fn deterministic_serialization() {
        let cfg = small(vec![4], GeneratorKind::DenseUniform, 200);
        let a = serde_json::to_string(&run_sweep(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_sweep(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("runtime"));
    }

    #[test]
    fn invalid_configs() {
        assert!(run_sweep(&small(vec![3], GeneratorKind::DenseUniform, 0)).is_err());
        assert!(run_sweep(&small(vec![1], GeneratorKind::DenseUniform, 5)).is_err());
        assert!(run_sweep(&small(vec![], GeneratorKind::DenseUniform, 5)).is_err());
    }

    #[test]
    fn config_json_uses_defaults_and_aliases() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"generator":"cyclic","orders":[4]}"#).unwrap();
        assert_eq!(cfg.generator, GeneratorKind::CyclicUniform);
        assert_eq!(cfg.n_instances, 10_000);
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn csv_columns() {
        let out = run_sweep(&small(vec![2], GeneratorKind::DenseUniform, 3)).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "order,index,scv_margin,min_gap,argmin_t,holds_i,holds_iii,holds_iv"
        );
        assert_eq!(text.lines().count(), 4);
    }
}
