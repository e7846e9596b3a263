//! Monte Carlo simulation of the MAP event process.
//!
//! All randomness comes from [`ChaCha8Rng`]. A run is identified by a seed
//! and a stream number: [`rng_for`] seeds the generator from the 64-bit seed
//! and selects the stream with `set_stream`, so parallel batches draw from
//! disjoint, reproducible sequences regardless of scheduling.
//!
//! Exponential holding times are drawn by inversion, `−ln(1 − U)/r`.

mod estimate;

pub use estimate::{
    dispersion_window, estimate_dispersion, estimate_scv, first_interval_mean,
    ks_survival_test, sample_first_intervals, scv_correlation_check, CorrelationCheck,
    KsOutcome,
};

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{stationary_pair, MapModel};

/// Minimum number of samples any estimator accepts.
pub const MIN_SAMPLES: usize = 1000;

/// Seeded generator on a given stream.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStart {
    /// Initial phase drawn from `π`.
    TimeStationary,
    /// Initial phase drawn from `α`, with an event at time zero.
    EventStationary,
    Phase(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunLength {
    Events(usize),
    Horizon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub run: RunLength,
    pub start: SimStart,
    /// Number of groups for the delete-a-group jackknife.
    pub batches: usize,
}

impl SimConfig {
    pub fn events(seed: u64, n: usize, start: SimStart) -> Self {
        Self {
            seed,
            run: RunLength::Events(n),
            start,
            batches: 100,
        }
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        match self.run {
            RunLength::Events(0) => {
                return Err(Error::InvalidParameter("run length must be positive".into()))
            }
            RunLength::Horizon(h) if !(h > 0.0) || !h.is_finite() => {
                return Err(Error::InvalidParameter(format!(
                    "horizon must be positive and finite, got {h}"
                )))
            }
            _ => {}
        }
        if let SimStart::Phase(i) = self.start {
            if i >= order {
                return Err(Error::InvalidParameter(format!(
                    "start phase {i} out of range for order {order}"
                )));
            }
        }
        if self.batches < 2 {
            return Err(Error::InvalidParameter("at least two jackknife groups are needed".into()));
        }
        Ok(())
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl SimEstimate {
    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.estimate - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, value: f64, k: f64) -> bool {
        self.z_score(value) <= k
    }
}

/// Event epochs and the phase entered at each event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub initial_phase: usize,
    pub times: Vec<f64>,
    pub phases: Vec<usize>,
    /// End of the observation window: the horizon, or the last event epoch.
    pub end: f64,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Gaps between consecutive events, the first measured from time zero.
    pub fn intervals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }

    /// Events in consecutive windows `[kw, (k+1)w)` fully inside `[0, end]`.
    pub fn window_counts(&self, width: f64) -> Vec<u64> {
        let n = (self.end / width).floor() as usize;
        let mut counts = vec![0u64; n];
        for &t in &self.times {
            let k = (t / width) as usize;
            if k < n {
                counts[k] += 1;
            }
        }
        counts
    }

    /// Writes `event_index,time,phase_after_event` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["event_index", "time", "phase_after_event"])?;
        for (k, (t, p)) in self.times.iter().zip(&self.phases).enumerate() {
            out.write_record(&[(k + 1).to_string(), t.to_string(), p.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outgoing transitions of one phase as a cumulative table.
#[derive(Debug, Clone)]
struct PhaseTable {
    rate: f64,
    cumulative: Vec<f64>,
    targets: Vec<(usize, bool)>,
}

/// Precomputed jump tables for competing-exponential simulation.
#[derive(Debug, Clone)]
pub struct Sampler {
    tables: Vec<PhaseTable>,
    pi: Vec<f64>,
    alpha: Vec<f64>,
}

impl Sampler {
    pub fn new(m: &MapModel<f64>) -> Result<Self> {
        let pair = stationary_pair(m)?;
        let p = m.order();
        let tables = (0..p)
            .map(|i| {
                let mut cumulative = Vec::new();
                let mut targets = Vec::new();
                let mut acc = 0.0;
                for j in 0..p {
                    let c = m.c()[(i, j)];
                    if j != i && c > 0.0 {
                        acc += c;
                        cumulative.push(acc);
                        targets.push((j, false));
                    }
                    let d = m.d()[(i, j)];
                    if d > 0.0 {
                        acc += d;
                        cumulative.push(acc);
                        targets.push((j, true));
                    }
                }
                PhaseTable {
                    rate: acc,
                    cumulative,
                    targets,
                }
            })
            .collect();
        Ok(Self {
            tables,
            pi: pair.pi.into_inner(),
            alpha: pair.alpha.into_inner(),
        })
    }

    pub fn order(&self) -> usize {
        self.tables.len()
    }

    pub fn initial_phase<R: Rng>(&self, rng: &mut R, start: SimStart) -> usize {
        match start {
            SimStart::TimeStationary => sample_index(rng, &self.pi),
            SimStart::EventStationary => sample_index(rng, &self.alpha),
            SimStart::Phase(i) => i,
        }
    }

    /// One holding time and the jump that ends it.
    #[inline]
    pub fn step<R: Rng>(&self, rng: &mut R, phase: usize) -> (f64, usize, bool) {
        let table = &self.tables[phase];
        let dt = exponential(rng, table.rate);
        let u = rng.gen::<f64>() * table.rate;
        let k = table
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(table.targets.len() - 1);
        let (to, event) = table.targets[k];
        (dt, to, event)
    }

    /// Time until the next event from `phase`, and the phase entered.
    pub fn until_event<R: Rng>(&self, rng: &mut R, mut phase: usize) -> (f64, usize) {
        let mut t = 0.0;
        loop {
            let (dt, to, event) = self.step(rng, phase);
            t += dt;
            phase = to;
            if event {
                return (t, phase);
            }
        }
    }

    pub fn run<R: Rng>(&self, rng: &mut R, start: SimStart, run: RunLength) -> EventStream {
        let initial_phase = self.initial_phase(rng, start);
        let mut phase = initial_phase;
        let mut t = 0.0;
        let (mut times, mut phases) = match run {
            RunLength::Events(n) => (Vec::with_capacity(n), Vec::with_capacity(n)),
            RunLength::Horizon(_) => (Vec::new(), Vec::new()),
        };
        let end = loop {
            let (dt, to, event) = self.step(rng, phase);
            t += dt;
            if let RunLength::Horizon(h) = run {
                if t > h {
                    break h;
                }
            }
            phase = to;
            if event {
                times.push(t);
                phases.push(phase);
                if let RunLength::Events(n) = run {
                    if times.len() == n {
                        break t;
                    }
                }
            }
        };
        EventStream {
            initial_phase,
            times,
            phases,
            end,
        }
    }
}

#[inline]
fn exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Simulates one path on stream 0 of `cfg.seed`.
pub fn simulate_events(m: &MapModel<f64>, cfg: &SimConfig) -> Result<EventStream> {
    cfg.validate(m.order())?;
    let sampler = Sampler::new(m)?;
    Ok(sampler.run(&mut rng_for(cfg.seed, 0), cfg.start, cfg.run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::cyclic_counterexample;

    #[test]
    fn same_seed_same_stream() {
        let m = cyclic_counterexample::<f64>();
        let cfg = SimConfig::events(7, 500, SimStart::TimeStationary);
        let a = simulate_events(&m, &cfg).unwrap();
        let b = simulate_events(&m, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_events(&m, &SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn streams_differ() {
        let mut a = rng_for(1, 0);
        let mut b = rng_for(1, 1);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn horizon_run_stays_inside() {
        let m = MapModel::poisson(3.0).unwrap();
        let cfg = SimConfig {
            run: RunLength::Horizon(100.0),
            ..SimConfig::events(2, 1, SimStart::Phase(0))
        };
        let s = simulate_events(&m, &cfg).unwrap();
        assert!(s.times.iter().all(|&t| t <= 100.0));
        assert_eq!(s.end, 100.0);
        assert!((s.len() as f64 - 300.0).abs() < 5.0 * 300f64.sqrt());
        assert_eq!(s.window_counts(10.0).iter().sum::<u64>() as usize, s.len());
    }

    #[test]
    fn post_event_phases_approach_alpha() {
        let m = cyclic_counterexample::<f64>();
        let s = simulate_events(&m, &SimConfig::events(3, 200_000, SimStart::EventStationary)).unwrap();
        let alpha = stationary_pair(&m).unwrap().alpha;
        let mut freq = vec![0.0; 4];
        for &p in &s.phases {
            freq[p] += 1.0 / s.len() as f64;
        }
        for i in 0..4 {
            assert!((freq[i] - alpha[i]).abs() < 0.01, "{freq:?}");
        }
    }

    #[test]
    fn invalid_config() {
        let m = MapModel::poisson(1.0).unwrap();
        assert!(simulate_events(&m, &SimConfig::events(1, 0, SimStart::TimeStationary)).is_err());
        assert!(simulate_events(&m, &SimConfig::events(1, 10, SimStart::Phase(1))).is_err());
        let h = SimConfig {
            run: RunLength::Horizon(-1.0),
            ..SimConfig::events(1, 10, SimStart::TimeStationary)
        };
        assert!(simulate_events(&m, &h).is_err());
    }

    #[test]
    fn csv_export() {
        let m = MapModel::poisson(1.0).unwrap();
        let s = simulate_events(&m, &SimConfig::events(1, 3, SimStart::Phase(0))).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "event_index,time,phase_after_event");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
        assert!(lines[3].ends_with(",0"));
    }
}
