use std::ops::{AddAssign, SubAssign};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::map::{ph_distribution, stationary_pair, MapModel, Start};
use crate::prob::ProbVector;
use crate::simulate::{
    rng_for, RunLength, Sampler, SimConfig, SimEstimate, SimStart, MIN_SAMPLES,
};

/// Largest `|e^{QT} − 𝟙π|` entry accepted for a counting window.
const WINDOW_MIXING: f64 = 1e-6;
const MAX_LAG: usize = 200;
const CHUNK: usize = 4096;

/// Running sums of a centred series, split so groups can be removed.
#[derive(Debug, Clone, Default)]
struct SeriesSums {
    n: f64,
    s1: f64,
    s2: f64,
    lag: Vec<f64>,
    lag_n: Vec<f64>,
}

impl SeriesSums {
    fn with_lags(lags: usize) -> Self {
        Self {
            lag: vec![0.0; lags],
            lag_n: vec![0.0; lags],
            ..Self::default()
        }
    }

    fn mean(&self) -> f64 {
        self.s1 / self.n
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        self.s2 / self.n - m * m
    }

    fn autocovariance(&self, j: usize) -> f64 {
        let m = self.mean();
        self.lag[j - 1] / self.lag_n[j - 1] - m * m
    }
}

impl AddAssign<&SeriesSums> for SeriesSums {
    fn add_assign(&mut self, o: &SeriesSums) {
        self.n += o.n;
        self.s1 += o.s1;
        self.s2 += o.s2;
        for (a, b) in self.lag.iter_mut().zip(&o.lag) {
            *a += b;
        }
        for (a, b) in self.lag_n.iter_mut().zip(&o.lag_n) {
            *a += b;
        }
    }
}

impl SubAssign<&SeriesSums> for SeriesSums {
    fn sub_assign(&mut self, o: &SeriesSums) {
        self.n -= o.n;
        self.s1 -= o.s1;
        self.s2 -= o.s2;
        for (a, b) in self.lag.iter_mut().zip(&o.lag) {
            *a -= b;
        }
        for (a, b) in self.lag_n.iter_mut().zip(&o.lag_n) {
            *a -= b;
        }
    }
}

/// Grouped sums of `x − shift`; lagged products are charged to the group of
/// their earlier index.
fn grouped_sums(x: &[f64], shift: f64, groups: usize, lags: usize) -> Vec<SeriesSums> {
    let n = x.len();
    let size = n.div_ceil(groups);
    (0..n.div_ceil(size))
        .into_par_iter()
        .map(|g| {
            let mut s = SeriesSums::with_lags(lags);
            for i in g * size..((g + 1) * size).min(n) {
                let xi = x[i] - shift;
                s.n += 1.0;
                s.s1 += xi;
                s.s2 += xi * xi;
                for j in 1..=lags.min(n - 1 - i) {
                    s.lag[j - 1] += xi * (x[i + j] - shift);
                    s.lag_n[j - 1] += 1.0;
                }
            }
            s
        })
        .collect()
}

/// Delete-a-group jackknife: returns the full-sample statistic and its standard error.
fn jackknife(groups: &[SeriesSums], stat: impl Fn(&SeriesSums) -> f64) -> (f64, f64) {
    let mut total = SeriesSums::with_lags(groups[0].lag.len());
    for g in groups {
        total += g;
    }
    let full = stat(&total);
    let leave_out: Vec<f64> = groups
        .iter()
        .map(|g| {
            let mut t = total.clone();
            t -= g;
            stat(&t)
        })
        .collect();
    let k = leave_out.len() as f64;
    let mean = leave_out.iter().sum::<f64>() / k;
    let ss: f64 = leave_out.iter().map(|v| (v - mean) * (v - mean)).sum();
    (full, ((k - 1.0) / k * ss).sqrt())
}

fn require(got: usize) -> Result<()> {
    if got < MIN_SAMPLES {
        Err(Error::InsufficientSamples {
            got,
            need: MIN_SAMPLES,
        })
    } else {
        Ok(())
    }
}

fn mean_of(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// SCV of inter-event times from one event-stationary path.
///
/// The start in `cfg` is ignored.
pub fn estimate_scv(m: &MapModel<f64>, cfg: &SimConfig) -> Result<SimEstimate> {
    cfg.validate(m.order())?;
    if let RunLength::Events(n) = cfg.run {
        require(n)?;
    }
    let sampler = Sampler::new(m)?;
    let stream = sampler.run(&mut rng_for(cfg.seed, 0), SimStart::EventStationary, cfg.run);
    let x = stream.intervals();
    require(x.len())?;
    let shift = mean_of(&x);
    let groups = grouped_sums(&x, shift, cfg.batches, 0);
    let (estimate, std_error) = jackknife(&groups, |s| {
        let mean = s.mean() + shift;
        s.variance() / (mean * mean)
    });
    Ok(SimEstimate {
        estimate,
        std_error,
        samples: x.len(),
    })
}

/// Smallest doubling of `1/λ*` with `max |e^{QT} − 𝟙π| ≤ 1e-6`.
pub fn dispersion_window(m: &MapModel<f64>) -> Result<f64> {
    let pair = stationary_pair(m)?;
    let pi = pair.pi.as_slice();
    let mut w = 1.0 / pair.lambda_star;
    for _ in 0..64 {
        let e = expm(m.q(), w)?;
        let worst = (0..m.order())
            .flat_map(|i| (0..m.order()).map(move |j| (i, j)))
            .map(|(i, j)| (e[(i, j)] - pi[j]).abs())
            .fold(0.0, f64::max);
        if worst <= WINDOW_MIXING {
            return Ok(w);
        }
        w *= 2.0;
    }
    Err(Error::NumericFailure {
        context: "counting window does not mix",
        magnitude: w,
    })
}

/// Index of dispersion from counts in disjoint windows of a time-stationary path.
///
/// With window counts `N_k`, `(γ₀ + 2γ₁)/E N` is used instead of `γ₀/E N`:
/// the lag-one covariance cancels the constant offset in `Var N(T)`, so the
/// estimator has no `O(1/T)` bias once windows are longer than the mixing
/// time. An event-count run length is converted to the horizon `n/λ*`.
pub fn estimate_dispersion(m: &MapModel<f64>, cfg: &SimConfig) -> Result<SimEstimate> {
    cfg.validate(m.order())?;
    let lambda = stationary_pair(m)?.lambda_star;
    let horizon = match cfg.run {
        RunLength::Events(n) => n as f64 / lambda,
        RunLength::Horizon(h) => h,
    };
    let width = dispersion_window(m)?;
    require((horizon / width) as usize)?;
    let sampler = Sampler::new(m)?;
    let stream = sampler.run(
        &mut rng_for(cfg.seed, 0),
        SimStart::TimeStationary,
        RunLength::Horizon(horizon),
    );
    let counts: Vec<f64> = stream.window_counts(width).into_iter().map(|c| c as f64).collect();
    require(counts.len())?;
    let shift = mean_of(&counts);
    let groups = grouped_sums(&counts, shift, cfg.batches, 1);
    let (estimate, std_error) = jackknife(&groups, |s| {
        (s.variance() + 2.0 * s.autocovariance(1)) / (s.mean() + shift)
    });
    Ok(SimEstimate {
        estimate,
        std_error,
        samples: counts.len(),
    })
}

/// `n` independent draws of `T₁`, chunked over parallel streams `1, 2, …`.
pub fn sample_first_intervals(
    m: &MapModel<f64>,
    start: SimStart,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    SimConfig::events(seed, n.max(1), start).validate(m.order())?;
    let sampler = Sampler::new(m)?;
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64 + 1);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len)
                .map(|_| {
                    let phase = sampler.initial_phase(&mut rng, start);
                    sampler.until_event(&mut rng, phase).0
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Sample mean of `n` independent draws of `T₁`.
pub fn first_interval_mean(
    m: &MapModel<f64>,
    start: SimStart,
    n: usize,
    seed: u64,
) -> Result<SimEstimate> {
    require(n)?;
    let x = sample_first_intervals(m, start, n, seed)?;
    let mean = mean_of(&x);
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    Ok(SimEstimate {
        estimate: mean,
        std_error: (var / n as f64).sqrt(),
        samples: n,
    })
}

/// One-sample Kolmogorov–Smirnov comparison against `η e^{Ct} 𝟙`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    /// Asymptotic 1% critical value `1.6276/√n`.
    pub critical: f64,
    pub samples: usize,
    pub passes: bool,
}

pub fn ks_survival_test(
    m: &MapModel<f64>,
    start: SimStart,
    n: usize,
    seed: u64,
) -> Result<KsOutcome> {
    require(n)?;
    let mut x = sample_first_intervals(m, start, n, seed)?;
    x.sort_by(f64::total_cmp);
    let start = match start {
        SimStart::TimeStationary => Start::TimeStationary,
        SimStart::EventStationary => Start::EventStationary,
        SimStart::Phase(i) => Start::Custom(ProbVector::unit(m.order(), i)?),
    };
    let ph = ph_distribution(m, &start)?;
    let cdf: Vec<f64> = x.par_iter().map(|&t| ph.cdf(t)).collect::<Result<_>>()?;
    let nf = n as f64;
    let statistic = cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / nf - f).max(f - i as f64 / nf))
        .fold(0.0, f64::max);
    let critical = 1.6276 / nf.sqrt();
    Ok(KsOutcome {
        statistic,
        critical,
        samples: n,
        passes: statistic < critical,
    })
}

/// `d²` computed two ways from simulation: from counts, and from the
/// interval sequence as `ĉ²(1 + 2 Σ_{j≤L} ρ̂_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCheck {
    pub scv: SimEstimate,
    pub lags: usize,
    pub from_intervals: SimEstimate,
    pub from_counts: SimEstimate,
    pub consistent: bool,
}

/// `L` is the first lag after which five consecutive `|ρ̂_j|` fall below `2/√n`.
pub fn scv_correlation_check(m: &MapModel<f64>, cfg: &SimConfig) -> Result<CorrelationCheck> {
    cfg.validate(m.order())?;
    let scv = estimate_scv(m, cfg)?;
    let sampler = Sampler::new(m)?;
    let x = sampler
        .run(&mut rng_for(cfg.seed, 0), SimStart::EventStationary, cfg.run)
        .intervals();
    let max_lag = MAX_LAG.min(x.len() / 20);
    let shift = mean_of(&x);
    let groups = grouped_sums(&x, shift, cfg.batches, max_lag);
    let mut total = SeriesSums::with_lags(max_lag);
    for g in &groups {
        total += g;
    }
    let var = total.variance();
    let rho: Vec<f64> = (1..=max_lag).map(|j| total.autocovariance(j) / var).collect();
    let noise = 2.0 / (x.len() as f64).sqrt();
    let lags = (0..max_lag)
        .find(|&l| rho[l..(l + 5).min(max_lag)].iter().all(|r| r.abs() < noise))
        .unwrap_or(max_lag);

    let (estimate, std_error) = jackknife(&groups, |s| {
        let mean = s.mean() + shift;
        let v = s.variance();
        let sum: f64 = (1..=lags).map(|j| s.autocovariance(j) / v).sum();
        v / (mean * mean) * (1.0 + 2.0 * sum)
    });
    let from_intervals = SimEstimate {
        estimate,
        std_error,
        samples: x.len(),
    };
    let from_counts = estimate_dispersion(m, cfg)?;
    let combined = (from_intervals.std_error.powi(2) + from_counts.std_error.powi(2)).sqrt();
    let consistent = (from_intervals.estimate - from_counts.estimate).abs() <= 4.0 * combined;
    Ok(CorrelationCheck {
        scv,
        lags,
        from_intervals,
        from_counts,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::metrics::MapAnalysis;

    fn mmpp2() -> MapModel<f64> {
        let q = SquareMatrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        MapModel::mmpp(&q, &[1.0, 3.0]).unwrap()
    }

    #[test]
    fn jackknife_of_mean_matches_classical() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let groups = grouped_sums(&x, 0.0, 1000, 0);
        let (mean, se) = jackknife(&groups, |s| s.mean());
        let m = mean_of(&x);
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 999.0).sqrt();
        assert!((mean - m).abs() < 1e-12);
        assert!((se - sd / 1000f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn lag_sums_cover_all_pairs() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let groups = grouped_sums(&x, 0.0, 7, 3);
        let n: f64 = groups.iter().map(|g| g.lag_n[2]).sum();
        assert_eq!(n, 47.0);
    }

    #[test]
    fn refuses_small_samples() {
        let m = MapModel::poisson(1.0).unwrap();
        let cfg = SimConfig::events(1, 999, SimStart::EventStationary);
        assert_eq!(
            estimate_scv(&m, &cfg),
            Err(Error::InsufficientSamples { got: 999, need: 1000 })
        );
        assert!(ks_survival_test(&m, SimStart::EventStationary, 10, 1).is_err());
    }

    #[test]
    fn poisson_window_and_estimates() {
        let m = MapModel::poisson(2.0).unwrap();
        assert_eq!(dispersion_window(&m).unwrap(), 0.5);
        let cfg = SimConfig::events(11, 100_000, SimStart::EventStationary);
        assert!(estimate_scv(&m, &cfg).unwrap().within(1.0, 4.0));
        assert!(estimate_dispersion(&m, &cfg).unwrap().within(1.0, 4.0));
        assert!(first_interval_mean(&m, SimStart::TimeStationary, 20_000, 5)
            .unwrap()
            .within(0.5, 4.0));
    }

    #[test]
    fn mmpp2_window_mixes() {
        // e^{Qt} − 𝟙π decays as e^{−2t}
        let w = dispersion_window(&mmpp2()).unwrap();
        assert!((-2.0 * w).exp() / 2.0 <= WINDOW_MIXING);
        assert!((-w).exp() / 2.0 > WINDOW_MIXING);
    }

    #[test]
    fn mmpp2_first_interval_means() {
        let m = mmpp2();
        let a = MapAnalysis::new(&m).unwrap();
        let event = first_interval_mean(&m, SimStart::EventStationary, 50_000, 2).unwrap();
        assert!(event.within(a.moment(1).unwrap(), 4.0));
        let time = first_interval_mean(&m, SimStart::TimeStationary, 50_000, 2).unwrap();
        assert!(time.within(a.mean_first_time_stationary(), 4.0));
    }

    #[test]
    fn parallel_sampling_is_deterministic() {
        let m = mmpp2();
        let a = sample_first_intervals(&m, SimStart::EventStationary, 10_000, 9).unwrap();
        let b = sample_first_intervals(&m, SimStart::EventStationary, 10_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10_000);
    }

    #[test]
    fn ks_detects_wrong_start() {
        let m = mmpp2();
        let ok = ks_survival_test(&m, SimStart::Phase(0), 20_000, 4).unwrap();
        assert!(ok.passes, "{ok:?}");
        // phase 1 samples are much shorter than phase 0 samples
        let x = sample_first_intervals(&m, SimStart::Phase(1), 20_000, 4).unwrap();
        let ph = ph_distribution(&m, &Start::Custom(ProbVector::unit(2, 0).unwrap())).unwrap();
        let mut x = x;
        x.sort_by(f64::total_cmp);
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &t)| ((i + 1) as f64 / 2e4 - ph.cdf(t).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(d > ok.critical);
    }
}
