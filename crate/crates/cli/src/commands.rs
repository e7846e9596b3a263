use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mapburst::experiment::{reproduce_counterexample, run_sweep, SweepConfig};
use mapburst::map::{cyclic_counterexample, MapModel};
use mapburst::metrics::{property_verdicts, MapAnalysis};
use mapburst::prob::ProbVector;
use mapburst::simulate::{
    estimate_dispersion, estimate_scv, simulate_events, SimConfig, SimEstimate, SimStart,
};
use mapburst::Model;
use serde::Serialize;

use crate::args::{
    AnalyzeArgs, CounterexampleArgs, CurveArgs, Format, HazardArgs, OutputArgs, SimulateArgs,
    SweepArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATED: u8 = 2;
pub const EXIT_HARD_VIOLATION: u8 = 3;

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_model(path: &Path) -> Result<Model> {
    let text = read_input(path)?;
    MapModel::from_json(&text).with_context(|| format!("model {}", path.display()))
}

/// Writes the whole payload at once so a failure leaves no partial output.
fn emit(out: &OutputArgs, payload: &[u8]) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, payload).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    Ok(w.into_inner()?)
}

pub fn analyze(args: AnalyzeArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let report = property_verdicts(&model, &args.grid.0.points(), args.tolerance)?;
    emit(&args.out, &json(&report)?)?;
    Ok(if report.all_hold() { EXIT_OK } else { EXIT_VIOLATED })
}

pub fn sweep(args: SweepArgs) -> Result<u8> {
    let mut cfg: SweepConfig = match &args.config {
        Some(p) => serde_json::from_str(&read_input(p)?)
            .with_context(|| format!("sweep config {}", p.display()))?,
        None => SweepConfig::default(),
    };
    if !args.orders.is_empty() {
        cfg.orders = args.orders.clone();
    }
    if let Some(n) = args.n_instances {
        cfg.n_instances = n;
    }
    if args.full_scale {
        cfg.n_instances = 1_000_000;
    }
    if let Some(g) = args.generator {
        cfg.generator = g.into();
    }
    if let Some(g) = args.grid {
        cfg.grid = g.0;
    }
    if let Some(t) = args.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    eprintln!("sweep seed = {}", cfg.seed);
    let mut outcome = run_sweep(&cfg)?;
    eprintln!(
        "{} instances, {} hard violations, {} in noise band, {:.2?}",
        outcome.aggregate.instances,
        outcome.aggregate.hard_violations,
        outcome.aggregate.noise_band,
        outcome.runtime
    );
    if let Some(p) = &args.csv {
        let mut buf = Vec::new();
        outcome.write_csv(&mut buf)?;
        fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
    }
    let hard = outcome.has_hard_violation();
    if args.summary_only {
        outcome.instances.clear();
    }
    emit(&args.out, &json(&outcome)?)?;
    Ok(if hard { EXIT_HARD_VIOLATION } else { EXIT_OK })
}

fn parse_eta(spec: &str, a: &MapAnalysis<f64>) -> Result<ProbVector<f64>> {
    match spec {
        "alpha" => Ok(a.alpha().clone()),
        "pi" => Ok(a.pi().clone()),
        _ => {
            let w: Vec<f64> = spec
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("--eta {spec:?}"))?;
            if w.len() != a.model().order() {
                bail!("--eta has {} weights, model order is {}", w.len(), a.model().order());
            }
            Ok(ProbVector::new(w)?)
        }
    }
}

pub fn hazard(args: HazardArgs) -> Result<u8> {
    let c = &args.curve;
    let model = load_model(&c.model)?;
    let a = MapAnalysis::new(&model)?;
    let eta = parse_eta(&args.eta, &a)?;
    let curve = a.hazard_curve(&eta, &c.grid.0.points())?;
    if let Some(t) = curve.truncated_at {
        eprintln!("survival underflows at t = {t}; curve truncated");
    }
    let payload = match c.format {
        Format::Json => json(&curve)?,
        Format::Csv => csv_table(
            &["t", "hazard", "derivative"],
            curve.samples.iter().map(|s| vec![s.t, s.h, s.dh]),
        )?,
    };
    emit(&c.out, &payload)?;
    Ok(EXIT_OK)
}

pub fn gap(args: CurveArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let gap = MapAnalysis::new(&model)?.stochastic_order_gap(&args.grid.0.points())?;
    let payload = match args.format {
        Format::Json => json(&gap)?,
        Format::Csv => csv_table(&["t", "gap"], gap.points.iter().map(|&(t, g)| vec![t, g]))?,
    };
    emit(&args.out, &payload)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VariancePoint {
    t: f64,
    ratio: f64,
    variance: f64,
    mean: f64,
}

pub fn variance(args: CurveArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let points: Vec<VariancePoint> = MapAnalysis::new(&model)?
        .variance_curve(&args.grid.0.points())?
        .into_iter()
        .map(|(t, mean, variance)| VariancePoint {
            t,
            // Var N(t) / E N(t) → 1 as t → 0
            ratio: if t == 0.0 { 1.0 } else { variance / mean },
            variance,
            mean,
        })
        .collect();
    let payload = match args.format {
        Format::Json => json(&points)?,
        Format::Csv => csv_table(
            &["t", "ratio", "variance"],
            points.iter().map(|p| vec![p.t, p.ratio, p.variance]),
        )?,
    };
    emit(&args.out, &payload)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Estimated {
    #[serde(flatten)]
    simulated: SimEstimate,
    analytic: f64,
    z_score: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    seed: u64,
    events: usize,
    scv: Estimated,
    dispersion: Estimated,
}

pub fn simulate(args: SimulateArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    eprintln!("simulation seed = {}", args.seed);
    let cfg = SimConfig {
        batches: args.batches,
        ..SimConfig::events(args.seed, args.events, SimStart::EventStationary)
    };
    let a = MapAnalysis::new(&model)?;
    let estimated = |simulated: SimEstimate, analytic: f64| Estimated {
        simulated,
        analytic,
        z_score: simulated.z_score(analytic),
    };
    let report = SimulationReport {
        seed: args.seed,
        events: args.events,
        scv: estimated(estimate_scv(&model, &cfg)?, a.scv()?),
        dispersion: estimated(estimate_dispersion(&model, &cfg)?, a.dispersion_index()?),
    };
    if let Some(p) = &args.events_csv {
        let stream = simulate_events(&model, &SimConfig { start: args.start.0, ..cfg })?;
        let mut buf = Vec::new();
        stream.write_csv(&mut buf)?;
        fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(&args.out, &json(&report)?)?;
    Ok(EXIT_OK)
}

pub fn counterexample(args: CounterexampleArgs) -> Result<u8> {
    if args.emit_model {
        let mut s = cyclic_counterexample::<f64>().to_json().into_bytes();
        s.push(b'\n');
        emit(&args.out, &s)?;
        return Ok(EXIT_OK);
    }
    let r = reproduce_counterexample()?;
    eprintln!(
        "hazard falls from t = {} to t = {} by {:.6}, then rises by t = {} by {:.6}",
        r.dip.t_high, r.dip.t_low, r.dip.fall, r.dip.t_peak, r.dip.rise
    );
    let payload = match args.format {
        Format::Json => json(&r)?,
        Format::Csv => csv_table(
            &["t", "hazard", "derivative"],
            r.curve.samples.iter().map(|s| vec![s.t, s.h, s.dh]),
        )?,
    };
    emit(&args.out, &payload)?;
    Ok(EXIT_OK)
}
