use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mapburst::experiment::GeneratorKind;
use mapburst::metrics::TimeGrid;
use mapburst::simulate::SimStart;

/// Burstiness analysis of Markovian arrival processes.
///
/// Exit codes: 0 success, 1 input or usage error, 2 `analyze` found a
/// violated property, 3 `sweep` found a hard violation.
#[derive(Debug, Parser)]
#[command(name = "mapburst", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute moments, SCV, dispersion and the four property verdicts.
    Analyze(AnalyzeArgs),
    /// Randomized sweep over MMPP instances.
    Sweep(SweepArgs),
    /// Hazard rate of the first inter-event time: t,hazard,derivative.
    Hazard(HazardArgs),
    /// Stochastic-order gap (π − α)e^{Ct}𝟙: t,gap.
    Gap(CurveArgs),
    /// Variance of counts: t,ratio,variance with ratio = Var N(t) / E N(t).
    Variance(CurveArgs),
    /// Monte Carlo estimates of c² and d².
    Simulate(SimulateArgs),
    /// Reproduce the four-phase cyclic MMPP with a non-monotone hazard rate.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `start:stop:step`
#[derive(Debug, Clone, Copy)]
pub struct GridArg(pub TimeGrid);

impl FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        TimeGrid::new(num(a)?, num(b)?, num(c)?)
            .map(GridArg)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Model file, JSON {"C": [[...]], "D": [[...]]}; `-` reads standard input.
    pub model: PathBuf,
    /// Time grid for (II) and (IV) as start:stop:step.
    #[arg(long, default_value = "0:10:0.2")]
    pub grid: GridArg,
    /// Margins down to -tolerance count as holding.
    #[arg(long, default_value_t = mapburst::tolerance::VERDICT)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model order; repeat for several.
    #[arg(long = "order")]
    pub orders: Vec<usize>,
    /// Instances per order.
    #[arg(long = "n")]
    pub n_instances: Option<usize>,
    /// Run the full-scale 10^6 instances per order.
    #[arg(long, conflicts_with = "n_instances")]
    pub full_scale: bool,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    #[arg(long)]
    pub grid: Option<GridArg>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write per-instance margins as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Leave per-instance records out of the JSON output.
    #[arg(long)]
    pub summary_only: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Dense,
    Cyclic,
}

impl From<GeneratorArg> for GeneratorKind {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Dense => GeneratorKind::DenseUniform,
            GeneratorArg::Cyclic => GeneratorKind::CyclicUniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Model file; `-` reads standard input.
    pub model: PathBuf,
    #[arg(long, default_value = "0:10:0.2")]
    pub grid: GridArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HazardArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Initial distribution: `alpha`, `pi`, or comma-separated weights.
    #[arg(long, default_value = "alpha")]
    pub eta: String,
}

/// `time`, `event` or `phase:<i>`.
#[derive(Debug, Clone, Copy)]
pub struct StartArg(pub SimStart);

impl FromStr for StartArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "time" => Ok(StartArg(SimStart::TimeStationary)),
            "event" => Ok(StartArg(SimStart::EventStationary)),
            _ => s
                .strip_prefix("phase:")
                .and_then(|i| i.parse().ok())
                .map(|i| StartArg(SimStart::Phase(i)))
                .ok_or_else(|| format!("expected time, event or phase:<i>, got {s:?}")),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model file; `-` reads standard input.
    pub model: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of events per estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub events: usize,
    /// Jackknife groups.
    #[arg(long, default_value_t = 100)]
    pub batches: usize,
    /// Start for the exported event stream.
    #[arg(long, default_value = "time")]
    pub start: StartArg,
    /// Write the event stream as CSV (event_index,time,phase_after_event).
    #[arg(long)]
    pub events_csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the model as JSON instead of the hazard curve.
    #[arg(long)]
    pub emit_model: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}
