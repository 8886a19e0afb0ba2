use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geocache::experiment::{self, Command, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "geocache",
    version,
    about = "Cache placement solvers and simulators for Poisson cache fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Optimal per-cache integer allocation n_i for each sweep point.
    OptimizeIndividual,
    /// Optimal storage probabilities q_i under the average constraint.
    OptimizeAverage,
    /// Miss probability of both optima across the sweep (N = 1).
    Compare,
    /// Monte Carlo estimates of both optima against their formulas.
    SimulateStatic,
    /// Distributed LRU against the average-constraint optimum and the Che baseline.
    SimulateLru,
    /// Che approximation for a pooled cache of C * lambda * pi * r^2 files.
    Che,
    /// Evaluate both optima on a positions file.
    EvalDataset,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::OptimizeIndividual => Command::OptimizeIndividual,
            Cmd::OptimizeAverage => Command::OptimizeAverage,
            Cmd::Compare => Command::Compare,
            Cmd::SimulateStatic => Command::SimulateStatic,
            Cmd::SimulateLru => Command::SimulateLru,
            Cmd::Che => Command::Che,
            Cmd::EvalDataset => Command::EvalDataset,
        }
    }
}

#[derive(Args)]
struct Params {
    /// JSON experiment file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// VAR:START:STOP:STEP or VAR=v1,v2,... over r, C, lambda or s.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Number of files.
    #[arg(long = "L", global = true)]
    num_files: Option<usize>,
    /// Chunks per file.
    #[arg(long = "N", global = true)]
    chunks: Option<u32>,
    /// Cache capacity in files.
    #[arg(long = "C", global = true)]
    capacity: Option<f64>,
    /// Cache density per square meter.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Connection radius in meters.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Zipf exponent.
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Popularity weights, one per line.
    #[arg(long, global = true)]
    weights_file: Option<PathBuf>,
    /// Cache positions (x,y per line) for eval-dataset.
    #[arg(long, global = true)]
    positions: Option<PathBuf>,
    /// Observation window of the positions file, as WIDTH,HEIGHT.
    #[arg(long, global = true, value_parser = parse_area)]
    area: Option<Area>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep points evaluated concurrently.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Measured LRU requests after warmup.
    #[arg(long, global = true)]
    requests: Option<u64>,
    /// LRU warmup requests.
    #[arg(long, global = true)]
    warmup: Option<u64>,
    /// LRU torus side in meters.
    #[arg(long, global = true)]
    window_side: Option<f64>,
}

#[derive(Clone, Copy)]
struct Area([f64; 2]);

fn parse_area(s: &str) -> Result<Area, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [w, h] = parts[..] else {
        return Err(format!("expected WIDTH,HEIGHT, got `{s}`"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Area([num(w)?, num(h)?]))
}

impl Params {
    fn overrides(self) -> ExperimentConfig {
        ExperimentConfig {
            scenario: self.scenario,
            sweep: self.sweep,
            num_files: self.num_files,
            chunks: self.chunks,
            capacity: self.capacity,
            lambda: self.lambda,
            r: self.r,
            s: self.s,
            weights_file: self.weights_file,
            positions: self.positions,
            area: self.area.map(|a| a.0),
            trials: self.trials,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out,
            requests: self.requests,
            warmup: self.warmup,
            window_side: self.window_side,
        }
    }
}

fn run(cli: Cli) -> geocache::Result<()> {
    let base = match &cli.params.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let config = base.merged(cli.params.overrides());
    let out = config.out.clone();
    let table = experiment::run(cli.command.into(), config)?;
    match out {
        Some(path) => table.write_file(path),
        None => table.write(std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
