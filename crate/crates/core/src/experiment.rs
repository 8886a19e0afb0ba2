//! Sweep runner behind the command-line tool.
//!
//! A run resolves an [`ExperimentConfig`] into one parameter point per sweep
//! value, evaluates the points concurrently, and emits a CSV table whose rows
//! follow sweep order. Every table starts with `#`-prefixed metadata lines.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, ChunkingParams, SpatialIntensity};
use crate::catalog::{Popularity, ZipfParams};
use crate::error::{Error, Result};
use crate::geometry::{self, PointSet, Window};
use crate::opt_average;
use crate::opt_individual;
use crate::rng;
use crate::simulate::{self, LruConfig, Placement};

pub const DEFAULT_NUM_FILES: usize = 2000;
pub const DEFAULT_CHUNKS: u32 = 1;
pub const DEFAULT_CAPACITY: f64 = 10.0;
pub const DEFAULT_DENSITY: f64 = 2e-3;
pub const DEFAULT_RADIUS: f64 = 50.0;
pub const DEFAULT_EXPONENT: f64 = 1.0;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_LRU_REQUESTS: u64 = 200_000;

/// Experiment description as read from a JSON file or assembled from flags.
/// Absent fields fall back to the defaults above.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<String>,
    /// `VAR:START:STOP:STEP` or `VAR=v1,v2,...` with `VAR` one of
    /// `r`, `C`, `lambda`, `s`.
    pub sweep: Option<String>,
    #[serde(rename = "L")]
    pub num_files: Option<usize>,
    #[serde(rename = "N")]
    pub chunks: Option<u32>,
    #[serde(rename = "C")]
    pub capacity: Option<f64>,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    /// One positive weight per line; overrides `L` and `s`.
    pub weights_file: Option<PathBuf>,
    /// Cache positions for `eval-dataset`.
    pub positions: Option<PathBuf>,
    /// Observation window `[width, height]` of the positions file.
    pub area: Option<[f64; 2]>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    /// Measured LRU requests (after warmup).
    pub requests: Option<u64>,
    pub warmup: Option<u64>,
    /// LRU torus side; defaults to twenty radii.
    pub window_side: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merged(self, other: ExperimentConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => {
                ExperimentConfig { $($f: other.$f.or(self.$f),)* }
            };
        }
        pick!(
            scenario,
            sweep,
            num_files,
            chunks,
            capacity,
            lambda,
            r,
            s,
            weights_file,
            positions,
            area,
            trials,
            seed,
            jobs,
            out,
            requests,
            warmup,
            window_side
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    #[serde(rename = "r")]
    Radius,
    #[serde(rename = "C")]
    Capacity,
    #[serde(rename = "lambda")]
    Density,
    #[serde(rename = "s")]
    Exponent,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Radius => "r",
            SweepVar::Capacity => "C",
            SweepVar::Density => "lambda",
            SweepVar::Exponent => "s",
        }
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "r" => Ok(SweepVar::Radius),
            "C" => Ok(SweepVar::Capacity),
            "lambda" | "λ" => Ok(SweepVar::Density),
            "s" => Ok(SweepVar::Exponent),
            other => Err(Error::invalid(
                "sweep",
                format!("unknown sweep variable `{other}` (expected r, C, lambda or s)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid("sweep", format!("`{t}` is not a number")))
        };
        if let Some((var, list)) = spec.split_once('=') {
            let var = var.parse()?;
            let values = list.split(',').map(number).collect::<Result<Vec<_>>>()?;
            return Ok(Sweep { var, values });
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let [var, start, stop, step] = parts[..] else {
            return Err(Error::invalid(
                "sweep",
                format!("expected VAR:START:STOP:STEP or VAR=v1,v2,..., got `{spec}`"),
            ));
        };
        let var = var.parse()?;
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if step <= 0.0 || stop < start {
            return Err(Error::invalid(
                "sweep",
                format!("need STEP > 0 and STOP >= START, got `{spec}`"),
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::invalid(
                "sweep",
                format!("{count} points is too many"),
            ));
        }
        let values = (0..count).map(|k| start + k as f64 * step).collect();
        Ok(Sweep { var, values })
    }
}

/// Fully specified parameters at one sweep value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub num_files: usize,
    pub chunks: u32,
    pub capacity: f64,
    pub lambda: f64,
    pub r: f64,
    pub s: f64,
    pub seed: u64,
}

impl SweepPoint {
    pub fn x(&self) -> f64 {
        self.lambda * PI * self.r * self.r
    }

    fn intensity(&self) -> Result<SpatialIntensity> {
        SpatialIntensity::new(self.lambda, self.r)
    }

    /// Capacity as an integer file count.
    fn integer_capacity(&self) -> Result<u32> {
        let c = self.capacity;
        if c < 0.0 || c.fract() != 0.0 || c > u32::MAX as f64 {
            return Err(Error::invalid(
                "C",
                format!("per-cache capacity must be a whole number, got {c}"),
            ));
        }
        Ok(c as u32)
    }

    fn chunking(&self) -> Result<ChunkingParams> {
        ChunkingParams::new(self.chunks, self.integer_capacity()?)
    }
}

/// Configuration with defaults applied and the sweep expanded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub sweep: Sweep,
    pub points: Vec<SweepPoint>,
    /// Ranked popularity for every point unless `s` or `L` is swept.
    weights: Option<(Popularity, Vec<usize>)>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let sweep = match &config.sweep {
            Some(spec) => spec.parse()?,
            None => Sweep {
                var: SweepVar::Radius,
                values: vec![config.r.unwrap_or(DEFAULT_RADIUS)],
            },
        };
        if sweep.values.is_empty() {
            return Err(Error::invalid("sweep", "no sweep values"));
        }
        let weights = match &config.weights_file {
            Some(path) => {
                if sweep.var == SweepVar::Exponent {
                    return Err(Error::invalid(
                        "sweep",
                        "cannot sweep s with a weights file",
                    ));
                }
                Some(Popularity::load_weights(path)?)
            }
            None => None,
        };
        if matches!(config.trials, Some(0)) {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if matches!(config.jobs, Some(0)) {
            return Err(Error::invalid("jobs", "must be at least 1"));
        }
        let base_seed = config.seed.unwrap_or(0);
        let num_files = match &weights {
            Some((pop, _)) => pop.len(),
            None => config.num_files.unwrap_or(DEFAULT_NUM_FILES),
        };
        let points = sweep
            .values
            .iter()
            .enumerate()
            .map(|(k, &value)| {
                let mut p = SweepPoint {
                    value,
                    num_files,
                    chunks: config.chunks.unwrap_or(DEFAULT_CHUNKS),
                    capacity: config.capacity.unwrap_or(DEFAULT_CAPACITY),
                    lambda: config.lambda.unwrap_or(DEFAULT_DENSITY),
                    r: config.r.unwrap_or(DEFAULT_RADIUS),
                    s: config.s.unwrap_or(DEFAULT_EXPONENT),
                    seed: rng::derive_seed(base_seed, k as u64),
                };
                match sweep.var {
                    SweepVar::Radius => p.r = value,
                    SweepVar::Capacity => p.capacity = value,
                    SweepVar::Density => p.lambda = value,
                    SweepVar::Exponent => p.s = value,
                }
                p
            })
            .collect();
        Ok(Experiment {
            config,
            sweep,
            points,
            weights,
        })
    }

    /// The configuration with defaults written out, minus fields that do not
    /// affect the output.
    pub fn resolved_config(&self) -> ExperimentConfig {
        let c = &self.config;
        let p = &self.points[0];
        let fixed = |swept: bool, v: f64| if swept { None } else { Some(v) };
        ExperimentConfig {
            sweep: Some(c.sweep.clone().unwrap_or_else(|| format!("r={}", p.r))),
            num_files: Some(p.num_files),
            chunks: Some(p.chunks),
            capacity: fixed(self.sweep.var == SweepVar::Capacity, p.capacity),
            lambda: fixed(self.sweep.var == SweepVar::Density, p.lambda),
            r: fixed(self.sweep.var == SweepVar::Radius, p.r),
            s: fixed(
                self.sweep.var == SweepVar::Exponent || self.weights.is_some(),
                p.s,
            ),
            trials: Some(self.trials()),
            seed: Some(self.seed()),
            jobs: None,
            out: None,
            ..c.clone()
        }
    }

    fn popularity(&self, point: &SweepPoint) -> Result<Popularity> {
        match &self.weights {
            Some((pop, _)) => Ok(pop.clone()),
            None => Popularity::zipf(ZipfParams::new(point.num_files, point.s)?),
        }
    }

    /// Original 1-based file identifier of rank `i` (0-based).
    fn file_id(&self, i: usize) -> usize {
        match &self.weights {
            Some((_, perm)) => perm[i] + 1,
            None => i + 1,
        }
    }

    fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    fn trials(&self) -> u64 {
        self.config.trials.unwrap_or(DEFAULT_TRIALS)
    }

    /// Evaluates `f` on every sweep point with at most `jobs` workers and
    /// returns the results in sweep order.
    fn map_points<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&SweepPoint) -> Result<T> + Sync,
    {
        let run = || self.points.par_iter().map(&f).collect::<Result<Vec<T>>>();
        match self.config.jobs {
            Some(jobs) => rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::invalid("jobs", e.to_string()))?
                .install(run),
            None => run(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    OptimizeIndividual,
    OptimizeAverage,
    Compare,
    SimulateStatic,
    SimulateLru,
    Che,
    EvalDataset,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::OptimizeIndividual => "optimize-individual",
            Command::OptimizeAverage => "optimize-average",
            Command::Compare => "compare",
            Command::SimulateStatic => "simulate-static",
            Command::SimulateLru => "simulate-lru",
            Command::Che => "che",
            Command::EvalDataset => "eval-dataset",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// CSV output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parses every cell of column `name` as a float.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column(name)?;
        self.rows.iter().map(|row| row[j].parse().ok()).collect()
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<output>", e);
        for line in &self.metadata {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Runs `command` and returns its table.
pub fn run(command: Command, config: ExperimentConfig) -> Result<Table> {
    let exp = Experiment::new(config)?;
    let (columns, rows) = match command {
        Command::OptimizeIndividual => optimize_individual(&exp)?,
        Command::OptimizeAverage => optimize_average(&exp)?,
        Command::Compare => compare(&exp)?,
        Command::SimulateStatic => simulate_static(&exp)?,
        Command::SimulateLru => simulate_lru(&exp)?,
        Command::Che => che(&exp)?,
        Command::EvalDataset => eval_dataset(&exp)?,
    };
    let mut echo = exp.resolved_config();
    if command == Command::EvalDataset {
        // density is measured from the positions file
        echo.lambda = None;
    }
    let metadata = vec![
        format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        format!("command: {command}"),
        format!("params: {}", serde_json::to_string(&echo)?),
        format!("seed: {}", exp.seed()),
    ];
    Ok(Table {
        metadata,
        columns: columns.into_iter().map(String::from).collect(),
        rows,
    })
}

type Rows = (Vec<&'static str>, Vec<Vec<String>>);

fn optimize_individual(exp: &Experiment) -> Result<Rows> {
    let var = exp.sweep.var.name();
    let blocks = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let sol = opt_individual::solve_dp(&pop, p.chunking()?, p.x())?;
        Ok(sol
            .allocation
            .counts()
            .iter()
            .enumerate()
            .map(|(i, n)| {
                vec![
                    num(p.value),
                    (i + 1).to_string(),
                    exp.file_id(i).to_string(),
                    n.to_string(),
                    num(sol.value),
                ]
            })
            .collect::<Vec<_>>())
    })?;
    Ok((vec![var, "i", "file", "n", "miss"], blocks.concat()))
}

fn optimize_average(exp: &Experiment) -> Result<Rows> {
    let var = exp.sweep.var.name();
    let blocks = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let sol = opt_average::solve_closed_form(&pop, p.x(), p.capacity)?;
        let miss = analytic::miss_average(sol.allocation.probs(), &pop, p.x())?;
        Ok(sol
            .allocation
            .probs()
            .iter()
            .enumerate()
            .map(|(i, q)| {
                vec![
                    num(p.value),
                    (i + 1).to_string(),
                    exp.file_id(i).to_string(),
                    num(*q),
                    num(sol.nu),
                    sol.breakpoints.k1.to_string(),
                    sol.breakpoints.k2.to_string(),
                    num(miss),
                    u8::from(sol.used_fallback).to_string(),
                ]
            })
            .collect::<Vec<_>>())
    })?;
    Ok((
        vec![var, "i", "file", "q", "nu", "k1", "k2", "miss", "fallback"],
        blocks.concat(),
    ))
}

/// Optimal per-cache and average-constraint miss probabilities at one point.
fn optimal_pair(pop: &Popularity, p: &SweepPoint) -> Result<(f64, f64)> {
    let x = p.x();
    let individual = if p.chunks == 1 {
        let alloc = opt_individual::solve_n1(pop, p.integer_capacity()? as usize)?;
        alloc.miss(pop, p.chunking()?, x)?
    } else {
        opt_individual::solve_dp(pop, p.chunking()?, x)?.value
    };
    let average = opt_average::solve_closed_form(pop, x, p.capacity)?;
    let average = analytic::miss_average(average.allocation.probs(), pop, x)?;
    Ok((individual, average))
}

fn compare(exp: &Experiment) -> Result<Rows> {
    if exp.points.iter().any(|p| p.chunks != 1) {
        return Err(Error::invalid(
            "N",
            "compare contrasts whole-file placements and needs N = 1",
        ));
    }
    let var = exp.sweep.var.name();
    let rows = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let (individual, average) = optimal_pair(&pop, p)?;
        Ok(vec![
            num(p.value),
            num(p.x()),
            num(individual),
            num(average),
        ])
    })?;
    Ok((vec![var, "x", "miss_individual", "miss_average"], rows))
}

fn simulate_static(exp: &Experiment) -> Result<Rows> {
    let var = exp.sweep.var.name();
    let trials = exp.trials();
    let blocks = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let x = p.x();
        let intensity = p.intensity()?;
        let params = p.chunking()?;
        let dp = opt_individual::solve_dp(&pop, params, x)?;
        let ind = simulate::static_miss_individual(
            &dp.allocation,
            &pop,
            params,
            intensity,
            trials,
            p.seed,
        )?;
        let avg = opt_average::solve_closed_form(&pop, x, p.capacity)?;
        let avg_seed = rng::derive_seed(p.seed, 1);
        let avg_report =
            simulate::static_miss_average(&avg.allocation, &pop, intensity, trials, avg_seed)?;
        let avg_exact = analytic::miss_average(avg.allocation.probs(), &pop, x)?;
        Ok([
            ("individual", dp.value, ind),
            ("average", avg_exact, avg_report),
        ]
        .into_iter()
        .map(|(kind, exact, rep)| {
            vec![
                num(p.value),
                num(x),
                kind.to_string(),
                num(exact),
                num(rep.miss_estimate),
                num(rep.std_error),
                rep.samples.to_string(),
                rep.seed.to_string(),
            ]
        })
        .collect::<Vec<_>>())
    })?;
    Ok((
        vec![
            var,
            "x",
            "placement",
            "analytic",
            "estimate",
            "std_error",
            "samples",
            "seed",
        ],
        blocks.concat(),
    ))
}

/// Che miss for a pooled cache of `capacity` files; zero once the pool can
/// hold the whole catalog.
fn pooled_che_miss(pop: &Popularity, capacity: f64) -> Result<f64> {
    if capacity >= pop.len() as f64 {
        Ok(0.0)
    } else {
        simulate::che_miss(pop, capacity)
    }
}

fn simulate_lru(exp: &Experiment) -> Result<Rows> {
    let var = exp.sweep.var.name();
    let rows = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let c = p.integer_capacity()? as usize;
        let warmup = exp
            .config
            .warmup
            .unwrap_or_else(|| LruConfig::default_warmup(pop.len(), c));
        let requests = exp.config.requests.unwrap_or(DEFAULT_LRU_REQUESTS);
        let window = match exp.config.window_side {
            Some(side) => Window::torus(side)?,
            None => LruConfig::default_window(p.r)?,
        };
        let report = simulate::lru_simulate(&LruConfig {
            capacity_per_cache: c,
            density: p.lambda,
            radius: p.r,
            window,
            num_requests: warmup + requests,
            warmup_requests: warmup,
            popularity: pop.clone(),
            seed: p.seed,
        })?;
        let x = p.x();
        let optimum = opt_average::solve_closed_form(&pop, x, p.capacity)?;
        let optimum = analytic::miss_average(optimum.allocation.probs(), &pop, x)?;
        let che = pooled_che_miss(&pop, p.capacity * x)?;
        Ok(vec![
            num(p.value),
            num(x),
            num(report.miss_estimate),
            num(report.std_error),
            num(optimum),
            num(che),
            report.samples.to_string(),
            report.seed.to_string(),
            u8::from(report.degenerate_field).to_string(),
        ])
    })?;
    Ok((
        vec![
            var,
            "x",
            "lru_miss",
            "lru_std_error",
            "optimal_avg_miss",
            "che_miss",
            "samples",
            "seed",
            "degenerate",
        ],
        rows,
    ))
}

fn che(exp: &Experiment) -> Result<Rows> {
    let var = exp.sweep.var.name();
    let rows = exp.map_points(|p| {
        let pop = exp.popularity(p)?;
        let capacity = p.capacity * p.x();
        let t = if capacity < pop.len() as f64 {
            simulate::che_characteristic_time(&pop, capacity)?
        } else {
            f64::INFINITY
        };
        Ok(vec![
            num(p.value),
            num(p.x()),
            num(capacity),
            num(t),
            num(pooled_che_miss(&pop, capacity)?),
        ])
    })?;
    Ok((
        vec![var, "x", "capacity", "characteristic_time", "che_miss"],
        rows,
    ))
}

fn load_topology(exp: &Experiment) -> Result<PointSet> {
    let path = exp
        .config
        .positions
        .as_ref()
        .ok_or_else(|| Error::invalid("positions", "eval-dataset needs a positions file"))?;
    geometry::load_positions(path, exp.config.area.map(|[w, h]| (w, h)))
}

fn eval_dataset(exp: &Experiment) -> Result<Rows> {
    if exp.sweep.var == SweepVar::Density {
        return Err(Error::invalid(
            "sweep",
            "density comes from the dataset and cannot be swept",
        ));
    }
    let points = load_topology(exp)?;
    if points.is_empty() {
        return Err(Error::invalid(
            "positions",
            "the positions file holds no points",
        ));
    }
    let density = points.density();
    let trials = exp.trials();
    let var = exp.sweep.var.name();
    let blocks = exp.map_points(|p| {
        let p = SweepPoint {
            lambda: density,
            ..*p
        };
        let pop = exp.popularity(&p)?;
        let x = p.x();
        let params = p.chunking()?;
        let dp = opt_individual::solve_dp(&pop, params, x)?;
        let avg = opt_average::solve_closed_form(&pop, x, p.capacity)?;
        let avg_exact = analytic::miss_average(avg.allocation.probs(), &pop, x)?;
        let ind = simulate::dataset_miss(
            &points,
            Placement::Individual {
                allocation: &dp.allocation,
                params,
            },
            &pop,
            p.r,
            trials,
            p.seed,
        )?;
        let avg_report = simulate::dataset_miss(
            &points,
            Placement::Average(&avg.allocation),
            &pop,
            p.r,
            trials,
            rng::derive_seed(p.seed, 1),
        )?;
        Ok([
            ("individual", ind, dp.value),
            ("average", avg_report, avg_exact),
        ]
        .into_iter()
        .map(|(kind, rep, model)| {
            vec![
                num(p.value),
                num(x),
                kind.to_string(),
                num(rep.miss_estimate),
                num(rep.std_error),
                num(model),
                rep.samples.to_string(),
                rep.seed.to_string(),
            ]
        })
        .collect::<Vec<_>>())
    })?;
    Ok((
        vec![
            var,
            "x",
            "placement",
            "miss_dataset",
            "std_error",
            "miss_poisson_model",
            "samples",
            "seed",
        ],
        blocks.concat(),
    ))
}
