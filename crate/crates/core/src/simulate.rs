//! Monte Carlo checks of the analytic miss probabilities, the distributed LRU
//! policy, and the Che approximation for a single pooled LRU cache.

use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, ChunkingParams, SpatialIntensity};
use crate::catalog::Popularity;
use crate::error::{Error, Result};
use crate::geometry::{self, GridIndex, Point, PointSet, Window};
use crate::opt_average::ProbAllocation;
use crate::opt_individual::Allocation;
use crate::rng::{self, SimRng};

/// Static trials per random stream.
const TRIALS_PER_BLOCK: u64 = 4096;

const CHE_TOLERANCE: f64 = 1e-10;
const CHE_MAX_ITER: usize = 400;

/// Outcome of a Monte Carlo estimate of a miss probability.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub miss_estimate: f64,
    /// `sqrt(p (1 - p) / samples)`.
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    /// Seconds; excluded from [`SimReport::same_outcome`].
    pub wall_time: f64,
    /// Set when the sampled cache field was empty.
    pub degenerate_field: bool,
    /// Free-form disclosures about how the estimate was produced.
    pub notes: Vec<String>,
}

impl SimReport {
    fn from_counts(misses: u64, samples: u64, seed: u64, started: Instant) -> Self {
        let p = misses as f64 / samples as f64;
        SimReport {
            miss_estimate: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
            seed,
            wall_time: started.elapsed().as_secs_f64(),
            degenerate_field: false,
            notes: Vec::new(),
        }
    }

    /// True when `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.miss_estimate - value).abs() <= k * self.std_error
    }

    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &SimReport) -> bool {
        self.miss_estimate.to_bits() == other.miss_estimate.to_bits()
            && self.std_error.to_bits() == other.std_error.to_bits()
            && self.samples == other.samples
            && self.seed == other.seed
            && self.degenerate_field == other.degenerate_field
            && self.notes == other.notes
    }
}

fn file_sampler(pop: &Popularity) -> WeightedIndex<f64> {
    WeightedIndex::new(pop.probs()).expect("popularity entries are positive")
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is required"));
    }
    Ok(())
}

/// Runs `trials` independent Bernoulli trials split into fixed blocks, each
/// block on its own stream, and counts misses. The count does not depend on
/// the number of worker threads.
fn run_blocks<F>(trials: u64, seed: u64, trial: F) -> u64
where
    F: Fn(&mut SimRng) -> bool + Sync,
{
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b);
            let n = TRIALS_PER_BLOCK.min(trials - b * TRIALS_PER_BLOCK);
            (0..n).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum()
}

/// Smallest window around a client that contains its whole reception disk.
/// Points outside the disk never influence a static trial.
fn reception_window(radius: f64) -> Result<Window> {
    Window::new(2.0 * radius, 2.0 * radius, false)
}

/// Monte Carlo estimate of the per-cache allocation's miss probability.
///
/// Each trial samples a fresh Poisson field around a client at the window
/// center, draws a file from the popularity, and misses unless at least
/// `ceil(N / n_i)` caches are in range.
pub fn static_miss_individual(
    alloc: &Allocation,
    pop: &Popularity,
    params: ChunkingParams,
    intensity: SpatialIntensity,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    check_trials(trials)?;
    if alloc.len() != pop.len() {
        return Err(Error::LengthMismatch {
            expected: pop.len(),
            got: alloc.len(),
        });
    }
    let started = Instant::now();
    let window = reception_window(intensity.radius())?;
    let center = window.center();
    let files = file_sampler(pop);
    let needed: Vec<Option<u32>> = alloc
        .counts()
        .iter()
        .map(|&n| analytic::caches_needed(n, params.chunks_per_file))
        .collect();
    let misses = run_blocks(trials, seed, |rng| {
        let field = geometry::sample_poisson(intensity.density(), window, rng)
            .expect("validated intensity");
        let file = files.sample(rng);
        match needed[file] {
            None => true,
            Some(m) => {
                let seen = geometry::count_in_range(&field, center, intensity.radius())
                    .expect("validated radius");
                seen < m as usize
            }
        }
    });
    Ok(SimReport::from_counts(misses, trials, seed, started))
}

/// Monte Carlo estimate of a probabilistic placement's miss probability.
///
/// Each trial samples a Poisson field, draws a file `i`, thins the field with
/// probability `q_i`, and misses when no retained cache is in range.
pub fn static_miss_average(
    q: &ProbAllocation,
    pop: &Popularity,
    intensity: SpatialIntensity,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    check_trials(trials)?;
    if q.len() != pop.len() {
        return Err(Error::LengthMismatch {
            expected: pop.len(),
            got: q.len(),
        });
    }
    let started = Instant::now();
    let window = reception_window(intensity.radius())?;
    let center = window.center();
    let files = file_sampler(pop);
    let misses = run_blocks(trials, seed, |rng| {
        let field = geometry::sample_poisson(intensity.density(), window, rng)
            .expect("validated intensity");
        let file = files.sample(rng);
        let holders = geometry::thin(&field, q.probs()[file], rng).expect("q in [0, 1]");
        geometry::count_in_range(&holders, center, intensity.radius()).expect("validated radius")
            == 0
    });
    Ok(SimReport::from_counts(misses, trials, seed, started))
}

/// Distributed LRU run parameters.
#[derive(Debug, Clone)]
pub struct LruConfig {
    /// Files per cache.
    pub capacity_per_cache: usize,
    pub density: f64,
    pub radius: f64,
    /// Must be toroidal.
    pub window: Window,
    /// Total requests, warmup included.
    pub num_requests: u64,
    pub warmup_requests: u64,
    pub popularity: Popularity,
    pub seed: u64,
}

impl LruConfig {
    /// Default warmup: `10 * L * max(1, C)` requests.
    pub fn default_warmup(num_files: usize, capacity: usize) -> u64 {
        10 * num_files as u64 * capacity.max(1) as u64
    }

    /// Default torus side: twenty radii.
    pub fn default_window(radius: f64) -> Result<Window> {
        Window::torus(20.0 * radius)
    }

    fn validate(&self) -> Result<()> {
        if self.capacity_per_cache == 0 {
            return Err(Error::invalid("capacity_per_cache", "must be at least 1"));
        }
        if self.warmup_requests >= self.num_requests {
            return Err(Error::invalid(
                "warmup_requests",
                format!(
                    "warmup {} must be below total requests {}",
                    self.warmup_requests, self.num_requests
                ),
            ));
        }
        if !self.window.is_toroidal() {
            return Err(Error::invalid("window", "LRU runs need a toroidal window"));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::invalid(
                "density",
                format!("must be positive, got {}", self.density),
            ));
        }
        if !(self.radius.is_finite() && self.radius > 0.0)
            || self.radius > self.window.max_toroidal_radius()
        {
            return Err(Error::invalid(
                "radius",
                format!(
                    "must lie in (0, {}], got {}",
                    self.window.max_toroidal_radius(),
                    self.radius
                ),
            ));
        }
        Ok(())
    }
}

/// Per-cache LRU lists, most recent first.
#[derive(Debug, Clone)]
pub struct CacheState {
    capacity: usize,
    lists: Vec<Vec<u32>>,
}

impl CacheState {
    pub fn new(num_caches: usize, capacity: usize) -> Self {
        CacheState {
            capacity,
            lists: vec![Vec::with_capacity(capacity + 1); num_caches],
        }
    }

    pub fn list(&self, cache: usize) -> &[u32] {
        &self.lists[cache]
    }

    pub fn holds(&self, cache: usize, file: u32) -> bool {
        self.lists[cache].contains(&file)
    }

    /// Moves `file` to the head of `cache`'s list.
    pub fn touch(&mut self, cache: usize, file: u32) {
        let list = &mut self.lists[cache];
        if let Some(pos) = list.iter().position(|&f| f == file) {
            list[..=pos].rotate_right(1);
        }
    }

    /// Puts `file` at the head of `cache`'s list, dropping the tail when the
    /// list overflows. Returns the evicted file.
    pub fn insert(&mut self, cache: usize, file: u32) -> Option<u32> {
        if self.holds(cache, file) {
            self.touch(cache, file);
            return None;
        }
        let list = &mut self.lists[cache];
        list.insert(0, file);
        if list.len() > self.capacity {
            list.pop()
        } else {
            None
        }
    }
}

/// Simulates the distributed LRU policy on one fixed cache field.
///
/// Requests arrive one at a time from uniformly placed clients. A request
/// hits when an in-range cache holds the file; the nearest such cache serves
/// it and moves it to the head of its list. Otherwise the file is fetched and
/// inserted at the head of the nearest cache overall, evicting its tail if
/// full. Only requests after the warmup count toward the estimate.
pub fn lru_simulate(config: &LruConfig) -> Result<SimReport> {
    config.validate()?;
    let started = Instant::now();
    let field = geometry::sample_poisson(
        config.density,
        config.window,
        &mut rng::stream(config.seed, 0),
    )?;
    let measured = config.num_requests - config.warmup_requests;
    if field.is_empty() {
        let mut report = SimReport::from_counts(measured, measured, config.seed, started);
        report.degenerate_field = true;
        report.notes.push("no caches in the sampled field".into());
        return Ok(report);
    }

    let index = GridIndex::new(&field, config.radius);
    let mut state = CacheState::new(field.len(), config.capacity_per_cache);
    let files = file_sampler(&config.popularity);
    let mut rng = rng::stream(config.seed, 1);
    let mut misses = 0u64;

    for step in 0..config.num_requests {
        let client = config.window.sample_uniform(&mut rng);
        let file = files.sample(&mut rng) as u32;
        let hit = serve(&index, &mut state, client, file, config.radius);
        if !hit && step >= config.warmup_requests {
            misses += 1;
        }
    }

    let mut report = SimReport::from_counts(misses, measured, config.seed, started);
    report
        .notes
        .push("hits refresh only the nearest in-range holder".into());
    Ok(report)
}

fn serve(
    index: &GridIndex<'_>,
    state: &mut CacheState,
    client: Point,
    file: u32,
    radius: f64,
) -> bool {
    let mut holder: Option<(usize, f64)> = None;
    let mut closest: Option<(usize, f64)> = None;
    index.for_each_within(client, radius, |cache, d2| {
        if closest.is_none_or(|(_, b)| d2 < b) {
            closest = Some((cache, d2));
        }
        if state.holds(cache, file) && holder.is_none_or(|(_, b)| d2 < b) {
            holder = Some((cache, d2));
        }
    });
    if let Some((cache, _)) = holder {
        state.touch(cache, file);
        return true;
    }
    let target = closest.or_else(|| index.nearest(client));
    if let Some((cache, _)) = target {
        state.insert(cache, file);
    }
    false
}

fn check_che_capacity(pop: &Popularity, capacity: f64) -> Result<()> {
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(Error::invalid(
            "capacity",
            format!("must be positive, got {capacity}"),
        ));
    }
    if capacity >= pop.len() as f64 {
        return Err(Error::Infeasible(format!(
            "capacity {capacity} must be below the catalog size {}",
            pop.len()
        )));
    }
    Ok(())
}

/// Expected occupancy `sum_i (1 - e^{-p_i t})` of an LRU cache after `t`
/// unit-rate requests.
fn che_occupancy(pop: &Popularity, t: f64) -> f64 {
    pop.probs().iter().rev().map(|p| -(-p * t).exp_m1()).sum()
}

/// Characteristic time `T` solving `sum_i (1 - e^{-p_i T}) = capacity`.
pub fn che_characteristic_time(pop: &Popularity, capacity: f64) -> Result<f64> {
    check_che_capacity(pop, capacity)?;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while che_occupancy(pop, hi) < capacity {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence {
                iterations: CHE_MAX_ITER,
            });
        }
    }
    // Newton on the concave occupancy curve, falling back to bisection when a
    // step leaves the bracket; iterate until the step stalls at rounding level.
    let mut t = 0.5 * (lo + hi);
    for _ in 0..CHE_MAX_ITER {
        let residual = che_occupancy(pop, t) - capacity;
        if residual == 0.0 {
            return Ok(t);
        }
        if residual > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope: f64 = pop.probs().iter().map(|p| p * (-p * t).exp()).sum();
        let newton = t - residual / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= 4.0 * f64::EPSILON * t || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let residual = (che_occupancy(pop, t) - capacity).abs();
    if residual < CHE_TOLERANCE {
        Ok(t)
    } else {
        Err(Error::NonConvergence {
            iterations: CHE_MAX_ITER,
        })
    }
}

/// Che approximation of a single LRU cache's miss probability,
/// `sum_i p_i e^{-p_i T}`.
pub fn che_miss(pop: &Popularity, capacity: f64) -> Result<f64> {
    let t = che_characteristic_time(pop, capacity)?;
    Ok(pop
        .probs()
        .iter()
        .rev()
        .map(|p| p * (-p * t).exp())
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

/// Placement evaluated on a fixed topology.
#[derive(Debug, Clone, Copy)]
pub enum Placement<'a> {
    Individual {
        allocation: &'a Allocation,
        params: ChunkingParams,
    },
    Average(&'a ProbAllocation),
}

impl Placement<'_> {
    fn len(&self) -> usize {
        match self {
            Placement::Individual { allocation, .. } => allocation.len(),
            Placement::Average(q) => q.len(),
        }
    }
}

/// Miss probability of a placement on a given (typically ingested) topology.
///
/// Clients are uniform in the window shrunk by `radius` on every side, so
/// every reception disk lies inside the data. Deterministic placements miss
/// when fewer than `ceil(N / n_i)` caches are in range; probabilistic ones
/// draw each in-range cache's copy of the file independently per trial.
pub fn dataset_miss(
    points: &PointSet,
    placement: Placement<'_>,
    pop: &Popularity,
    radius: f64,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    check_trials(trials)?;
    if placement.len() != pop.len() {
        return Err(Error::LengthMismatch {
            expected: pop.len(),
            got: placement.len(),
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(
            "radius",
            format!("must be positive, got {radius}"),
        ));
    }
    let window = points.window();
    let (w, h) = (window.width(), window.height());
    let inner = if window.is_toroidal() {
        Window::new(w, h, false)?
    } else if w > 2.0 * radius && h > 2.0 * radius {
        Window::new(w - 2.0 * radius, h - 2.0 * radius, false)?
    } else {
        return Err(Error::EmptyMargin {
            radius,
            width: w,
            height: h,
        });
    };
    let offset = if window.is_toroidal() { 0.0 } else { radius };
    let started = Instant::now();
    let index = GridIndex::new(
        points,
        radius.max(window.width().min(window.height()) / 4096.0),
    );
    let files = file_sampler(pop);
    let misses = run_blocks(trials, seed, |rng| {
        let p = inner.sample_uniform(rng);
        let client = Point::new(p.x + offset, p.y + offset);
        let file = files.sample(rng);
        match placement {
            Placement::Individual { allocation, params } => {
                match analytic::caches_needed(allocation.counts()[file], params.chunks_per_file) {
                    None => true,
                    Some(m) => index.count_within(client, radius) < m as usize,
                }
            }
            Placement::Average(q) => {
                let keep = q.probs()[file];
                let mut found = false;
                index.for_each_within(client, radius, |_, _| {
                    if !found && rng.random_bool(keep) {
                        found = true;
                    }
                });
                !found
            }
        }
    });
    let mut report = SimReport::from_counts(misses, trials, seed, started);
    if !window.is_toroidal() {
        report.notes.push(format!(
            "clients restricted to the window shrunk by r = {radius}"
        ));
    }
    Ok(report)
}
