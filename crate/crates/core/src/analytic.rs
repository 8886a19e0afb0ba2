//! Closed-form miss probabilities on a homogeneous Poisson cache field.
//!
//! Everything here depends on the spatial model only through
//! `x = density * pi * radius^2`, the mean number of caches within reach of a
//! client.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catalog::Popularity;
use crate::error::{Error, Result};

/// Above this mean, `exp(-x)` underflows and the Poisson CDF is summed in log
/// space.
const LOG_SPACE_THRESHOLD: f64 = 700.0;

/// Cache density, connection radius and the derived mean in-range count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialIntensity {
    density: f64,
    radius: f64,
    mean_in_range: f64,
}

impl SpatialIntensity {
    pub fn new(density: f64, radius: f64) -> Result<Self> {
        if !(density.is_finite() && density > 0.0) {
            return Err(Error::invalid(
                "density",
                format!("must be positive, got {density}"),
            ));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "radius",
                format!("must be positive, got {radius}"),
            ));
        }
        Ok(SpatialIntensity {
            density,
            radius,
            mean_in_range: density * PI * radius * radius,
        })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `x = density * pi * radius^2`.
    pub fn mean_in_range(&self) -> f64 {
        self.mean_in_range
    }
}

/// Coded-chunk layout: every file is split into `chunks_per_file` pieces and
/// each cache holds `cache_capacity` coded combinations in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkingParams {
    pub chunks_per_file: u32,
    pub cache_capacity: u32,
}

impl ChunkingParams {
    pub fn new(chunks_per_file: u32, cache_capacity: u32) -> Result<Self> {
        if chunks_per_file == 0 {
            return Err(Error::invalid("chunks_per_file", "must be at least 1"));
        }
        Ok(ChunkingParams {
            chunks_per_file,
            cache_capacity,
        })
    }

    /// Checks `C < L * N` against a catalog of `num_files` files.
    pub fn check_catalog(&self, num_files: usize) -> Result<()> {
        let slots = num_files as u64 * self.chunks_per_file as u64;
        if self.cache_capacity as u64 >= slots {
            return Err(Error::Infeasible(format!(
                "capacity {} must be below files x chunks = {slots}",
                self.cache_capacity
            )));
        }
        Ok(())
    }
}

fn check_mean(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(
            "x",
            format!("mean in-range count must be positive, got {x}"),
        ));
    }
    Ok(())
}

/// `Q(m, x) = sum_{k<m} e^{-x} x^k / k!`, the probability that a Poisson(x)
/// count is below `m`.
///
/// `m = 0` gives the empty sum. `x` must be positive.
pub fn poisson_tail_q(m: u32, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if m == 0 {
        return 0.0;
    }
    let total = if x <= LOG_SPACE_THRESHOLD {
        let mut term = (-x).exp();
        let mut sum = term;
        for k in 1..m {
            term *= x / k as f64;
            sum += term;
        }
        sum
    } else {
        // log t_k = -x + k ln x - ln k!
        let ln_x = x.ln();
        let mut log_terms = Vec::with_capacity(m as usize);
        let mut log_term = -x;
        log_terms.push(log_term);
        for k in 1..m {
            log_term += ln_x - (k as f64).ln();
            log_terms.push(log_term);
        }
        let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak < -745.0 {
            return 0.0;
        }
        let scaled: f64 = log_terms.iter().map(|l| (l - peak).exp()).sum();
        (peak + scaled.ln()).exp()
    };
    total.clamp(0.0, 1.0)
}

/// Coded combinations needed from distinct caches to rebuild a file when each
/// cache holds `n` of them.
pub fn caches_needed(n: u32, chunks_per_file: u32) -> Option<u32> {
    (n > 0).then(|| chunks_per_file.div_ceil(n))
}

/// Miss probability of one file when every cache stores `n` of its coded
/// chunks. An unstored file (`n = 0`) always misses.
pub fn per_file_miss_individual(n: u32, params: ChunkingParams, x: f64) -> Result<f64> {
    check_mean(x)?;
    if n > params.chunks_per_file {
        return Err(Error::invalid(
            "n",
            format!(
                "stores {n} combinations but a file only has {} chunks",
                params.chunks_per_file
            ),
        ));
    }
    Ok(match caches_needed(n, params.chunks_per_file) {
        None => 1.0,
        Some(m) => poisson_tail_q(m, x),
    })
}

/// `sum_i p_i Q(ceil(N / n_i), x)` for a per-cache allocation.
pub fn miss_individual(
    counts: &[u32],
    pop: &Popularity,
    params: ChunkingParams,
    x: f64,
) -> Result<f64> {
    if counts.len() != pop.len() {
        return Err(Error::LengthMismatch {
            expected: pop.len(),
            got: counts.len(),
        });
    }
    let mut total = 0.0;
    for (&n, &p) in counts.iter().zip(pop.probs()) {
        total += p * per_file_miss_individual(n, params, x)?;
    }
    Ok(total)
}

/// `sum_i p_i exp(-q_i x)` for a probabilistic placement.
pub fn miss_average(q: &[f64], pop: &Popularity, x: f64) -> Result<f64> {
    check_mean(x)?;
    if q.len() != pop.len() {
        return Err(Error::LengthMismatch {
            expected: pop.len(),
            got: q.len(),
        });
    }
    if let Some(v) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(
            "q",
            format!("storage probability {v} outside [0, 1]"),
        ));
    }
    Ok(q.iter()
        .zip(pop.probs())
        .map(|(qi, p)| p * (-qi * x).exp())
        .sum())
}

/// Large-radius miss floor of the single-chunk per-cache optimum: the mass of
/// files that are never stored.
pub fn individual_limit_floor(pop: &Popularity, capacity: usize) -> Result<f64> {
    if capacity > pop.len() {
        return Err(Error::invalid(
            "capacity",
            format!("{capacity} exceeds the catalog size {}", pop.len()),
        ));
    }
    Ok(pop.tail_mass(capacity))
}
