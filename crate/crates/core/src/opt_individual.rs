//! Optimal per-cache placement of coded chunks.
//!
//! Every cache stores the same allocation `n_i` (coded combinations of file
//! `i`) with `sum n_i = C`. The objective `sum p_i Q(ceil(N / n_i), x)` is
//! separable but not convex for `N > 1`, so it is solved exactly with a
//! knapsack-style dynamic program over (files, capacity).

use serde::Serialize;

use crate::analytic::{self, ChunkingParams};
use crate::catalog::Popularity;
use crate::error::{Error, Result};

/// Default cap on the number of allocations [`brute_force`] will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// Objective values closer than this are treated as tied by [`brute_force`].
const TIE_EPS: f64 = 1e-14;

/// Per-file count of coded combinations held by every cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    counts: Vec<u32>,
}

impl Allocation {
    /// Validates `sum n_i = C` and `n_i <= N`.
    pub fn new(counts: Vec<u32>, params: ChunkingParams) -> Result<Self> {
        let total: u64 = counts.iter().map(|&n| n as u64).sum();
        if total != params.cache_capacity as u64 {
            return Err(Error::invalid(
                "counts",
                format!(
                    "allocation uses {total} slots, capacity is {}",
                    params.cache_capacity
                ),
            ));
        }
        if let Some(n) = counts.iter().find(|&&n| n > params.chunks_per_file) {
            return Err(Error::invalid(
                "counts",
                format!("{n} exceeds {} chunks per file", params.chunks_per_file),
            ));
        }
        Ok(Allocation { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] >= w[1])
    }

    /// Miss probability of this allocation.
    pub fn miss(&self, pop: &Popularity, params: ChunkingParams, x: f64) -> Result<f64> {
        analytic::miss_individual(&self.counts, pop, params, x)
    }
}

/// Value table `F(l, c)` and argmin table of the dynamic program.
///
/// Rows are files (0-based), columns are capacities `0..=C`. `F(l, c)` is the
/// optimal objective restricted to files `0..=l` using exactly `c` slots.
#[derive(Debug, Clone)]
pub struct DpTable {
    columns: usize,
    values: Vec<f64>,
    choices: Vec<u32>,
    evaluations: u64,
}

impl DpTable {
    pub fn num_files(&self) -> usize {
        self.values.len() / self.columns
    }

    pub fn capacity(&self) -> usize {
        self.columns - 1
    }

    pub fn value(&self, file: usize, c: usize) -> f64 {
        self.values[file * self.columns + c]
    }

    /// Minimizing count for `file` at capacity `c`. Row 0 stores the residual
    /// `c` itself, which the backtrack assigns to the first file.
    pub fn choice(&self, file: usize, c: usize) -> u32 {
        self.choices[file * self.columns + c]
    }

    /// Number of candidate evaluations performed while filling the table.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    /// Normalized optimum: within bounds and sorted non-increasing.
    pub allocation: Allocation,
    /// `F(L - 1, C)`.
    pub value: f64,
    /// Plain backtrack output before normalization; the first entry may exceed
    /// `N` when surplus capacity was parked on the first file.
    pub raw_counts: Vec<u32>,
    pub table: DpTable,
}

fn check_instance(pop: &Popularity, params: ChunkingParams, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(
            "x",
            format!("mean in-range count must be positive, got {x}"),
        ));
    }
    params.check_catalog(pop.len())
}

/// `f(n)` for `n = 0..=N`.
fn miss_by_count(params: ChunkingParams, x: f64) -> Result<Vec<f64>> {
    (0..=params.chunks_per_file)
        .map(|n| analytic::per_file_miss_individual(n, params, x))
        .collect()
}

/// Exact minimizer of the per-cache miss probability.
///
/// Fills `F(l, c)` for every file and every capacity, breaking argmin ties
/// toward the smallest count, then backtracks from `F(L - 1, C)`. The
/// backtracked allocation is normalized: surplus parked on the first file is
/// moved to the earliest files with room, and the result is sorted
/// non-increasing. Neither step changes the objective because `f` is
/// non-increasing and popularity is sorted.
pub fn solve_dp(pop: &Popularity, params: ChunkingParams, x: f64) -> Result<DpSolution> {
    check_instance(pop, params, x)?;
    let chunks = params.chunks_per_file as usize;
    let capacity = params.cache_capacity as usize;
    let files = pop.len();
    let columns = capacity + 1;
    let f = miss_by_count(params, x)?;

    let mut values = vec![0.0; files * columns];
    let mut choices = vec![0u32; files * columns];
    let mut evaluations = 0u64;

    let p0 = pop.get(0);
    for c in 0..columns {
        values[c] = p0 * f[c.min(chunks)];
        choices[c] = c as u32;
    }

    for file in 1..files {
        let p = pop.get(file);
        let (prev_rows, rest) = values.split_at_mut(file * columns);
        let prev = &prev_rows[(file - 1) * columns..];
        let row = &mut rest[..columns];
        let choice_row = &mut choices[file * columns..(file + 1) * columns];
        for c in 0..columns {
            let mut best = f64::INFINITY;
            let mut best_n = 0;
            for n in 0..=c.min(chunks) {
                evaluations += 1;
                let candidate = prev[c - n] + p * f[n];
                if candidate < best {
                    best = candidate;
                    best_n = n;
                }
            }
            row[c] = best;
            choice_row[c] = best_n as u32;
        }
    }

    let table = DpTable {
        columns,
        values,
        choices,
        evaluations,
    };

    let mut raw_counts = vec![0u32; files];
    let mut c = capacity;
    for file in (1..files).rev() {
        let n = table.choice(file, c);
        raw_counts[file] = n;
        c -= n as usize;
    }
    raw_counts[0] = c as u32;

    let counts = normalize(&raw_counts, params.chunks_per_file);
    let allocation = Allocation::new(counts, params)?;
    let value = table.value(files - 1, capacity);
    Ok(DpSolution {
        allocation,
        value,
        raw_counts,
        table,
    })
}

fn normalize(raw: &[u32], chunks: u32) -> Vec<u32> {
    let mut counts = raw.to_vec();
    let mut surplus = counts[0].saturating_sub(chunks);
    counts[0] -= surplus;
    for n in counts.iter_mut() {
        if surplus == 0 {
            break;
        }
        let add = (chunks - *n).min(surplus);
        *n += add;
        surplus -= add;
    }
    debug_assert_eq!(surplus, 0, "capacity below files x chunks leaves room");
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}

/// Single-chunk optimum: store the `capacity` most popular files everywhere.
pub fn solve_n1(pop: &Popularity, capacity: usize) -> Result<Allocation> {
    if capacity > pop.len() {
        return Err(Error::Infeasible(format!(
            "capacity {capacity} exceeds the catalog size {}",
            pop.len()
        )));
    }
    let counts = (0..pop.len()).map(|i| (i < capacity) as u32).collect();
    Ok(Allocation { counts })
}

/// Number of ways to split `capacity` into `files` parts each at most
/// `chunks`, saturating at `u128::MAX`.
pub fn count_allocations(files: usize, chunks: u32, capacity: u32) -> u128 {
    let capacity = capacity as usize;
    let chunks = chunks as usize;
    let mut ways = vec![0u128; capacity + 1];
    ways[0] = 1;
    for _ in 0..files {
        let mut next = vec![0u128; capacity + 1];
        for (c, slot) in next.iter_mut().enumerate() {
            let mut acc = 0u128;
            for n in 0..=c.min(chunks) {
                acc = acc.saturating_add(ways[c - n]);
            }
            *slot = acc;
        }
        ways = next;
    }
    ways[capacity]
}

/// Exhaustive search over all feasible allocations with the default cap.
pub fn brute_force(pop: &Popularity, params: ChunkingParams, x: f64) -> Result<(Allocation, f64)> {
    brute_force_with_cap(pop, params, x, BRUTE_FORCE_CAP)
}

/// Exhaustive search over all feasible allocations.
///
/// Allocations are visited in lexicographically decreasing order and only a
/// strictly better value replaces the incumbent, so among tied optima the
/// lexicographically largest one is returned.
pub fn brute_force_with_cap(
    pop: &Popularity,
    params: ChunkingParams,
    x: f64,
    cap: u128,
) -> Result<(Allocation, f64)> {
    check_instance(pop, params, x)?;
    let count = count_allocations(pop.len(), params.chunks_per_file, params.cache_capacity);
    if count > cap {
        return Err(Error::InstanceTooLarge { count, cap });
    }
    let f = miss_by_count(params, x)?;
    let mut search = Search {
        probs: pop.probs(),
        f: &f,
        chunks: params.chunks_per_file,
        current: vec![0; pop.len()],
        best: None,
    };
    search.descend(0, params.cache_capacity, 0.0);
    let (counts, value) = search
        .best
        .expect("C < L*N guarantees a feasible allocation");
    Ok((Allocation::new(counts, params)?, value))
}

struct Search<'a> {
    probs: &'a [f64],
    f: &'a [f64],
    chunks: u32,
    current: Vec<u32>,
    best: Option<(Vec<u32>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, file: usize, remaining: u32, partial: f64) {
        let files = self.probs.len();
        if file == files {
            if remaining == 0 {
                let better = match &self.best {
                    None => true,
                    Some((_, v)) => partial < v - TIE_EPS,
                };
                if better {
                    self.best = Some((self.current.clone(), partial));
                }
            }
            return;
        }
        let later = (files - file - 1) as u32 * self.chunks;
        let lo = remaining.saturating_sub(later);
        let hi = remaining.min(self.chunks);
        for n in (lo..=hi).rev() {
            self.current[file] = n;
            let value = partial + self.probs[file] * self.f[n as usize];
            self.descend(file + 1, remaining - n, value);
        }
        self.current[file] = 0;
    }
}
