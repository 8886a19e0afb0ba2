//! Optimal probabilistic placement under an average capacity constraint.
//!
//! Single-chunk files; each cache independently stores file `i` with
//! probability `q_i`, subject to `sum q_i = C` and `0 <= q_i <= 1`. The
//! objective `sum p_i exp(-q_i x)` is convex and the optimum has a
//! water-filling form: files above breakpoint `k1` are stored everywhere,
//! files past `k2` nowhere, and in between
//! `q_i = ln(p_i x / nu) / x` for a single water level `nu`.

use serde::Serialize;

use crate::catalog::Popularity;
use crate::error::{Error, Result};

/// Smallest mean in-range count accepted by the solvers.
pub const MIN_MEAN: f64 = 1e-8;

/// Residual on `g(nu) = C` above which the closed form is replaced by
/// bisection.
pub const FALLBACK_TOLERANCE: f64 = 1e-9;

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_TOLERANCE: f64 = 1e-12;

/// Per-file storage probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbAllocation {
    probs_store: Vec<f64>,
}

impl ProbAllocation {
    /// Validates `0 <= q_i <= 1`. Capacity is not checked here; see
    /// [`ProbAllocation::total`].
    pub fn new(probs_store: Vec<f64>) -> Result<Self> {
        if let Some(q) = probs_store.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::invalid(
                "q",
                format!("storage probability {q} outside [0, 1]"),
            ));
        }
        Ok(ProbAllocation { probs_store })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs_store
    }

    pub fn len(&self) -> usize {
        self.probs_store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs_store.is_empty()
    }

    /// Expected number of files per cache.
    pub fn total(&self) -> f64 {
        self.probs_store.iter().sum()
    }
}

/// 1-based water-filling breakpoints, `1 <= k1 <= k2 <= L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WaterfillBreakpoints {
    pub k1: usize,
    pub k2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageSolution {
    pub allocation: ProbAllocation,
    /// Water level `nu`.
    pub nu: f64,
    pub breakpoints: WaterfillBreakpoints,
    /// Set when the closed-form level failed its `g(nu) = C` check and the
    /// bisection result was returned instead.
    pub used_fallback: bool,
}

/// Dual variables reconstructed from a primal point and a water level, with
/// the largest KKT violation found.
#[derive(Debug, Clone, Serialize)]
pub struct KktCertificate {
    pub nu: f64,
    pub lambda_dual: Vec<f64>,
    pub omega_dual: Vec<f64>,
    pub max_residual: f64,
}

fn check_mean(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= MIN_MEAN) {
        return Err(Error::invalid(
            "x",
            format!("mean in-range count must be at least {MIN_MEAN}, got {x}"),
        ));
    }
    Ok(())
}

/// `g_i(nu)`: the storage probability file `i` receives at water level `nu`.
pub fn g_single(i: usize, nu: f64, pop: &Popularity, x: f64) -> f64 {
    let px = pop.get(i) * x;
    if nu <= px * (-x).exp() {
        1.0
    } else if nu < px {
        (px / nu).ln() / x
    } else {
        0.0
    }
}

/// `g(nu) = sum_i g_i(nu)`, non-increasing in `nu`.
pub fn g_total(nu: f64, pop: &Popularity, x: f64) -> f64 {
    g_total_log(nu.ln(), pop, x)
}

/// `g` evaluated at `nu = exp(log_nu)`; stays finite where `exp(-x)`
/// underflows.
fn g_total_log(log_nu: f64, pop: &Popularity, x: f64) -> f64 {
    pop.probs()
        .iter()
        .rev()
        .map(|p| g_single_log(p.ln() + x.ln(), log_nu, x))
        .sum()
}

fn g_single_log(log_px: f64, log_nu: f64, x: f64) -> f64 {
    ((log_px - log_nu) / x).clamp(0.0, 1.0)
}

/// Closed-form optimum.
///
/// `k1` is the first file whose upper breakpoint level `p_l x e^{-x}` already
/// yields `g >= C`, `k2` the last file whose lower breakpoint level `p_l x`
/// yields `g <= C`, and the level is the geometric mean of `p_j x` over
/// `k1..=k2` shifted by the capacity left for the interior files. Both
/// breakpoint sequences are monotone in `l`, so they are located by binary
/// search.
pub fn solve_closed_form(pop: &Popularity, x: f64, capacity: f64) -> Result<AverageSolution> {
    check_mean(x)?;
    let files = pop.len();
    if !(capacity.is_finite() && capacity > 0.0 && capacity <= files as f64) {
        return Err(Error::Infeasible(format!(
            "average capacity {capacity} must lie in (0, {files}]"
        )));
    }
    let log_px: Vec<f64> = pop.probs().iter().map(|p| p.ln() + x.ln()).collect();

    if capacity == files as f64 {
        return Ok(AverageSolution {
            allocation: ProbAllocation {
                probs_store: vec![1.0; files],
            },
            nu: (log_px[files - 1] - x).exp(),
            breakpoints: WaterfillBreakpoints {
                k1: files,
                k2: files,
            },
            used_fallback: false,
        });
    }

    // g(p_l x e^{-x}) and g(p_l x) are both non-decreasing in l.
    let k1 = 1 + first_failing(files, |l| g_total_log(log_px[l] - x, pop, x) < capacity);
    let k2 = first_failing(files, |l| g_total_log(log_px[l], pop, x) <= capacity);
    let k1 = k1.min(files);
    let k2 = k2.max(k1);

    let width = (k2 - k1 + 1) as f64;
    let interior_log_sum: f64 = log_px[k1 - 1..k2].iter().sum();
    let log_nu = (interior_log_sum - x * (capacity - k1 as f64 + 1.0)) / width;

    let residual = (g_total_log(log_nu, pop, x) - capacity).abs();
    if !residual.is_finite() || residual > FALLBACK_TOLERANCE {
        let (allocation, nu) = bisect(pop, x, capacity)?;
        let breakpoints = breakpoints_of(allocation.probs());
        return Ok(AverageSolution {
            allocation,
            nu,
            breakpoints,
            used_fallback: true,
        });
    }

    let probs_store = (0..files)
        .map(|i| {
            if i + 1 < k1 {
                1.0
            } else if i < k2 {
                g_single_log(log_px[i], log_nu, x)
            } else {
                0.0
            }
        })
        .collect();
    Ok(AverageSolution {
        allocation: ProbAllocation { probs_store },
        nu: log_nu.exp(),
        breakpoints: WaterfillBreakpoints { k1, k2 },
        used_fallback: false,
    })
}

/// Length of the prefix of `0..n` on which `holds` is true; `holds` must be
/// true on a prefix and false afterwards.
fn first_failing(n: usize, holds: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Breakpoints read back from an allocation: `k1` is the first file with
/// `q < 1`, `k2` the last with `q > 0`.
fn breakpoints_of(q: &[f64]) -> WaterfillBreakpoints {
    let files = q.len();
    let k1 = q.iter().position(|&v| v < 1.0).map_or(files, |i| i + 1);
    let k2 = q.iter().rposition(|&v| v > 0.0).map_or(1, |i| i + 1);
    WaterfillBreakpoints { k1, k2: k2.max(k1) }
}

/// Independent solver: bisects the level against `g(nu) = C` using the
/// three-branch definition of `g_i` directly.
pub fn solve_bisection(pop: &Popularity, x: f64, capacity: f64) -> Result<ProbAllocation> {
    check_mean(x)?;
    let files = pop.len() as f64;
    if !(capacity.is_finite() && capacity > 0.0 && capacity < files) {
        return Err(Error::Infeasible(format!(
            "average capacity {capacity} must lie in (0, {files})"
        )));
    }
    bisect(pop, x, capacity).map(|(q, _)| q)
}

fn bisect(pop: &Popularity, x: f64, capacity: f64) -> Result<(ProbAllocation, f64)> {
    let files = pop.len();
    let g = |log_nu: f64| -> f64 {
        let nu = log_nu.exp();
        (0..files).map(|i| g_single(i, nu, pop, x)).sum()
    };
    // Bracket in log space: g = L at the lower end, g = 0 at the upper end.
    let mut lo = (pop.get(files - 1) * x).ln() - x - x * files as f64;
    let mut hi = (pop.get(0) * x).ln();
    let mut mid = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..BISECTION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let value = g(mid);
        if (value - capacity).abs() < BISECTION_TOLERANCE {
            converged = true;
            break;
        }
        if value > capacity {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            converged = true;
            mid = 0.5 * (lo + hi);
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: BISECTION_MAX_ITER,
        });
    }
    let nu = mid.exp();
    let probs_store = (0..files).map(|i| g_single(i, nu, pop, x)).collect();
    Ok((ProbAllocation { probs_store }, nu))
}

/// Reconstructs duals `lambda_i = max(0, nu - p_i x e^{-q_i x})` and
/// `omega_i = max(0, p_i x e^{-q_i x} - nu)` and reports the largest
/// violation of primal feasibility, dual feasibility, complementary slackness
/// and stationarity.
pub fn verify_kkt(
    q: &ProbAllocation,
    nu: f64,
    pop: &Popularity,
    x: f64,
    capacity: f64,
) -> KktCertificate {
    let mut lambda_dual = Vec::with_capacity(q.len());
    let mut omega_dual = Vec::with_capacity(q.len());
    let mut worst = (q.total() - capacity).abs();
    for (&qi, &p) in q.probs().iter().zip(pop.probs()) {
        let marginal = p * x * (-qi * x).exp();
        let lambda = (nu - marginal).max(0.0);
        let omega = (marginal - nu).max(0.0);
        let bounds = (-qi).max(qi - 1.0).max(0.0);
        let stationarity = (-marginal + nu - lambda + omega).abs();
        let slackness = (lambda * qi).abs().max((omega * (qi - 1.0)).abs());
        worst = worst.max(bounds).max(stationarity).max(slackness);
        lambda_dual.push(lambda);
        omega_dual.push(omega);
    }
    if q.len() != pop.len() {
        worst = f64::INFINITY;
    }
    KktCertificate {
        nu,
        lambda_dual,
        omega_dual,
        max_residual: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::catalog::ZipfParams;
    use crate::opt_individual;
    use proptest::prelude::*;

    fn three() -> Popularity {
        Popularity::new(vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn g_single_branches() {
        let p = three();
        let x = 2.0;
        for i in 0..3 {
            let px = p.get(i) * x;
            assert_eq!(g_single(i, px, &p, x), 0.0);
            assert_eq!(g_single(i, px * (-x).exp(), &p, x), 1.0);
            assert!((g_single(i, px * (-x / 2.0).exp(), &p, x) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn g_total_limits() {
        let p = three();
        let x = 2.0;
        assert_eq!(g_total(1e-300, &p, x), 3.0);
        assert_eq!(g_total(p.get(0) * x, &p, x), 0.0);
        assert_eq!(g_total(10.0, &p, x), 0.0);
        assert!((g_total(0.319061, &p, x) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn three_file_instance() {
        let p = three();
        let sol = solve_closed_form(&p, 2.0, 1.0).unwrap();
        assert!(!sol.used_fallback);
        assert_eq!(sol.breakpoints, WaterfillBreakpoints { k1: 1, k2: 3 });
        assert!((sol.nu - 0.3190613).abs() < 1e-7, "{}", sol.nu);
        let expected = [0.5712, 0.3158, 0.1131];
        for (q, e) in sol.allocation.probs().iter().zip(expected) {
            assert!((q - e).abs() < 1e-4, "{q} vs {e}");
        }
        assert!((sol.allocation.total() - 1.0).abs() < 1e-12);

        let oracle = solve_bisection(&p, 2.0, 1.0).unwrap();
        for (a, b) in sol.allocation.probs().iter().zip(oracle.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
        let cert = verify_kkt(&sol.allocation, sol.nu, &p, 2.0, 1.0);
        assert!(cert.max_residual < 1e-9, "{}", cert.max_residual);

        let miss = analytic::miss_average(sol.allocation.probs(), &p, 2.0).unwrap();
        assert!((miss - 0.4785).abs() < 1e-4);
        // every interior file sits at the same marginal miss p_i e^{-q_i x} = nu / x
        assert!((miss - 3.0 * sol.nu / 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_catalog_is_flat() {
        for (l, x, c) in [(5, 0.7, 2.0), (40, 12.0, 7.5), (3, 300.0, 1.0)] {
            let p = Popularity::uniform(l).unwrap();
            let sol = solve_closed_form(&p, x, c).unwrap();
            for q in sol.allocation.probs() {
                assert!((q - c / l as f64).abs() < 1e-12);
            }
            let level = x / l as f64 * (-x * c / l as f64).exp();
            assert!((sol.nu - level).abs() <= 1e-12 * level);
            let oracle = solve_bisection(&p, x, c).unwrap();
            for q in oracle.probs() {
                assert!((q - c / l as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_capacity_stores_everything() {
        let p = three();
        let sol = solve_closed_form(&p, 2.0, 3.0).unwrap();
        assert_eq!(sol.allocation.probs(), &[1.0, 1.0, 1.0]);
        assert!((sol.nu - 0.2 * 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        let near = solve_bisection(&p, 2.0, 3.0 - 1e-9).unwrap();
        assert!(near.probs().iter().all(|q| *q > 1.0 - 1e-8));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = three();
        assert!(solve_closed_form(&p, 2.0, 0.0).is_err());
        assert!(solve_closed_form(&p, 2.0, 3.5).is_err());
        assert!(solve_closed_form(&p, 1e-9, 1.0).is_err());
        assert!(solve_bisection(&p, 2.0, 3.0).is_err());
        assert!(ProbAllocation::new(vec![0.5, 1.2]).is_err());
    }

    #[test]
    fn kkt_flags_suboptimal_points() {
        let p = three();
        let x = 2.0;
        let flat = ProbAllocation::new(vec![1.0 / 3.0; 3]).unwrap();
        let implied: f64 = (0..3)
            .map(|i| p.get(i) * x * (-x / 3.0f64).exp())
            .sum::<f64>()
            / 3.0;
        let cert = verify_kkt(&flat, implied, &p, x, 1.0);
        assert!(cert.max_residual > 1e-3, "{}", cert.max_residual);
    }

    #[test]
    fn saturated_file_certificate() {
        // p_2 x <= nu < p_1 x e^{-x}: file 1 pinned at 1, file 2 at 0.
        let p = Popularity::new(vec![0.99, 0.01]).unwrap();
        let q = ProbAllocation::new(vec![1.0, 0.0]).unwrap();
        let cert = verify_kkt(&q, 0.05, &p, 1.0, 1.0);
        assert!(cert.omega_dual[0] > 0.0);
        assert_eq!(cert.lambda_dual[0], 0.0);
        assert!(cert.lambda_dual[1] > 0.0);
        assert!(cert.max_residual < 1e-15);
    }

    #[test]
    fn wide_radius_approaches_uniform() {
        let zipf = Popularity::zipf(ZipfParams::new(2000, 1.0).unwrap()).unwrap();
        let x = 2e-3 * std::f64::consts::PI * 250.0 * 250.0;
        assert!((x - 392.699).abs() < 1e-3);
        let sol = solve_closed_form(&zipf, x, 5.0).unwrap();
        let q = sol.allocation.probs();
        let flat = 5.0 / 2000.0;
        assert!((q[0] - flat).abs() < 0.03, "{}", q[0]);
        assert!((sol.allocation.total() - 5.0).abs() < 1e-9);
        assert!(q.windows(2).all(|w| w[0] >= w[1]));
    }

    fn random_pop(weights: &[f64]) -> Popularity {
        Popularity::from_weights(weights).unwrap().0
    }

    proptest! {
        #[test]
        fn closed_form_matches_bisection(
            weights in prop::collection::vec(0.01f64..1.0, 3..50),
            x in 0.1f64..50.0,
            frac in 0.01f64..0.99,
        ) {
            let p = random_pop(&weights);
            let c = frac * p.len() as f64;
            let sol = solve_closed_form(&p, x, c).unwrap();
            let oracle = solve_bisection(&p, x, c).unwrap();
            for (a, b) in sol.allocation.probs().iter().zip(oracle.probs()) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
            prop_assert!((sol.allocation.total() - c).abs() <= 1e-9);
            prop_assert!((g_total(sol.nu, &p, x) - c).abs() <= 1e-9);
            let q = sol.allocation.probs();
            prop_assert!(q.windows(2).all(|w| w[0] >= w[1]));
            let WaterfillBreakpoints { k1, k2 } = sol.breakpoints;
            prop_assert!(1 <= k1 && k1 <= k2 && k2 <= p.len());
        }

        #[test]
        fn beats_single_chunk_top_c(
            weights in prop::collection::vec(0.01f64..1.0, 2..40),
            x in 0.1f64..30.0,
            frac in 0.0f64..1.0,
        ) {
            let p = random_pop(&weights);
            let c = 1 + ((p.len() - 1) as f64 * frac) as usize;
            let sol = solve_closed_form(&p, x, c as f64).unwrap();
            let avg = analytic::miss_average(sol.allocation.probs(), &p, x).unwrap();
            let top = opt_individual::solve_n1(&p, c).unwrap();
            let params = analytic::ChunkingParams::new(1, c as u32).unwrap();
            let ind = top.miss(&p, params, x).unwrap();
            prop_assert!(avg <= ind + 1e-12);
        }
    }
}
