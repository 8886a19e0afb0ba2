//! File catalog and request popularity.
//!
//! Files are indexed `0..L` in order of decreasing popularity. Every solver in
//! this crate assumes that ordering, so a [`Popularity`] can only be built
//! sorted.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(p) == 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Request distribution over the file catalog, sorted non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Popularity {
    probs: Vec<f64>,
}

impl Popularity {
    /// Wraps an already normalized and sorted probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid(
                "probs",
                "catalog must contain at least one file",
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::invalid(
                "probs",
                format!("entries must be strictly positive, found {p}"),
            ));
        }
        if probs.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("probs", "entries must be non-increasing"));
        }
        let total = ascending_sum(&probs);
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(
                "probs",
                format!("entries sum to {total}, expected 1"),
            ));
        }
        Ok(Popularity { probs })
    }

    /// Zipf popularity `p_i = i^{-s} / sum_k k^{-s}`.
    pub fn zipf(params: ZipfParams) -> Result<Self> {
        params.validate()?;
        let weights: Vec<f64> = (1..=params.num_files)
            .map(|i| (i as f64).powf(-params.exponent))
            .collect();
        // Weights decrease with i, so summing from the tail adds small terms first.
        let total = ascending_sum(&weights);
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Popularity { probs })
    }

    /// All `L` files equally likely.
    pub fn uniform(num_files: usize) -> Result<Self> {
        if num_files == 0 {
            return Err(Error::invalid("num_files", "must be at least 1"));
        }
        Ok(Popularity {
            probs: vec![1.0 / num_files as f64; num_files],
        })
    }

    /// Normalizes arbitrary nonnegative weights and sorts them into popularity
    /// order.
    ///
    /// Returns the popularity together with the permutation applied:
    /// `permutation[rank] = original index`. Sorting is stable, so tied weights
    /// keep their original relative order.
    pub fn from_weights(weights: &[f64]) -> Result<(Self, Vec<usize>)> {
        if weights.is_empty() {
            return Err(Error::invalid("weights", "at least one weight is required"));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::invalid(
                    "weights",
                    format!("weight {i} is {w}; weights must be finite and nonnegative"),
                ));
            }
            if *w == 0.0 {
                return Err(Error::invalid(
                    "weights",
                    format!(
                        "weight {i} is zero; drop zero-popularity files before building a catalog"
                    ),
                ));
            }
        }
        let mut permutation: Vec<usize> = (0..weights.len()).collect();
        permutation.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        let sorted: Vec<f64> = permutation.iter().map(|&i| weights[i]).collect();
        let total = ascending_sum(&sorted);
        let probs = sorted.into_iter().map(|w| w / total).collect();
        Ok((Popularity { probs }, permutation))
    }

    /// Reads a weights file (one nonnegative real per line; blank lines and
    /// `#` comments ignored) and normalizes it with [`Popularity::from_weights`].
    pub fn load_weights(path: impl AsRef<Path>) -> Result<(Self, Vec<usize>)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: f64 = line.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected a nonnegative real, found `{line}`"),
            })?;
            weights.push(w);
        }
        Self::from_weights(&weights)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Total mass of the files ranked below the top `count`.
    pub fn tail_mass(&self, count: usize) -> f64 {
        if count >= self.probs.len() {
            return 0.0;
        }
        ascending_sum(&self.probs[count..])
    }
}

/// Parameters of a Zipf catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfParams {
    pub num_files: usize,
    pub exponent: f64,
}

impl ZipfParams {
    pub fn new(num_files: usize, exponent: f64) -> Result<Self> {
        let params = ZipfParams {
            num_files,
            exponent,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if self.num_files == 0 {
            return Err(Error::invalid("num_files", "must be at least 1"));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(Error::invalid(
                "exponent",
                format!("must be positive, got {}", self.exponent),
            ));
        }
        Ok(())
    }
}

/// Sums a non-increasing sequence starting from its smallest entries.
fn ascending_sum(sorted_desc: &[f64]) -> f64 {
    sorted_desc.iter().rev().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zipf_four_files() {
        let pop = Popularity::zipf(ZipfParams::new(4, 1.0).unwrap()).unwrap();
        let expected = [0.48, 0.24, 0.16, 0.12];
        for (p, e) in pop.probs().iter().zip(expected) {
            assert!((p - e).abs() < 1e-15, "{p} vs {e}");
        }
    }

    #[test]
    fn zipf_single_file() {
        let pop = Popularity::zipf(ZipfParams::new(1, 2.0).unwrap()).unwrap();
        assert_eq!(pop.probs(), &[1.0]);
    }

    #[test]
    fn zipf_2000_matches_harmonic_sum() {
        // H_2000 by direct summation in exact-ish order
        let h: f64 = (1..=2000).rev().map(|k| 1.0 / k as f64).sum();
        assert!((h - 8.17837).abs() < 1e-5);
        let pop = Popularity::zipf(ZipfParams::new(2000, 1.0).unwrap()).unwrap();
        assert!((pop.get(0) - 1.0 / h).abs() < 1e-15);
        assert!((pop.get(0) - 0.12228).abs() < 1e-5);
        assert!((pop.get(1999) - 6.1137e-5).abs() < 1e-9);
    }

    #[test]
    fn zipf_rejects_bad_params() {
        assert!(ZipfParams::new(0, 1.0).is_err());
        assert!(ZipfParams::new(10, 0.0).is_err());
        assert!(ZipfParams::new(10, -1.0).is_err());
        assert!(Popularity::zipf(ZipfParams {
            num_files: 3,
            exponent: f64::NAN
        })
        .is_err());
    }

    #[test]
    fn zipf_sums_to_one_at_scale() {
        for s in [0.5, 1.0, 2.0] {
            for l in [1, 10, 1000, 1_000_000] {
                let pop = Popularity::zipf(ZipfParams::new(l, s).unwrap()).unwrap();
                let total: f64 = pop.probs().iter().rev().sum();
                assert!((total - 1.0).abs() <= SUM_TOLERANCE, "L={l} s={s}: {total}");
                assert!(pop.probs().windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn weights_sorted_with_permutation() {
        let (pop, perm) = Popularity::from_weights(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(pop.probs(), &[0.5, 0.25, 0.25]);
        assert_eq!(perm, vec![0, 1, 2]);

        let (pop, perm) = Popularity::from_weights(&[1.0, 3.0]).unwrap();
        assert_eq!(pop.probs(), &[0.75, 0.25]);
        assert_eq!(perm, vec![1, 0]);
    }

    #[test]
    fn weights_reject_zero_and_negative() {
        assert!(Popularity::from_weights(&[0.0, 5.0]).is_err());
        assert!(Popularity::from_weights(&[1.0, -2.0]).is_err());
        assert!(Popularity::from_weights(&[]).is_err());
    }

    #[test]
    fn weights_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        std::fs::write(&path, "# weights\n1\n\n3\n").unwrap();
        let (pop, perm) = Popularity::load_weights(&path).unwrap();
        assert_eq!(pop.probs(), &[0.75, 0.25]);
        assert_eq!(perm, vec![1, 0]);

        std::fs::write(&path, "1\nabc\n").unwrap();
        match Popularity::load_weights(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn new_validates() {
        assert!(Popularity::new(vec![0.5, 0.5]).is_ok());
        assert!(Popularity::new(vec![0.4, 0.6]).is_err());
        assert!(Popularity::new(vec![0.5, 0.4]).is_err());
        assert!(Popularity::new(vec![1.0, 0.0]).is_err());
        assert!(Popularity::new(vec![]).is_err());
    }

    #[test]
    fn tail_mass() {
        let pop = Popularity::zipf(ZipfParams::new(4, 1.0).unwrap()).unwrap();
        assert_eq!(pop.tail_mass(4), 0.0);
        assert!((pop.tail_mass(0) - 1.0).abs() < 1e-15);
        assert!((pop.tail_mass(2) - 0.28).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn scaling_weights_is_invisible(
            weights in prop::collection::vec(1e-3f64..1e3, 1..40),
            scale in 1e-3f64..1e3,
        ) {
            let (a, pa) = Popularity::from_weights(&weights).unwrap();
            let scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
            let (b, pb) = Popularity::from_weights(&scaled).unwrap();
            prop_assert_eq!(pa, pb);
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-14 * x);
            }
            let total: f64 = a.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < SUM_TOLERANCE);
        }
    }
}
