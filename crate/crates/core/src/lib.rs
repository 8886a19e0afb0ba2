//! Content placement for geographically distributed wireless caches.
//!
//! Caches sit on a homogeneous Poisson field and a client reaches every cache
//! within radius `r`. The crate computes optimal placements under a per-cache
//! capacity ([`opt_individual`]) and an average capacity
//! ([`opt_average`]), evaluates them in closed form ([`analytic`]), and checks
//! them against spatial Monte Carlo and a distributed LRU simulator
//! ([`simulate`]). [`experiment`] drives parameter sweeps and CSV output.

pub mod analytic;
pub mod catalog;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod opt_average;
pub mod opt_individual;
pub mod rng;
pub mod simulate;

pub use analytic::{ChunkingParams, SpatialIntensity};
pub use catalog::{Popularity, ZipfParams};
pub use error::{Error, Result};
pub use geometry::{PointSet, Window};
pub use opt_average::{AverageSolution, KktCertificate, ProbAllocation, WaterfillBreakpoints};
pub use opt_individual::{Allocation, DpSolution, DpTable};
pub use simulate::{LruConfig, SimReport};
