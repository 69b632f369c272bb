//! chipletrank: placement-order exploration for chiplet systems.
//!
//! The pipeline: sweep placement orders through a deterministic sequential
//! placer, label each outcome by its distance to the Pareto front of peak
//! temperature versus total wirelength, sample pairwise comparisons, train a
//! GraphSage-based RankNet scorer, and rank candidate orders for new
//! systems.

pub mod baseline;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod model;
pub mod pareto;
pub mod placer;
pub mod plot;
pub mod rank;
pub mod suite;
pub mod synthetic;
pub mod system;

pub use error::{Error, Result};
