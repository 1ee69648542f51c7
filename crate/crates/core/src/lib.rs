//! Optimal binning of a numeric or categorical variable against a binary,
//! continuous or multiclass target.

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod error;
pub mod localsearch;
pub mod model;
pub mod preprocess;
pub mod quality;
pub mod solution;
pub mod solver;

pub use config::{BinningConfig, Concentration, Divergence, Norm, TargetKind, Trend};
pub use error::{Error, Result};
pub use solution::{BinStats, Interval, Solution, Status, TargetStats};
