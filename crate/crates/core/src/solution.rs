//! Solution representation: a partition of pre-bins into contiguous bins.

use serde::{Deserialize, Serialize};

use crate::config::Trend;

/// Inclusive run of zero-based pre-bin indices merged into one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

/// True when `intervals` are contiguous, non-overlapping and cover `0..n`.
pub fn is_partition(intervals: &[Interval], n: usize) -> bool {
    if n == 0 || intervals.is_empty() || intervals[0].start != 0 {
        return false;
    }
    let contiguous = intervals
        .windows(2)
        .all(|w| w[0].end + 1 == w[1].start && w[0].start <= w[0].end);
    let last = intervals[intervals.len() - 1];
    contiguous && last.start <= last.end && last.end == n - 1
}

/// Partition induced by a list of bin-end positions (the last must be `n - 1`).
pub fn intervals_from_ends(ends: &[usize]) -> Vec<Interval> {
    let mut start = 0;
    ends.iter()
        .map(|&e| {
            let iv = Interval::new(start, e);
            start = e + 1;
            iv
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
}

/// Target-specific statistics of a bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetStats {
    Binary {
        nonevent: u64,
        event: u64,
        event_rate: f64,
        woe: f64,
        iv: f64,
        js: f64,
    },
    Continuous {
        sum: f64,
        mean: f64,
    },
    Multiclass {
        /// Records per class.
        counts: Vec<u64>,
        /// Share of each class within the bin.
        event_rates: Vec<f64>,
        /// One-vs-rest weight of evidence per class.
        woe: Vec<f64>,
        /// One-vs-rest divergence contribution per class.
        divergence: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub count: u64,
    #[serde(flatten)]
    pub target: TargetStats,
}

impl BinStats {
    pub fn event_rate(&self) -> Option<f64> {
        match &self.target {
            TargetStats::Binary { event_rate, .. } => Some(*event_rate),
            _ => None,
        }
    }

    pub fn woe(&self) -> Option<f64> {
        match &self.target {
            TargetStats::Binary { woe, .. } => Some(*woe),
            _ => None,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match &self.target {
            TargetStats::Continuous { mean, .. } => Some(*mean),
            _ => None,
        }
    }
}

/// Result of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub intervals: Vec<Interval>,
    /// Divergence minus penalty for binary/multiclass targets; total
    /// deviation plus penalty (minimized) for continuous targets.
    pub objective: f64,
    pub status: Status,
    pub bins: Vec<BinStats>,
    pub trend: Trend,
    /// Per-class trends actually enforced (multiclass only).
    pub class_trends: Vec<Trend>,
    /// Change pre-bin for peak/valley trends.
    pub change_point: Option<usize>,
}

impl Solution {
    pub fn infeasible(trend: Trend) -> Self {
        Self {
            intervals: Vec::new(),
            objective: f64::NAN,
            status: Status::Infeasible,
            bins: Vec::new(),
            trend,
            class_trends: Vec::new(),
            change_point: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != Status::Infeasible
    }

    pub fn bin_count(&self) -> usize {
        self.intervals.len()
    }
}
