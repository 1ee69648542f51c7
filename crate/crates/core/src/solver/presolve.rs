//! Monotonic presolve: fixes bin-end indicators to zero from the event-rate
//! matrix before branching.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::aggregate::TriMatrix;
use crate::config::Trend;

/// Diagonal entries `(i, i)` fixed to zero: no bin may end at pre-bin `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresolveMask {
    pub forbidden: BTreeSet<(usize, usize)>,
}

impl PresolveMask {
    pub fn is_empty(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Whether a bin may end at pre-bin `end`.
    #[inline]
    pub fn allows_end(&self, end: usize) -> bool {
        !self.forbidden.contains(&(end, end))
    }
}

/// For every `i` and offset `j`, compares the rate of pre-bins `i..=i+1+j`
/// with the rate of pre-bin `i+1+j` alone; when the merged rate is higher
/// (lower for descending), the indicator of pre-bin `i+j` ending a bin is
/// fixed to zero. Trends other than ascending/descending give an empty mask.
pub fn presolve_monotonic(rates: &TriMatrix<f64>, trend: Trend) -> PresolveMask {
    let n = rates.n();
    let mut forbidden = BTreeSet::new();
    let fires = |merged: f64, single: f64| match trend {
        Trend::Ascending => merged - single > 0.0,
        Trend::Descending => merged - single < 0.0,
        _ => false,
    };
    for i in 0..n.saturating_sub(1) {
        for j in 0..n - i - 1 {
            let k = i + 1 + j;
            if fires(rates.get(k, i), rates.get(k, k)) {
                forbidden.insert((i + j, i + j));
            }
        }
    }
    PresolveMask { forbidden }
}
