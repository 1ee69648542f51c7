//! Trend predicates over complete bin sequences, and the incremental
//! variant used while a partition is being built left to right.
//!
//! Both forms use the same inequality expressions so that they agree
//! bit-for-bit on the same inputs.

use crate::config::Trend;

#[inline]
fn rises(prev: f64, next: f64, min_diff: f64) -> bool {
    prev + min_diff <= next
}

#[inline]
fn falls(prev: f64, next: f64, min_diff: f64) -> bool {
    next + min_diff <= prev
}

#[inline]
fn concave_triple(k: f64, j: f64, i: f64) -> bool {
    2.0 * j >= k + i
}

#[inline]
fn convex_triple(k: f64, j: f64, i: f64) -> bool {
    k + i >= 2.0 * j
}

fn all_pairs(values: &[f64], ok: impl Fn(f64, f64) -> bool) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, &vi)| values[..i].iter().all(|&vz| ok(vz, vi)))
}

fn all_triples(values: &[f64], ok: impl Fn(f64, f64, f64) -> bool) -> bool {
    let m = values.len();
    for i in 2..m {
        for j in 1..i {
            for k in 0..j {
                if !ok(values[k], values[j], values[i]) {
                    return false;
                }
            }
        }
    }
    true
}

fn ascending(values: &[f64], min_diff: f64) -> bool {
    all_pairs(values, |a, b| rises(a, b, min_diff))
}

fn descending(values: &[f64], min_diff: f64) -> bool {
    all_pairs(values, |a, b| falls(a, b, min_diff))
}

fn unimodal_at(values: &[f64], pivot: usize, peak: bool, min_diff: f64) -> bool {
    let (head, tail) = (&values[..=pivot], &values[pivot..]);
    if peak {
        ascending(head, min_diff) && descending(tail, min_diff)
    } else {
        descending(head, min_diff) && ascending(tail, min_diff)
    }
}

/// Smallest pivot position at which `values` is a peak (or valley).
pub fn find_pivot(values: &[f64], peak: bool, min_diff: f64) -> Option<usize> {
    (0..values.len()).find(|&p| unimodal_at(values, p, peak, min_diff))
}

/// Whether a complete sequence of bin event rates (or means) follows `trend`.
///
/// Ascending/descending require every earlier/later pair of bins to differ
/// by at least `min_diff`. Concave/convex use the all-triples inequality.
/// For `PeakFixed(p)`/`ValleyFixed(p)`, `p` is the position of the change
/// bin within `values`; `min_diff` applies within each phase. `Auto` and
/// `None` impose nothing.
pub fn check_trend(values: &[f64], trend: Trend, min_diff: f64) -> bool {
    if values.is_empty() {
        return true;
    }
    match trend {
        Trend::None | Trend::Auto => true,
        Trend::Ascending => ascending(values, min_diff),
        Trend::Descending => descending(values, min_diff),
        Trend::Concave => all_triples(values, concave_triple),
        Trend::Convex => all_triples(values, convex_triple),
        Trend::Peak => find_pivot(values, true, min_diff).is_some(),
        Trend::Valley => find_pivot(values, false, min_diff).is_some(),
        Trend::PeakFixed(p) => unimodal_at(values, p.min(values.len() - 1), true, min_diff),
        Trend::ValleyFixed(p) => unimodal_at(values, p.min(values.len() - 1), false, min_diff),
    }
}

/// Search-time state of a peak/valley sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    First,
    /// Second phase started at this bin position (the pivot).
    Second(usize),
}

/// Checks appending `next` (covering pre-bins `start..`) to `prev`, whose
/// bins end at `prev_ends`. Returns the phase after the append, or `None`
/// when the extended prefix can no longer satisfy the trend.
///
/// For free peak/valley the first phase is kept as long as possible: with
/// `min_diff > 0` a value cannot continue both phases, and with equal values
/// staying in the first phase admits every continuation the second would.
pub(crate) fn extend(
    trend: Trend,
    prev: &[f64],
    prev_ends: &[usize],
    next: f64,
    start: usize,
    phase: Phase,
    min_diff: f64,
) -> Option<Phase> {
    let ok = match trend {
        Trend::None | Trend::Auto => true,
        Trend::Ascending => prev.iter().all(|&v| rises(v, next, min_diff)),
        Trend::Descending => prev.iter().all(|&v| falls(v, next, min_diff)),
        Trend::Concave | Trend::Convex => {
            let triple = if trend == Trend::Concave {
                concave_triple
            } else {
                convex_triple
            };
            (1..prev.len()).all(|j| (0..j).all(|k| triple(prev[k], prev[j], next)))
        }
        Trend::Peak | Trend::Valley => {
            let (first, second): (fn(f64, f64, f64) -> bool, fn(f64, f64, f64) -> bool) =
                if trend == Trend::Peak {
                    (rises, falls)
                } else {
                    (falls, rises)
                };
            return match phase {
                Phase::First => {
                    if prev.iter().all(|&v| first(v, next, min_diff)) {
                        Some(Phase::First)
                    } else {
                        let pivot = prev.len() - 1;
                        second(prev[pivot], next, min_diff).then_some(Phase::Second(pivot))
                    }
                }
                Phase::Second(pivot) => prev[pivot..]
                    .iter()
                    .all(|&v| second(v, next, min_diff))
                    .then_some(phase),
            };
        }
        Trend::PeakFixed(t) | Trend::ValleyFixed(t) => {
            let (first, second): (fn(f64, f64, f64) -> bool, fn(f64, f64, f64) -> bool) =
                if matches!(trend, Trend::PeakFixed(_)) {
                    (rises, falls)
                } else {
                    (falls, rises)
                };
            if start <= t {
                prev.iter().all(|&v| first(v, next, min_diff))
            } else {
                prev.iter()
                    .zip(prev_ends)
                    .filter(|(_, &end)| end >= t)
                    .all(|(&v, _)| second(v, next, min_diff))
            }
        }
    };
    ok.then_some(phase)
}
