//! Lower-triangular aggregation matrices over pre-bin merges.
//!
//! Entry `(i, j)` with `j <= i` describes the bin obtained by merging
//! pre-bins `j..=i`. Once these are precomputed, every bin statistic the
//! solver needs is a table lookup, which keeps the search linear in the
//! number of bins.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{Divergence, Norm, TargetKind};
use crate::error::{Error, Result};
use crate::preprocess::{PrebinCounts, PrebinTable};
use crate::solution::Interval;

/// Dense lower-triangular matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> TriMatrix<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * (n + 1) / 2],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            for j in 0..=i {
                m.data[i * (i + 1) / 2 + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry for the merge of pre-bins `j..=i`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(j <= i && i < self.n);
        self.data[i * (i + 1) / 2 + j]
    }

    #[inline]
    pub fn at(&self, iv: Interval) -> T {
        self.get(iv.end, iv.start)
    }

    /// Row-reversed access: `z` counts back from the diagonal of row `i`,
    /// i.e. the bin ending at `i` that spans `z + 1` pre-bins.
    #[inline]
    pub fn get_backward(&self, i: usize, z: usize) -> T {
        self.get(i, i - z)
    }
}

/// Weight of evidence `ln((ne / ne_total) / (e / e_total))`.
pub fn woe(nonevent: u64, event: u64, nonevent_total: u64, event_total: u64) -> Result<f64> {
    if nonevent == 0 || event == 0 || nonevent_total == 0 || event_total == 0 {
        return Err(Error::ZeroCount);
    }
    let p = nonevent as f64 / nonevent_total as f64;
    let q = event as f64 / event_total as f64;
    Ok((p / q).ln())
}

/// Per-bin contribution to the divergence between the non-event share `p`
/// and the event share `q`.
pub fn divergence_contrib(p: f64, q: f64, kind: Divergence) -> Result<f64> {
    match kind {
        Divergence::Iv => {
            if p <= 0.0 || q <= 0.0 {
                return Err(Error::ZeroCount);
            }
            Ok((p - q) * (p / q).ln())
        }
        Divergence::Jsd => {
            let m = 0.5 * (p + q);
            if m == 0.0 {
                return Ok(0.0);
            }
            let term = |x: f64| if x > 0.0 { x * (x / m).ln() } else { 0.0 };
            Ok((0.5 * (term(p) + term(q))).max(0.0))
        }
    }
}

/// Per-class one-vs-rest aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAggregates {
    pub divergence: TriMatrix<f64>,
    pub event_rate: TriMatrix<f64>,
    pub events: TriMatrix<u64>,
}

/// Target-specific aggregation matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregates {
    Binary {
        kind: Divergence,
        divergence: TriMatrix<f64>,
        event_rate: TriMatrix<f64>,
        nonevents: TriMatrix<u64>,
        events: TriMatrix<u64>,
    },
    Continuous {
        norm: Norm,
        mean: TriMatrix<f64>,
        deviation: TriMatrix<f64>,
        sums: TriMatrix<f64>,
    },
    Multiclass {
        kind: Divergence,
        classes: Vec<ClassAggregates>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSet {
    pub records: TriMatrix<u64>,
    pub detail: Aggregates,
}

impl AggregateSet {
    pub fn n(&self) -> usize {
        self.records.n()
    }

    pub fn total_records(&self) -> u64 {
        let n = self.n();
        if n == 0 {
            0
        } else {
            self.records.get(n - 1, 0)
        }
    }

    pub fn target_kind(&self) -> TargetKind {
        match &self.detail {
            Aggregates::Binary { .. } => TargetKind::Binary,
            Aggregates::Continuous { .. } => TargetKind::Continuous,
            Aggregates::Multiclass { classes, .. } => TargetKind::Multiclass(classes.len()),
        }
    }

    /// Quantity maximized by the solver for one bin: divergence (summed
    /// over classes for multiclass) or negated deviation (continuous).
    #[inline]
    pub fn gain(&self, iv: Interval) -> f64 {
        match &self.detail {
            Aggregates::Binary { divergence, .. } => divergence.at(iv),
            Aggregates::Continuous { deviation, .. } => -deviation.at(iv),
            Aggregates::Multiclass { classes, .. } => {
                classes.iter().map(|c| c.divergence.at(iv)).sum()
            }
        }
    }

    /// Sequences on which trends are imposed: event rates, means, or one
    /// event-rate matrix per class.
    pub fn trend_series(&self) -> Vec<&TriMatrix<f64>> {
        match &self.detail {
            Aggregates::Binary { event_rate, .. } => vec![event_rate],
            Aggregates::Continuous { mean, .. } => vec![mean],
            Aggregates::Multiclass { classes, .. } => {
                classes.iter().map(|c| &c.event_rate).collect()
            }
        }
    }

    pub fn nonevents(&self) -> Option<&TriMatrix<u64>> {
        match &self.detail {
            Aggregates::Binary { nonevents, .. } => Some(nonevents),
            _ => None,
        }
    }

    pub fn events(&self) -> Option<&TriMatrix<u64>> {
        match &self.detail {
            Aggregates::Binary { events, .. } => Some(events),
            _ => None,
        }
    }
}

fn cumulative<T: Copy + Default + std::ops::Add<Output = T>>(values: &[T], n: usize) -> TriMatrix<T> {
    let mut m = TriMatrix::new(n);
    for i in 0..n {
        let mut acc = T::default();
        for j in (0..=i).rev() {
            acc = acc + values[j];
            m.data[i * (i + 1) / 2 + j] = acc;
        }
    }
    m
}

fn divergence_matrix(
    ne: &TriMatrix<u64>,
    e: &TriMatrix<u64>,
    kind: Divergence,
) -> Result<TriMatrix<f64>> {
    let n = ne.n();
    let (ne_total, e_total) = (ne.get(n - 1, 0) as f64, e.get(n - 1, 0) as f64);
    let mut m = TriMatrix::new(n);
    for i in 0..n {
        for j in 0..=i {
            let p = ne.get(i, j) as f64 / ne_total;
            let q = e.get(i, j) as f64 / e_total;
            m.data[i * (i + 1) / 2 + j] = divergence_contrib(p, q, kind)?;
        }
    }
    Ok(m)
}

fn rate_matrix(e: &TriMatrix<u64>, r: &TriMatrix<u64>) -> TriMatrix<f64> {
    TriMatrix::from_fn(e.n(), |i, j| e.get(i, j) as f64 / r.get(i, j) as f64)
}

/// Binary aggregates. The table must be refined (no zero counts).
pub fn build_binary(table: &PrebinTable, kind: Divergence) -> Result<AggregateSet> {
    let PrebinCounts::Binary { nonevent, event } = &table.counts else {
        return Err(Error::Unsupported("binary aggregates need a binary table".into()));
    };
    let n = table.n();
    if n == 0 {
        return Err(Error::Infeasible("empty pre-bin table".into()));
    }
    let ne = cumulative(nonevent, n);
    let e = cumulative(event, n);
    let records = TriMatrix::from_fn(n, |i, j| ne.get(i, j) + e.get(i, j));
    Ok(AggregateSet {
        detail: Aggregates::Binary {
            kind,
            divergence: divergence_matrix(&ne, &e, kind)?,
            event_rate: rate_matrix(&e, &records),
            nonevents: ne,
            events: e,
        },
        records,
    })
}

pub fn build_continuous(table: &PrebinTable, norm: Norm) -> Result<AggregateSet> {
    let PrebinCounts::Continuous { records, sums } = &table.counts else {
        return Err(Error::Unsupported(
            "continuous aggregates need a continuous table".into(),
        ));
    };
    let n = table.n();
    if n == 0 {
        return Err(Error::Infeasible("empty pre-bin table".into()));
    }
    let r = cumulative(records, n);
    let s = cumulative(sums, n);
    let mu: Vec<f64> = (0..n).map(|i| sums[i] / records[i] as f64).collect();
    let mean = TriMatrix::from_fn(n, |i, j| s.get(i, j) / r.get(i, j) as f64);
    let deviation = TriMatrix::from_fn(n, |i, j| {
        let u = mean.get(i, j);
        match norm {
            Norm::L1 => (j..=i).map(|z| (mu[z] - u).abs()).sum(),
            Norm::L2 => (j..=i).map(|z| (mu[z] - u).powi(2)).sum::<f64>().sqrt(),
        }
    });
    Ok(AggregateSet {
        records: r,
        detail: Aggregates::Continuous {
            norm,
            mean,
            deviation,
            sums: s,
        },
    })
}

/// One-vs-rest aggregates per class. The table must be refined jointly.
pub fn build_multiclass(table: &PrebinTable, kind: Divergence) -> Result<AggregateSet> {
    let PrebinCounts::Multiclass { counts } = &table.counts else {
        return Err(Error::Unsupported(
            "multiclass aggregates need a multiclass table".into(),
        ));
    };
    let n = table.n();
    if n == 0 {
        return Err(Error::Infeasible("empty pre-bin table".into()));
    }
    let class_count = counts[0].len();
    TargetKind::Multiclass(class_count).validate()?;
    let totals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let records = cumulative(&totals, n);
    let mut classes = Vec::with_capacity(class_count);
    for c in 0..class_count {
        let ev: Vec<u64> = counts.iter().map(|row| row[c]).collect();
        let e = cumulative(&ev, n);
        if e.get(n - 1, 0) == 0 {
            return Err(Error::Infeasible(format!("class {c} is absent")));
        }
        let ne = TriMatrix::from_fn(n, |i, j| records.get(i, j) - e.get(i, j));
        classes.push(ClassAggregates {
            divergence: divergence_matrix(&ne, &e, kind)?,
            event_rate: rate_matrix(&e, &records),
            events: e,
        });
    }
    Ok(AggregateSet {
        records,
        detail: Aggregates::Multiclass { kind, classes },
    })
}

/// Builds the aggregates matching the table's target kind.
pub fn build(table: &PrebinTable, kind: Divergence, norm: Norm) -> Result<AggregateSet> {
    match table.counts {
        PrebinCounts::Binary { .. } => build_binary(table, kind),
        PrebinCounts::Continuous { .. } => build_continuous(table, norm),
        PrebinCounts::Multiclass { .. } => build_multiclass(table, kind),
    }
}

/// Pooled two-proportion z statistic between two bins given their event
/// and non-event counts. Zero when the pooled rate is degenerate.
pub fn two_proportion_z(events1: u64, nonevents1: u64, events2: u64, nonevents2: u64) -> f64 {
    let n1 = (events1 + nonevents1) as f64;
    let n2 = (events2 + nonevents2) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    let p1 = events1 as f64 / n1;
    let p2 = events2 as f64 / n2;
    let pooled = (events1 + events2) as f64 / (n1 + n2);
    let var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
    if var <= 0.0 {
        return 0.0;
    }
    (p1 - p2) / var.sqrt()
}

/// Two-sided p-value of the pooled two-proportion z-test.
pub fn two_proportion_pvalue(events1: u64, nonevents1: u64, events2: u64, nonevents2: u64) -> f64 {
    let z = two_proportion_z(events1, nonevents1, events2, nonevents2).abs();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

/// Adjacent merged-bin pairs whose event rates are not significantly
/// different at level `alpha`. At most one of each pair may be selected as
/// neighbours in a solution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PValuePairs {
    pub alpha: Option<f64>,
    /// `(i, j, k, l)`: bin `j..=i` followed by bin `l..=k`, with `l = i + 1`.
    pub quads: BTreeSet<(usize, usize, usize, usize)>,
}

impl PValuePairs {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    /// True when `first` directly followed by `second` is a forbidden pair.
    #[inline]
    pub fn violates(&self, first: Interval, second: Interval) -> bool {
        !self.quads.is_empty()
            && self
                .quads
                .contains(&(first.end, first.start, second.end, second.start))
    }
}

/// Enumerates every adjacent pair of merged bins whose |z| falls below the
/// two-sided critical value of `alpha`.
pub fn pvalue_pairs(
    nonevents: &TriMatrix<u64>,
    events: &TriMatrix<u64>,
    alpha: f64,
) -> PValuePairs {
    let n = events.n();
    let critical = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let mut quads = BTreeSet::new();
    for i in 0..n.saturating_sub(1) {
        let l = i + 1;
        for j in 0..=i {
            let (x, y) = (events.get(i, j), nonevents.get(i, j));
            for k in l..n {
                let (w, z) = (events.get(k, l), nonevents.get(k, l));
                if two_proportion_z(x, y, w, z).abs() < critical {
                    quads.insert((i, j, k, l));
                }
            }
        }
    }
    PValuePairs {
        alpha: Some(alpha),
        quads,
    }
}

/// P-value pairs for an aggregate set; empty unless the target is binary
/// and `alpha` is set.
pub fn pvalue_pairs_for(agg: &AggregateSet, alpha: Option<f64>) -> PValuePairs {
    match (alpha, agg.nonevents(), agg.events()) {
        (Some(a), Some(ne), Some(e)) => pvalue_pairs(ne, e, a),
        _ => PValuePairs::empty(),
    }
}
