//! From raw column data to a pre-bin table.
//!
//! Missing and special values are separated first, the clean subset is
//! pre-binned (equal-frequency quantiles for numeric data, metric-ordered
//! categories for categorical data) and counted, and finally pre-bins with
//! a zero non-event or event count are merged away.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::TargetKind;
use crate::error::{Error, Result};

/// A raw cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Missing,
    Number(f64),
    Label(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        match self {
            Cell::Missing => true,
            Cell::Number(v) => v.is_nan(),
            Cell::Label(_) => false,
        }
    }

    pub(crate) fn matches(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Number(a), Cell::Number(b)) => a == b,
            (Cell::Label(a), Cell::Label(b)) => a == b,
            (Cell::Label(a), Cell::Number(b)) | (Cell::Number(b), Cell::Label(a)) => {
                a.trim().parse::<f64>().map(|v| v == *b).unwrap_or(false)
            }
            _ => false,
        }
    }
}

/// Target values aligned with a column.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetValues {
    Binary(Vec<u8>),
    Continuous(Vec<f64>),
    Multiclass { labels: Vec<usize>, classes: usize },
}

impl TargetValues {
    pub fn len(&self) -> usize {
        match self {
            TargetValues::Binary(v) => v.len(),
            TargetValues::Continuous(v) => v.len(),
            TargetValues::Multiclass { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            TargetValues::Binary(_) => TargetKind::Binary,
            TargetValues::Continuous(_) => TargetKind::Continuous,
            TargetValues::Multiclass { classes, .. } => TargetKind::Multiclass(*classes),
        }
    }

    fn select(&self, idx: &[usize]) -> Self {
        match self {
            TargetValues::Binary(v) => TargetValues::Binary(idx.iter().map(|&i| v[i]).collect()),
            TargetValues::Continuous(v) => {
                TargetValues::Continuous(idx.iter().map(|&i| v[i]).collect())
            }
            TargetValues::Multiclass { labels, classes } => TargetValues::Multiclass {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                classes: *classes,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub values: Vec<Cell>,
    pub target: TargetValues,
}

impl RawColumn {
    pub fn new(values: Vec<Cell>, target: TargetValues) -> Result<Self> {
        if values.len() != target.len() {
            return Err(Error::Input(format!(
                "column has {} values but target has {}",
                values.len(),
                target.len()
            )));
        }
        if let TargetValues::Binary(t) = &target {
            if t.iter().any(|&y| y > 1) {
                return Err(Error::Input("binary target must be 0 or 1".into()));
            }
        }
        if let TargetValues::Multiclass { labels, classes } = &target {
            if let Some(bad) = labels.iter().find(|&&c| c >= *classes) {
                return Err(Error::Input(format!("class label {bad} >= class count {classes}")));
            }
        }
        Ok(Self { values, target })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            values: idx.iter().map(|&i| self.values[i].clone()).collect(),
            target: self.target.select(idx),
        }
    }

    /// True when every non-missing cell is numeric.
    pub fn is_numeric(&self) -> bool {
        self.values
            .iter()
            .all(|c| matches!(c, Cell::Missing | Cell::Number(_)))
    }
}

/// Disjoint subsets of a column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSplit {
    pub clean: RawColumn,
    pub missing: RawColumn,
    pub special: RawColumn,
}

pub fn split_missing_special(col: &RawColumn, special_values: &[Cell]) -> ColumnSplit {
    let (mut clean, mut missing, mut special) = (Vec::new(), Vec::new(), Vec::new());
    for (i, cell) in col.values.iter().enumerate() {
        if cell.is_missing() {
            missing.push(i);
        } else if special_values.iter().any(|s| cell.matches(s)) {
            special.push(i);
        } else {
            clean.push(i);
        }
    }
    ColumnSplit {
        clean: col.select(&clean),
        missing: col.select(&missing),
        special: col.select(&special),
    }
}

/// Equal-frequency split points over `values`.
///
/// Each candidate split sits midway between the value at a quantile rank
/// and the next distinct value, so ties never straddle a split. Pre-bins
/// holding fewer than `min_frac` of the records are then merged with their
/// smaller neighbour.
pub fn prebin_numeric(values: &[f64], prebin_count: usize, min_frac: f64) -> Result<Vec<f64>> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 || sorted[0] == sorted[n - 1] {
        return Err(Error::DegenerateColumn);
    }
    let mut splits: Vec<f64> = Vec::new();
    for k in 1..prebin_count.max(1) {
        let rank = ((k * n) as f64 / prebin_count as f64).ceil() as usize;
        let rank = rank.clamp(1, n - 1);
        let lo = sorted[rank - 1];
        let next = sorted.partition_point(|&v| v <= lo);
        if next >= n {
            continue;
        }
        let hi = sorted[next];
        let mut split = lo + (hi - lo) / 2.0;
        if split <= lo {
            split = hi;
        }
        if splits.last().is_none_or(|&last| split > last) {
            splits.push(split);
        }
    }

    let min_count = (min_frac * n as f64).ceil() as u64;
    let mut counts = bin_counts(&sorted, &splits);
    while counts.len() > 1 {
        let Some(i) = counts.iter().position(|&c| c < min_count) else {
            break;
        };
        // Merge with the smaller neighbour; the split between them goes away.
        let merge_right = if i == 0 {
            true
        } else if i == counts.len() - 1 {
            false
        } else {
            counts[i + 1] <= counts[i - 1]
        };
        if merge_right {
            counts[i] += counts.remove(i + 1);
            splits.remove(i);
        } else {
            counts[i - 1] += counts.remove(i);
            splits.remove(i - 1);
        }
    }
    Ok(splits)
}

fn bin_counts(sorted: &[f64], splits: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; splits.len() + 1];
    for &v in sorted {
        counts[numeric_bin(splits, v)] += 1;
    }
    counts
}

/// Index of the half-open interval `[s_k, s_{k+1})` containing `v`.
pub fn numeric_bin(splits: &[f64], v: f64) -> usize {
    splits.partition_point(|&s| s <= v)
}

/// Ordered categories plus the non-representative ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalPrebins {
    /// Ascending by event rate (binary) or mean (continuous).
    pub order: Vec<String>,
    /// Metric value of each entry in `order`.
    pub metric: Vec<f64>,
    pub others: Vec<String>,
}

pub fn prebin_categorical(col: &RawColumn, others_cutoff: f64) -> Result<CategoricalPrebins> {
    if matches!(col.target, TargetValues::Multiclass { .. }) {
        return Err(Error::Unsupported(
            "categorical variables with a multiclass target".into(),
        ));
    }
    // label -> (records, target sum)
    let mut stats: BTreeMap<String, (u64, f64)> = BTreeMap::new();
    for (i, cell) in col.values.iter().enumerate() {
        let label = match cell {
            Cell::Label(s) => s.clone(),
            Cell::Number(v) => format!("{v}"),
            Cell::Missing => continue,
        };
        let y = match &col.target {
            TargetValues::Binary(t) => t[i] as f64,
            TargetValues::Continuous(t) => t[i],
            TargetValues::Multiclass { .. } => unreachable!(),
        };
        let e = stats.entry(label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += y;
    }
    let total: u64 = stats.values().map(|s| s.0).sum();
    let mut kept = Vec::new();
    let mut others = Vec::new();
    for (label, (count, sum)) in stats {
        if total > 0 && (count as f64 / total as f64) < others_cutoff {
            others.push(label);
        } else {
            kept.push((label, sum / count as f64));
        }
    }
    // Stable sort keeps label order among equal metrics.
    kept.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal));
    let (order, metric) = kept.into_iter().unzip();
    Ok(CategoricalPrebins {
        order,
        metric,
        others,
    })
}

/// How the pre-bins map onto the variable's domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrebinLayout {
    /// `n - 1` ascending split points.
    Numeric(Vec<f64>),
    /// One category group per pre-bin, in ordinal order.
    Categorical(Vec<Vec<String>>),
}

impl PrebinLayout {
    pub fn len(&self) -> usize {
        match self {
            PrebinLayout::Numeric(s) => s.len() + 1,
            PrebinLayout::Categorical(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn merge_with_next(&mut self, i: usize) {
        match self {
            PrebinLayout::Numeric(s) => {
                s.remove(i);
            }
            PrebinLayout::Categorical(g) => {
                let next = g.remove(i + 1);
                g[i].extend(next);
            }
        }
    }
}

/// Per-pre-bin target counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrebinCounts {
    Binary { nonevent: Vec<u64>, event: Vec<u64> },
    Continuous { records: Vec<u64>, sums: Vec<f64> },
    /// `counts[i][c]` records of class `c` in pre-bin `i`.
    Multiclass { counts: Vec<Vec<u64>> },
}

impl PrebinCounts {
    fn len(&self) -> usize {
        match self {
            PrebinCounts::Binary { event, .. } => event.len(),
            PrebinCounts::Continuous { records, .. } => records.len(),
            PrebinCounts::Multiclass { counts } => counts.len(),
        }
    }

    fn records(&self, i: usize) -> u64 {
        match self {
            PrebinCounts::Binary { nonevent, event } => nonevent[i] + event[i],
            PrebinCounts::Continuous { records, .. } => records[i],
            PrebinCounts::Multiclass { counts } => counts[i].iter().sum(),
        }
    }

    fn merge_with_next(&mut self, i: usize) {
        match self {
            PrebinCounts::Binary { nonevent, event } => {
                nonevent[i] += nonevent.remove(i + 1);
                event[i] += event.remove(i + 1);
            }
            PrebinCounts::Continuous { records, sums } => {
                records[i] += records.remove(i + 1);
                sums[i] += sums.remove(i + 1);
            }
            PrebinCounts::Multiclass { counts } => {
                let next = counts.remove(i + 1);
                for (a, b) in counts[i].iter_mut().zip(next) {
                    *a += b;
                }
            }
        }
    }
}

/// Per-pre-bin statistics; the only input the optimizer needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrebinTable {
    pub layout: PrebinLayout,
    pub counts: PrebinCounts,
}

impl PrebinTable {
    pub fn binary(nonevent: Vec<u64>, event: Vec<u64>) -> Self {
        assert_eq!(nonevent.len(), event.len());
        let n = event.len();
        Self {
            layout: PrebinLayout::Numeric((1..n).map(|i| i as f64).collect()),
            counts: PrebinCounts::Binary { nonevent, event },
        }
    }

    pub fn continuous(records: Vec<u64>, sums: Vec<f64>) -> Self {
        assert_eq!(records.len(), sums.len());
        let n = records.len();
        Self {
            layout: PrebinLayout::Numeric((1..n).map(|i| i as f64).collect()),
            counts: PrebinCounts::Continuous { records, sums },
        }
    }

    pub fn multiclass(counts: Vec<Vec<u64>>) -> Self {
        let n = counts.len();
        Self {
            layout: PrebinLayout::Numeric((1..n).map(|i| i as f64).collect()),
            counts: PrebinCounts::Multiclass { counts },
        }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn target_kind(&self) -> TargetKind {
        match &self.counts {
            PrebinCounts::Binary { .. } => TargetKind::Binary,
            PrebinCounts::Continuous { .. } => TargetKind::Continuous,
            PrebinCounts::Multiclass { counts } => {
                TargetKind::Multiclass(counts.first().map_or(0, Vec::len))
            }
        }
    }

    pub fn records(&self, i: usize) -> u64 {
        self.counts.records(i)
    }

    pub fn total_records(&self) -> u64 {
        (0..self.n()).map(|i| self.records(i)).sum()
    }

    /// Target mean of pre-bin `i` (continuous) or event rate (binary).
    pub fn mean(&self, i: usize) -> f64 {
        match &self.counts {
            PrebinCounts::Binary { nonevent, event } => {
                event[i] as f64 / (event[i] + nonevent[i]) as f64
            }
            PrebinCounts::Continuous { records, sums } => sums[i] / records[i] as f64,
            PrebinCounts::Multiclass { .. } => f64::NAN,
        }
    }

    /// Merges pre-bin `i` with pre-bin `i + 1`.
    pub fn merge_with_next(&mut self, i: usize) {
        assert!(i + 1 < self.n());
        self.counts.merge_with_next(i);
        self.layout.merge_with_next(i);
    }

    fn has_zero_count(&self, i: usize) -> bool {
        match &self.counts {
            PrebinCounts::Binary { nonevent, event } => nonevent[i] == 0 || event[i] == 0,
            PrebinCounts::Continuous { records, .. } => records[i] == 0,
            PrebinCounts::Multiclass { counts } => {
                let total: u64 = counts[i].iter().sum();
                counts[i].iter().any(|&c| c == 0 || c == total)
            }
        }
    }

    fn drop_empty(&mut self) {
        while self.n() > 1 {
            let Some(i) = (0..self.n()).find(|&i| self.records(i) == 0) else {
                break;
            };
            if i + 1 < self.n() {
                self.merge_with_next(i);
            } else {
                self.merge_with_next(i - 1);
            }
        }
    }
}

/// Counts `col` into the pre-bins described by `layout`. Empty pre-bins
/// are folded into a neighbour so that every pre-bin holds a record.
pub fn build_prebin_table(col: &RawColumn, layout: PrebinLayout) -> Result<PrebinTable> {
    let n = layout.len();
    let index_of: Box<dyn Fn(&Cell) -> Result<usize>> = match &layout {
        PrebinLayout::Numeric(splits) => {
            if splits.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input("split points must be strictly ascending".into()));
            }
            let splits = splits.clone();
            Box::new(move |c: &Cell| match c {
                Cell::Number(v) if !v.is_nan() => Ok(numeric_bin(&splits, *v)),
                other => Err(Error::Input(format!("non-numeric clean value {other:?}"))),
            })
        }
        PrebinLayout::Categorical(groups) => {
            let mut map = BTreeMap::new();
            for (g, labels) in groups.iter().enumerate() {
                for l in labels {
                    map.insert(l.clone(), g);
                }
            }
            Box::new(move |c: &Cell| {
                let key = match c {
                    Cell::Label(s) => s.clone(),
                    Cell::Number(v) => format!("{v}"),
                    Cell::Missing => return Err(Error::Input("missing value in clean subset".into())),
                };
                map.get(&key)
                    .copied()
                    .ok_or(Error::UnknownCategory(key))
            })
        }
    };

    let counts = match &col.target {
        TargetValues::Binary(t) => {
            let (mut ne, mut e) = (vec![0u64; n], vec![0u64; n]);
            for (cell, &y) in col.values.iter().zip(t) {
                let b = index_of(cell)?;
                if y == 1 {
                    e[b] += 1;
                } else {
                    ne[b] += 1;
                }
            }
            PrebinCounts::Binary {
                nonevent: ne,
                event: e,
            }
        }
        TargetValues::Continuous(t) => {
            let (mut r, mut s) = (vec![0u64; n], vec![0f64; n]);
            for (cell, &y) in col.values.iter().zip(t) {
                let b = index_of(cell)?;
                r[b] += 1;
                s[b] += y;
            }
            PrebinCounts::Continuous {
                records: r,
                sums: s,
            }
        }
        TargetValues::Multiclass { labels, classes } => {
            let mut c = vec![vec![0u64; *classes]; n];
            for (cell, &y) in col.values.iter().zip(labels) {
                c[index_of(cell)?][y] += 1;
            }
            PrebinCounts::Multiclass { counts: c }
        }
    };
    let mut table = PrebinTable { layout, counts };
    table.drop_empty();
    Ok(table)
}

/// Merges every pre-bin lacking non-events or events (per class for a
/// multiclass target) into its right neighbour, or its left neighbour for
/// the last pre-bin, until none remain.
pub fn refine_prebins(mut table: PrebinTable) -> Result<PrebinTable> {
    match &table.counts {
        PrebinCounts::Binary { nonevent, event } => {
            if nonevent.iter().sum::<u64>() == 0 || event.iter().sum::<u64>() == 0 {
                return Err(Error::Infeasible(
                    "target has no events or no non-events".into(),
                ));
            }
        }
        PrebinCounts::Multiclass { counts } => {
            let classes = counts.first().map_or(0, Vec::len);
            for c in 0..classes {
                if counts.iter().all(|row| row[c] == 0) {
                    return Err(Error::Infeasible(format!("class {c} is absent")));
                }
            }
        }
        PrebinCounts::Continuous { .. } => {
            table.drop_empty();
            return Ok(table);
        }
    }
    while let Some(i) = (0..table.n()).find(|&i| table.has_zero_count(i)) {
        if table.n() == 1 {
            return Err(Error::Infeasible(
                "no pre-bin split leaves every bin with both outcomes".into(),
            ));
        }
        if i + 1 < table.n() {
            table.merge_with_next(i);
        } else {
            table.merge_with_next(i - 1);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(v: &[f64]) -> Vec<Cell> {
        v.iter().map(|&x| Cell::Number(x)).collect()
    }

    #[test]
    fn specials_and_missing_are_routed() {
        let values = vec![
            Cell::Number(-7.0),
            Cell::Number(30.0),
            Cell::Missing,
            Cell::Number(f64::NAN),
            Cell::Number(-9.0),
            Cell::Number(55.0),
        ];
        let col = RawColumn::new(values, TargetValues::Binary(vec![1, 0, 1, 0, 1, 1])).unwrap();
        let specials = nums(&[-9.0, -8.0, -7.0]);
        let split = split_missing_special(&col, &specials);
        assert_eq!(split.special.len(), 2);
        assert_eq!(split.missing.len(), 2);
        assert_eq!(split.clean.values, nums(&[30.0, 55.0]));
        assert_eq!(split.clean.target, TargetValues::Binary(vec![0, 1]));
    }

    #[test]
    fn split_without_specials_is_identity() {
        let col = RawColumn::new(nums(&[1.0, 2.0]), TargetValues::Binary(vec![0, 1])).unwrap();
        let split = split_missing_special(&col, &[]);
        assert_eq!(split.clean, col);
        assert!(split.missing.is_empty() && split.special.is_empty());
    }

    #[test]
    fn all_missing() {
        let col = RawColumn::new(vec![Cell::Missing; 3], TargetValues::Binary(vec![0, 1, 0])).unwrap();
        let split = split_missing_special(&col, &[]);
        assert!(split.clean.is_empty());
        assert_eq!(split.missing.len(), 3);
    }

    #[test]
    fn uniform_deciles() {
        let values: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let splits = prebin_numeric(&values, 10, 0.0).unwrap();
        assert_eq!(splits.len(), 9);
        for (k, s) in splits.iter().enumerate() {
            let decile = (k + 1) as f64 / 10.0;
            assert!((s - decile).abs() < 2e-3, "split {s} vs {decile}");
        }
    }

    #[test]
    fn constant_column_is_degenerate() {
        assert!(matches!(
            prebin_numeric(&[3.0; 10], 10, 0.0),
            Err(Error::DegenerateColumn)
        ));
    }

    #[test]
    fn heavy_ties_collapse_to_one_split() {
        // 900 ones and 100 twos: every quantile rank lands on value 1 whose
        // next distinct value is 2, so the only candidate split is 1.5.
        let mut values = vec![1.0; 900];
        values.extend(vec![2.0; 100]);
        let splits = prebin_numeric(&values, 10, 0.05).unwrap();
        assert_eq!(splits, vec![1.5]);
    }

    #[test]
    fn small_prebins_are_merged() {
        let mut values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        values.extend(vec![1000.0; 1]);
        let splits = prebin_numeric(&values, 20, 0.05).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let counts = bin_counts(&sorted, &splits);
        assert!(counts.iter().all(|&c| c >= 6), "{counts:?}");
    }

    #[test]
    fn categories_sorted_by_event_rate() {
        // A: 3/10, B: 1/10, C: 2/10
        let mut values = Vec::new();
        let mut target = Vec::new();
        for (label, events) in [("A", 3), ("B", 1), ("C", 2)] {
            for k in 0..10 {
                values.push(Cell::Label(label.into()));
                target.push(u8::from(k < events));
            }
        }
        let col = RawColumn::new(values, TargetValues::Binary(target)).unwrap();
        let pre = prebin_categorical(&col, 0.0).unwrap();
        assert_eq!(pre.order, vec!["B", "C", "A"]);
        assert!(pre.others.is_empty());
        assert!(pre.metric.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rare_categories_go_to_others() {
        let mut values = vec![Cell::Label("big".into()); 198];
        values.push(Cell::Label("rare".into()));
        values.push(Cell::Label("rare2".into()));
        let target = (0..200).map(|i| (i % 2) as u8).collect();
        let col = RawColumn::new(values, TargetValues::Binary(target)).unwrap();
        let pre = prebin_categorical(&col, 0.01).unwrap();
        assert_eq!(pre.order, vec!["big"]);
        assert_eq!(pre.others, vec!["rare", "rare2"]);
    }

    #[test]
    fn half_open_intervals() {
        let col = RawColumn::new(
            nums(&[10.0, 30.5, 40.0, 48.5, 60.0]),
            TargetValues::Binary(vec![1, 0, 1, 0, 1]),
        )
        .unwrap();
        let t = build_prebin_table(&col, PrebinLayout::Numeric(vec![30.5, 48.5])).unwrap();
        match t.counts {
            PrebinCounts::Binary { nonevent, event } => {
                assert_eq!(nonevent, vec![0, 1, 1]);
                assert_eq!(event, vec![1, 1, 1]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn no_splits_single_prebin() {
        let col = RawColumn::new(nums(&[1.0, 2.0, 3.0]), TargetValues::Continuous(vec![1.0, 2.0, 6.0])).unwrap();
        let t = build_prebin_table(&col, PrebinLayout::Numeric(vec![])).unwrap();
        assert_eq!(t.n(), 1);
        assert_eq!(t.mean(0), 3.0);
    }

    #[test]
    fn refine_merges_right() {
        let t = PrebinTable::binary(vec![5, 0, 5], vec![5, 5, 5]);
        let r = refine_prebins(t).unwrap();
        assert_eq!(
            r.counts,
            PrebinCounts::Binary {
                nonevent: vec![5, 5],
                event: vec![5, 10]
            }
        );
        assert_eq!(r.layout, PrebinLayout::Numeric(vec![1.0]));
    }

    #[test]
    fn refine_last_merges_left() {
        let t = PrebinTable::binary(vec![5, 5, 5], vec![5, 5, 0]);
        let r = refine_prebins(t).unwrap();
        assert_eq!(
            r.counts,
            PrebinCounts::Binary {
                nonevent: vec![5, 10],
                event: vec![5, 5]
            }
        );
    }

    #[test]
    fn refine_identity_and_infeasible() {
        let t = PrebinTable::binary(vec![1, 2], vec![3, 4]);
        assert_eq!(refine_prebins(t.clone()).unwrap(), t);
        let none = PrebinTable::binary(vec![1, 2], vec![0, 0]);
        assert!(matches!(refine_prebins(none), Err(Error::Infeasible(_))));
    }

    #[test]
    fn refine_multiclass_jointly() {
        let t = PrebinTable::multiclass(vec![vec![1, 1, 1], vec![2, 0, 1], vec![1, 1, 1]]);
        let r = refine_prebins(t).unwrap();
        assert_eq!(r.n(), 2);
        let absent = PrebinTable::multiclass(vec![vec![1, 1, 0], vec![2, 1, 0]]);
        assert!(matches!(refine_prebins(absent), Err(Error::Infeasible(_))));
    }
}
