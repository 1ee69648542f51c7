//! Fitting a column end to end and the serializable binning model.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::{build, divergence_contrib, pvalue_pairs_for, woe};
use crate::config::{validate_config, BinningConfig, Divergence, TargetKind, Trend};
use crate::error::{Error, Result};
use crate::localsearch::{ls_solve, LsBudget};
use crate::preprocess::{
    build_prebin_table, numeric_bin, prebin_categorical, prebin_numeric, refine_prebins,
    split_missing_special, Cell, PrebinCounts, PrebinLayout, PrebinTable, RawColumn, TargetValues,
};
use crate::quality::QualityReport;
use crate::solution::{BinStats, Interval, Solution, Status, TargetStats};
use crate::solver::solve;

pub const FORMAT_VERSION: u32 = 1;

/// Which search produces the partition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SolverChoice {
    #[default]
    Exact,
    LocalSearch { budget: LsBudget, seed: u64 },
}

/// Raw counts of one group of records.
#[derive(Debug, Clone, PartialEq)]
enum Counts {
    Binary { nonevent: u64, event: u64 },
    Continuous { records: u64, sum: f64 },
    Multiclass(Vec<u64>),
}

impl Counts {
    fn empty(kind: TargetKind) -> Self {
        match kind {
            TargetKind::Binary => Counts::Binary {
                nonevent: 0,
                event: 0,
            },
            TargetKind::Continuous => Counts::Continuous {
                records: 0,
                sum: 0.0,
            },
            TargetKind::Multiclass(c) => Counts::Multiclass(vec![0; c]),
        }
    }

    fn of_column(col: &RawColumn, kind: TargetKind) -> Self {
        let mut out = Self::empty(kind);
        match (&mut out, &col.target) {
            (Counts::Binary { nonevent, event }, TargetValues::Binary(t)) => {
                *event = t.iter().map(|&y| y as u64).sum();
                *nonevent = t.len() as u64 - *event;
            }
            (Counts::Continuous { records, sum }, TargetValues::Continuous(t)) => {
                *records = t.len() as u64;
                *sum = t.iter().sum();
            }
            (Counts::Multiclass(c), TargetValues::Multiclass { labels, .. }) => {
                for &y in labels {
                    c[y] += 1;
                }
            }
            _ => unreachable!("target kind mismatch"),
        }
        out
    }

    fn of_prebins(table: &PrebinTable, iv: Interval) -> Self {
        let r = iv.start..=iv.end;
        match &table.counts {
            PrebinCounts::Binary { nonevent, event } => Counts::Binary {
                nonevent: nonevent[r.clone()].iter().sum(),
                event: event[r].iter().sum(),
            },
            PrebinCounts::Continuous { records, sums } => Counts::Continuous {
                records: records[r.clone()].iter().sum(),
                sum: sums[r].iter().sum(),
            },
            PrebinCounts::Multiclass { counts } => {
                let classes = counts.first().map_or(0, Vec::len);
                let mut c = vec![0; classes];
                for row in &counts[r] {
                    for (a, b) in c.iter_mut().zip(row) {
                        *a += b;
                    }
                }
                Counts::Multiclass(c)
            }
        }
    }

    fn add(&mut self, other: &Counts) {
        match (self, other) {
            (
                Counts::Binary { nonevent, event },
                Counts::Binary {
                    nonevent: n2,
                    event: e2,
                },
            ) => {
                *nonevent += n2;
                *event += e2;
            }
            (Counts::Continuous { records, sum }, Counts::Continuous { records: r2, sum: s2 }) => {
                *records += r2;
                *sum += s2;
            }
            (Counts::Multiclass(a), Counts::Multiclass(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            _ => unreachable!("target kind mismatch"),
        }
    }

    fn records(&self) -> u64 {
        match self {
            Counts::Binary { nonevent, event } => nonevent + event,
            Counts::Continuous { records, .. } => *records,
            Counts::Multiclass(c) => c.iter().sum(),
        }
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// One-vs-rest statistics of a group against the totals. Groups lacking
/// either outcome get a WoE and IV of zero.
fn binary_stats(ne: u64, e: u64, ne_t: u64, e_t: u64) -> TargetStats {
    let p = ratio(ne as f64, ne_t as f64);
    let q = ratio(e as f64, e_t as f64);
    let woe = woe(ne, e, ne_t, e_t).unwrap_or(0.0);
    TargetStats::Binary {
        nonevent: ne,
        event: e,
        event_rate: ratio(e as f64, (ne + e) as f64),
        woe,
        iv: divergence_contrib(p, q, Divergence::Iv).unwrap_or(0.0),
        js: divergence_contrib(p, q, Divergence::Jsd).unwrap_or(0.0),
    }
}

fn stats(counts: &Counts, totals: &Counts, divergence: Divergence) -> BinStats {
    let target = match (counts, totals) {
        (Counts::Binary { nonevent, event }, Counts::Binary { nonevent: nt, event: et }) => {
            binary_stats(*nonevent, *event, *nt, *et)
        }
        (Counts::Continuous { records, sum }, Counts::Continuous { records: rt, sum: st }) => {
            TargetStats::Continuous {
                sum: *sum,
                // An empty group takes the overall mean.
                mean: if *records == 0 {
                    ratio(*st, *rt as f64)
                } else {
                    sum / *records as f64
                },
            }
        }
        (Counts::Multiclass(c), Counts::Multiclass(t)) => {
            let r: u64 = c.iter().sum();
            let rt: u64 = t.iter().sum();
            let mut woes = Vec::with_capacity(c.len());
            let mut div = Vec::with_capacity(c.len());
            for (&e, &et) in c.iter().zip(t) {
                let (ne, net) = (r - e, rt - et);
                woes.push(woe(ne, e, net, et).unwrap_or(0.0));
                let p = ratio(ne as f64, net as f64);
                let q = ratio(e as f64, et as f64);
                div.push(divergence_contrib(p, q, divergence).unwrap_or(0.0));
            }
            TargetStats::Multiclass {
                event_rates: c.iter().map(|&e| ratio(e as f64, r as f64)).collect(),
                counts: c.clone(),
                woe: woes,
                divergence: div,
            }
        }
        _ => unreachable!("target kind mismatch"),
    };
    BinStats {
        count: counts.records(),
        target,
    }
}

/// Where optimized bins sit in the variable's domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinLayout {
    /// `m - 1` ascending split points for `m` bins.
    Numeric { splits: Vec<f64> },
    /// One label group per bin, plus labels routed to the others bin.
    Categorical {
        groups: Vec<Vec<String>>,
        others: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub label: String,
    #[serde(flatten)]
    pub stats: BinStats,
}

/// Output column of [`BinningModel::transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    /// Weight of evidence (binary target).
    Woe,
    /// Event rate (binary) or target mean (continuous).
    Mean,
    /// Position in bins, then others, special and missing.
    Index,
}

impl std::str::FromStr for TransformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "woe" => Ok(TransformMode::Woe),
            "mean" => Ok(TransformMode::Mean),
            "index" => Ok(TransformMode::Index),
            other => Err(Error::Input(format!("unknown transform mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningModel {
    pub format_version: u32,
    pub variable: String,
    pub target_kind: TargetKind,
    /// Original labels of the multiclass target, by class index.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_labels: Vec<String>,
    pub layout: BinLayout,
    pub bins: Vec<BinRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub others: Option<BinRecord>,
    pub special: BinRecord,
    pub missing: BinRecord,
    /// Quality of the optimized bins (binary target only).
    pub quality: Option<QualityReport>,
    /// Solver objective over the optimized records.
    pub objective: f64,
    pub status: Status,
    pub trend: Trend,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_trends: Vec<Trend>,
    pub change_point: Option<usize>,
    pub config: BinningConfig,
}

/// Edge for display: ten significant digits, trailing zeros dropped. The
/// model keeps the exact split.
fn fmt_edge(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = 9 - v.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn numeric_label(splits: &[f64], k: usize) -> String {
    let lo = if k == 0 {
        "(-inf".to_string()
    } else {
        format!("[{}", fmt_edge(splits[k - 1]))
    };
    let hi = splits.get(k).map_or("inf".to_string(), |&s| fmt_edge(s));
    format!("{lo}, {hi})")
}

fn group_label(group: &[String]) -> String {
    format!("[{}]", group.join(", "))
}

/// Result of [`fit`]: the model plus the raw solver output.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: BinningModel,
    pub solution: Solution,
    pub table: PrebinTable,
}

/// Full pipeline: separate missing and special values, pre-bin, refine,
/// aggregate, solve and assemble the model. Infeasible problems are
/// reported as [`Error::Infeasible`].
pub fn fit(
    variable: &str,
    col: &RawColumn,
    cfg: &BinningConfig,
    solver: SolverChoice,
) -> Result<Fitted> {
    let cfg = validate_config(cfg.clone())?;
    let kind = col.target.kind().validate()?;
    let split = split_missing_special(col, &cfg.special_values);
    if split.clean.is_empty() {
        return Err(Error::Infeasible("no values left to bin".into()));
    }

    let (optimized, others_col, others_labels, layout) = if split.clean.is_numeric() {
        let values: Vec<f64> = split
            .clean
            .values
            .iter()
            .map(|c| match c {
                Cell::Number(v) => *v,
                _ => unreachable!(),
            })
            .collect();
        let splits = prebin_numeric(&values, cfg.prebin_count, cfg.prebin_min_frac)?;
        (split.clean.clone(), None, Vec::new(), PrebinLayout::Numeric(splits))
    } else {
        let cats = prebin_categorical(&split.clean, cfg.cat_others_cutoff)?;
        let others: BTreeSet<&str> = cats.others.iter().map(String::as_str).collect();
        let (mut keep, mut rest) = (Vec::new(), Vec::new());
        for (i, c) in split.clean.values.iter().enumerate() {
            let label = cell_label(c);
            if others.contains(label.as_str()) {
                rest.push(i);
            } else {
                keep.push(i);
            }
        }
        if keep.is_empty() {
            return Err(Error::Infeasible("every category falls under the others cutoff".into()));
        }
        let layout = PrebinLayout::Categorical(cats.order.iter().map(|l| vec![l.clone()]).collect());
        let others_col = (!rest.is_empty()).then(|| split.clean.select(&rest));
        (split.clean.select(&keep), others_col, cats.others, layout)
    };

    let table = refine_prebins(build_prebin_table(&optimized, layout)?)?;
    let agg = build(&table, cfg.divergence, cfg.norm)?;
    let pairs = pvalue_pairs_for(&agg, cfg.max_pvalue);
    let solution = match solver {
        SolverChoice::Exact => solve(&agg, &cfg, &pairs)?,
        SolverChoice::LocalSearch { budget, seed } => ls_solve(&agg, &cfg, &pairs, budget, seed)?,
    };
    if solution.status == Status::Infeasible {
        return Err(Error::Infeasible(format!(
            "no binning of {} pre-bins satisfies the constraints",
            table.n()
        )));
    }

    let bin_counts: Vec<Counts> = solution
        .intervals
        .iter()
        .map(|&iv| Counts::of_prebins(&table, iv))
        .collect();
    let special_counts = Counts::of_column(&split.special, kind);
    let missing_counts = Counts::of_column(&split.missing, kind);
    let others_counts = others_col.as_ref().map(|c| Counts::of_column(c, kind));
    let mut totals = Counts::empty(kind);
    for c in bin_counts
        .iter()
        .chain([&special_counts, &missing_counts])
        .chain(others_counts.as_ref())
    {
        totals.add(c);
    }

    let bin_layout = match &table.layout {
        PrebinLayout::Numeric(pre) => BinLayout::Numeric {
            splits: solution.intervals[..solution.intervals.len() - 1]
                .iter()
                .map(|iv| pre[iv.end])
                .collect(),
        },
        PrebinLayout::Categorical(groups) => BinLayout::Categorical {
            groups: solution
                .intervals
                .iter()
                .map(|iv| groups[iv.start..=iv.end].concat())
                .collect(),
            others: others_labels.clone(),
        },
    };
    let bins: Vec<BinRecord> = bin_counts
        .iter()
        .enumerate()
        .map(|(k, c)| BinRecord {
            label: match &bin_layout {
                BinLayout::Numeric { splits } => numeric_label(splits, k),
                BinLayout::Categorical { groups, .. } => group_label(&groups[k]),
            },
            stats: stats(c, &totals, cfg.divergence),
        })
        .collect();
    let record = |label: &str, c: &Counts| BinRecord {
        label: label.into(),
        stats: stats(c, &totals, cfg.divergence),
    };
    let special = record("Special", &special_counts);
    let missing = record("Missing", &missing_counts);
    let others = others_counts.as_ref().map(|c| record("Others", c));

    let quality = match kind {
        TargetKind::Binary => {
            let iv_total: f64 = bins
                .iter()
                .chain(others.as_ref())
                .chain([&special, &missing])
                .map(|b| match b.stats.target {
                    TargetStats::Binary { iv, .. } => iv,
                    _ => 0.0,
                })
                .sum();
            let stats: Vec<BinStats> = bins.iter().map(|b| b.stats.clone()).collect();
            Some(QualityReport::new(iv_total, &stats)?)
        }
        _ => None,
    };

    let model = BinningModel {
        format_version: FORMAT_VERSION,
        variable: variable.to_string(),
        target_kind: kind,
        class_labels: Vec::new(),
        layout: bin_layout,
        bins,
        others,
        special,
        missing,
        quality,
        objective: solution.objective,
        status: solution.status,
        trend: solution.trend,
        class_trends: solution.class_trends.clone(),
        change_point: solution.change_point,
        config: cfg,
    };
    Ok(Fitted {
        model,
        solution,
        table,
    })
}

fn cell_label(c: &Cell) -> String {
    match c {
        Cell::Label(s) => s.clone(),
        Cell::Number(v) => format!("{v}"),
        Cell::Missing => String::new(),
    }
}

impl BinningModel {
    /// Total information value over every row, including special, missing
    /// and others bins (binary target only).
    pub fn total_iv(&self) -> Option<f64> {
        self.quality.as_ref().map(|q| q.iv)
    }

    /// Every record in display order: bins, others, special, missing.
    pub fn records(&self) -> Vec<&BinRecord> {
        self.bins
            .iter()
            .chain(self.others.as_ref())
            .chain([&self.special, &self.missing])
            .collect()
    }

    /// Position of `cell` in [`BinningModel::records`].
    pub fn bin_index(&self, cell: &Cell) -> Result<usize> {
        let m = self.bins.len();
        let others = self.others.as_ref().map(|_| m);
        let special = m + usize::from(others.is_some());
        if cell.is_missing() {
            return Ok(special + 1);
        }
        if self.config.special_values.iter().any(|s| cell.matches(s)) {
            return Ok(special);
        }
        match &self.layout {
            BinLayout::Numeric { splits } => {
                let v = match cell {
                    Cell::Number(v) => *v,
                    Cell::Label(s) => s
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Input(format!("non-numeric value {s:?}")))?,
                    Cell::Missing => unreachable!(),
                };
                Ok(numeric_bin(splits, v))
            }
            BinLayout::Categorical { groups, .. } => {
                let label = cell_label(cell);
                groups
                    .iter()
                    .position(|g| g.contains(&label))
                    .or(others)
                    .ok_or(Error::UnknownCategory(label))
            }
        }
    }

    fn value(&self, record: &BinRecord, mode: TransformMode, index: usize) -> Result<f64> {
        match (mode, &record.stats.target) {
            (TransformMode::Index, _) => Ok(index as f64),
            (TransformMode::Woe, TargetStats::Binary { woe, .. }) => Ok(*woe),
            (TransformMode::Mean, TargetStats::Binary { event_rate, .. }) => Ok(*event_rate),
            (TransformMode::Mean, TargetStats::Continuous { mean, .. }) => Ok(*mean),
            (mode, _) => Err(Error::Unsupported(format!(
                "{mode:?} transform for a {:?} target",
                self.target_kind
            ))),
        }
    }

    pub fn transform_one(&self, cell: &Cell, mode: TransformMode) -> Result<f64> {
        let idx = self.bin_index(cell)?;
        let records = self.records();
        self.value(records[idx], mode, idx)
    }

    pub fn transform(&self, cells: &[Cell], mode: TransformMode) -> Result<Vec<f64>> {
        cells.iter().map(|c| self.transform_one(c, mode)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        if model.format_version != FORMAT_VERSION {
            return Err(Error::Input(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
