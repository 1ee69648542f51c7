//! Target kinds, trend specifications and the binning configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::Cell;

/// Kind of target the variable is binned against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Binary,
    Continuous,
    /// One-vs-rest over `class_count` classes, labelled `0..class_count`.
    Multiclass(usize),
}

impl TargetKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            TargetKind::Multiclass(c) if c < 3 => Err(Error::InvalidConfig(vec![format!(
                "target_kind: multiclass needs at least 3 classes, got {c}"
            )])),
            other => Ok(other),
        }
    }
}

/// Required shape of the per-bin event rate (or mean) sequence.
///
/// Fixed peak/valley variants carry the zero-based pre-bin index of the
/// change point. The bin that contains that pre-bin is the pivot: bins up
/// to and including it follow the first phase, bins from it onward follow
/// the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    #[default]
    None,
    Ascending,
    Descending,
    Concave,
    Convex,
    Peak,
    Valley,
    PeakFixed(usize),
    ValleyFixed(usize),
    Auto,
}

impl Trend {
    pub fn is_fixed_change(self) -> bool {
        matches!(self, Trend::PeakFixed(_) | Trend::ValleyFixed(_))
    }

    pub fn name(self) -> String {
        match self {
            Trend::None => "none".into(),
            Trend::Ascending => "ascending".into(),
            Trend::Descending => "descending".into(),
            Trend::Concave => "concave".into(),
            Trend::Convex => "convex".into(),
            Trend::Peak => "peak".into(),
            Trend::Valley => "valley".into(),
            Trend::PeakFixed(t) => format!("peak:{t}"),
            Trend::ValleyFixed(t) => format!("valley:{t}"),
            Trend::Auto => "auto".into(),
        }
    }
}

impl std::str::FromStr for Trend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let fixed = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::Input(format!("bad change point in trend {s:?}")))
        };
        Ok(match lower.as_str() {
            "none" => Trend::None,
            "ascending" => Trend::Ascending,
            "descending" => Trend::Descending,
            "concave" => Trend::Concave,
            "convex" => Trend::Convex,
            "peak" => Trend::Peak,
            "valley" => Trend::Valley,
            "auto" => Trend::Auto,
            other => {
                if let Some(rest) = other.strip_prefix("peak:") {
                    Trend::PeakFixed(fixed(rest)?)
                } else if let Some(rest) = other.strip_prefix("valley:") {
                    Trend::ValleyFixed(fixed(rest)?)
                } else {
                    return Err(Error::Input(format!("unknown trend {s:?}")));
                }
            }
        })
    }
}

/// Concentration penalty subtracted from the objective, weighted by γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Concentration {
    #[default]
    Off,
    Std(f64),
    Hhi(f64),
    MaxMinDiff(f64),
}

impl Concentration {
    pub fn gamma(self) -> f64 {
        match self {
            Concentration::Off => 0.0,
            Concentration::Std(g) | Concentration::Hhi(g) | Concentration::MaxMinDiff(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    #[default]
    Iv,
    Jsd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    #[default]
    L2,
}

/// Binning parameters. `None` bounds fall back to data-dependent defaults
/// when resolved against a pre-bin table (see [`Limits`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinningConfig {
    pub min_bins: Option<usize>,
    pub max_bins: Option<usize>,
    /// Minimum records per bin. `None` means 5% of the optimized records.
    pub min_bin_size: Option<u64>,
    pub max_bin_size: Option<u64>,
    pub min_nonevent: Option<u64>,
    pub max_nonevent: Option<u64>,
    pub min_event: Option<u64>,
    pub max_event: Option<u64>,
    /// Minimum event-rate (or mean) difference between bins of a monotone phase.
    pub min_diff: f64,
    pub concentration: Concentration,
    /// Maximum p-value between consecutive bins (binary target only).
    pub max_pvalue: Option<f64>,
    pub trend: Trend,
    /// Per-class trends for a multiclass target; empty means `trend` for every class.
    pub class_trends: Vec<Trend>,
    pub divergence: Divergence,
    pub prebin_count: usize,
    pub prebin_min_frac: f64,
    pub special_values: Vec<Cell>,
    pub cat_others_cutoff: f64,
    pub norm: Norm,
    /// Apply the monotonic presolve mask for ascending/descending binary problems.
    pub presolve: bool,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            min_bins: None,
            max_bins: None,
            min_bin_size: None,
            max_bin_size: None,
            min_nonevent: None,
            max_nonevent: None,
            min_event: None,
            max_event: None,
            min_diff: 0.0,
            concentration: Concentration::Off,
            max_pvalue: None,
            trend: Trend::None,
            class_trends: Vec::new(),
            divergence: Divergence::Iv,
            prebin_count: 20,
            prebin_min_frac: 0.05,
            special_values: Vec::new(),
            cat_others_cutoff: 0.0,
            norm: Norm::L2,
            presolve: false,
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Display + Copy>(
    issues: &mut Vec<String>,
    name: &str,
    lo: Option<T>,
    hi: Option<T>,
) {
    if let (Some(lo), Some(hi)) = (lo, hi) {
        if lo > hi {
            issues.push(format!("min_{name} ({lo}) > max_{name} ({hi})"));
        }
    }
}

/// Returns the config unchanged when every invariant holds, otherwise all
/// violations at once.
pub fn validate_config(cfg: BinningConfig) -> Result<BinningConfig> {
    let mut issues = Vec::new();
    check_range(&mut issues, "bins", cfg.min_bins, cfg.max_bins);
    check_range(&mut issues, "bin_size", cfg.min_bin_size, cfg.max_bin_size);
    check_range(&mut issues, "nonevent", cfg.min_nonevent, cfg.max_nonevent);
    check_range(&mut issues, "event", cfg.min_event, cfg.max_event);
    if cfg.max_bins == Some(0) {
        issues.push("max_bins must be positive".into());
    }
    if let Some(alpha) = cfg.max_pvalue {
        if !(alpha > 0.0 && alpha <= 1.0) {
            issues.push(format!("max_pvalue ({alpha}) out of range (0, 1]"));
        }
    }
    if !(cfg.min_diff >= 0.0) || !cfg.min_diff.is_finite() {
        issues.push(format!("min_diff ({}) must be a finite value >= 0", cfg.min_diff));
    }
    let gamma = cfg.concentration.gamma();
    if !(gamma >= 0.0) || !gamma.is_finite() {
        issues.push(format!("concentration gamma ({gamma}) must be a finite value >= 0"));
    }
    if !(0.0..1.0).contains(&cfg.cat_others_cutoff) {
        issues.push(format!(
            "cat_others_cutoff ({}) out of range [0, 1)",
            cfg.cat_others_cutoff
        ));
    }
    if cfg.prebin_count == 0 {
        issues.push("prebin_count must be positive".into());
    }
    if !(0.0..1.0).contains(&cfg.prebin_min_frac) {
        issues.push(format!(
            "prebin_min_frac ({}) out of range [0, 1)",
            cfg.prebin_min_frac
        ));
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::InvalidConfig(issues))
    }
}

/// Concrete constraint bounds for one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub min_bins: usize,
    pub max_bins: usize,
    pub min_size: u64,
    pub max_size: u64,
    pub min_nonevent: u64,
    pub max_nonevent: u64,
    pub min_event: u64,
    pub max_event: u64,
}

impl Limits {
    /// Resolves defaults against `n` pre-bins holding `total` records.
    pub fn resolve(cfg: &BinningConfig, target: TargetKind, n: usize, total: u64) -> Self {
        let default_min_bins = match target {
            TargetKind::Continuous => 1,
            _ => 2,
        };
        Self {
            min_bins: cfg.min_bins.unwrap_or(default_min_bins),
            max_bins: cfg.max_bins.unwrap_or(n).min(n.max(1)),
            min_size: cfg
                .min_bin_size
                .unwrap_or_else(|| (0.05 * total as f64).ceil() as u64),
            max_size: cfg.max_bin_size.unwrap_or(u64::MAX),
            min_nonevent: cfg.min_nonevent.unwrap_or(0),
            max_nonevent: cfg.max_nonevent.unwrap_or(u64::MAX),
            min_event: cfg.min_event.unwrap_or(0),
            max_event: cfg.max_event.unwrap_or(u64::MAX),
        }
    }

    /// Bounds that admit every partition.
    pub fn unconstrained(n: usize) -> Self {
        Self {
            min_bins: 1,
            max_bins: n.max(1),
            min_size: 0,
            max_size: u64::MAX,
            min_nonevent: 0,
            max_nonevent: u64::MAX,
            min_event: 0,
            max_event: u64::MAX,
        }
    }
}
