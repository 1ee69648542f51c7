//! Binning quality score for binary targets.

use serde::{Deserialize, Serialize};

use crate::aggregate::two_proportion_pvalue;
use crate::error::{Error, Result};
use crate::solution::{BinStats, TargetStats};

/// Bounds of the strong-IV bucket used to calibrate the score.
pub const STRONG_IV: (f64, f64) = (0.3, 0.5);

/// Scaled Rayleigh density, equal to 1 at `nu == c`.
pub fn rayleigh_factor(nu: f64, c: f64) -> f64 {
    nu / c * (-(nu * nu) / (2.0 * c * c) + 0.5).exp()
}

/// Scale at which `rayleigh_factor(a, c) == rayleigh_factor(b, c)`.
pub fn c_star(a: f64, b: f64) -> f64 {
    (b * b - a * a).sqrt() / (2.0 * (b / a).ln()).sqrt()
}

/// Predictive power bucket of an information value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IvLabel {
    NotUseful,
    Weak,
    Medium,
    Strong,
    OverPrediction,
}

impl IvLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            IvLabel::NotUseful => "not useful",
            IvLabel::Weak => "weak",
            IvLabel::Medium => "medium",
            IvLabel::Strong => "strong",
            IvLabel::OverPrediction => "over-prediction",
        }
    }
}

impl std::fmt::Display for IvLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Half-open buckets [0, 0.02), [0.02, 0.1), [0.1, 0.3), [0.3, 0.5), [0.5, inf).
pub fn iv_label(nu: f64) -> IvLabel {
    if nu < 0.02 {
        IvLabel::NotUseful
    } else if nu < 0.1 {
        IvLabel::Weak
    } else if nu < 0.3 {
        IvLabel::Medium
    } else if nu < 0.5 {
        IvLabel::Strong
    } else {
        IvLabel::OverPrediction
    }
}

/// Normalized HHI of `sizes` (fractions summing to one): 0 for uniform
/// sizes, 1 for a single bin.
pub fn hhi_normalized(sizes: &[f64]) -> f64 {
    let n = sizes.len();
    if n < 2 {
        return 1.0;
    }
    let hhi: f64 = sizes.iter().map(|s| s * s).sum();
    let inv = 1.0 / n as f64;
    ((hhi - inv) / (1.0 - inv)).clamp(0.0, 1.0)
}

/// Product of the Rayleigh factor at `c_star(0.3, 0.5)`, the significance
/// term and the homogeneity term. A single bin scores 0.
pub fn quality_score(nu: f64, pvalues: &[f64], sizes: &[f64]) -> f64 {
    let c = c_star(STRONG_IV.0, STRONG_IV.1);
    let significance: f64 = pvalues.iter().map(|p| 1.0 - p).product();
    rayleigh_factor(nu, c) * significance * (1.0 - hhi_normalized(sizes))
}

fn binary_counts(bin: &BinStats) -> Result<(u64, u64)> {
    match bin.target {
        TargetStats::Binary {
            nonevent, event, ..
        } => Ok((nonevent, event)),
        _ => Err(Error::Unsupported(
            "quality measures need a binary target".into(),
        )),
    }
}

/// Two-sided z-test p-value of each pair of consecutive bins.
pub fn adjacent_pvalues(bins: &[BinStats]) -> Result<Vec<f64>> {
    let counts = bins.iter().map(binary_counts).collect::<Result<Vec<_>>>()?;
    Ok(counts
        .windows(2)
        .map(|w| two_proportion_pvalue(w[0].1, w[0].0, w[1].1, w[1].0))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub iv: f64,
    pub adjacent_pvalues: Vec<f64>,
    pub bin_sizes: Vec<f64>,
    pub rayleigh_factor: f64,
    pub hhi_normalized: f64,
    pub score: f64,
    pub iv_label: IvLabel,
}

impl QualityReport {
    /// Report for the optimized `bins` of a binning whose information value
    /// is `iv`.
    pub fn new(iv: f64, bins: &[BinStats]) -> Result<Self> {
        let adjacent_pvalues = adjacent_pvalues(bins)?;
        let total: u64 = bins.iter().map(|b| b.count).sum();
        let bin_sizes: Vec<f64> = bins
            .iter()
            .map(|b| b.count as f64 / total as f64)
            .collect();
        Ok(Self {
            iv,
            rayleigh_factor: rayleigh_factor(iv, c_star(STRONG_IV.0, STRONG_IV.1)),
            hhi_normalized: hhi_normalized(&bin_sizes),
            score: quality_score(iv, &adjacent_pvalues, &bin_sizes),
            iv_label: iv_label(iv),
            adjacent_pvalues,
            bin_sizes,
        })
    }
}
