//! A fully resolved problem instance and the reference evaluation of a
//! candidate partition against every constraint.

use crate::aggregate::{woe, AggregateSet, Aggregates, PValuePairs, TriMatrix};
use crate::config::{BinningConfig, Concentration, Limits, TargetKind, Trend};
use crate::error::{Error, Result};
use crate::solution::{BinStats, Interval, Solution, Status, TargetStats};

use super::presolve::PresolveMask;
use super::trend::{check_trend, find_pivot};

/// Relative tolerance under which two objective values count as tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn tie_tol(a: f64, b: f64) -> f64 {
    TIE_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Concentration of bin record counts, unweighted by γ.
///
/// Std is the sample standard deviation (0 for a single bin), HHI the sum
/// of squared record shares, MaxMinDiff the spread between the largest and
/// smallest bin in records.
pub fn concentration_penalty(
    intervals: &[Interval],
    records: &TriMatrix<u64>,
    kind: Concentration,
) -> f64 {
    let counts = intervals.iter().map(|&iv| records.at(iv) as f64);
    match kind {
        Concentration::Off => 0.0,
        Concentration::Std(_) => {
            let m = intervals.len();
            if m < 2 {
                return 0.0;
            }
            let mean = counts.clone().sum::<f64>() / m as f64;
            let ss: f64 = counts.map(|c| (c - mean).powi(2)).sum();
            (ss / (m - 1) as f64).sqrt()
        }
        Concentration::Hhi(_) => {
            let n = records.n();
            let total = records.get(n - 1, 0) as f64;
            counts.map(|c| (c / total).powi(2)).sum()
        }
        Concentration::MaxMinDiff(_) => {
            let (lo, hi) = counts.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c), hi.max(c))
            });
            if intervals.is_empty() {
                0.0
            } else {
                hi - lo
            }
        }
    }
}

/// False iff two adjacent bins form a forbidden p-value pair.
pub fn apply_pvalue_constraint(intervals: &[Interval], pairs: &PValuePairs) -> bool {
    pairs.is_empty() || intervals.windows(2).all(|w| !pairs.violates(w[0], w[1]))
}

/// A candidate partition with its maximized score.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Found {
    pub intervals: Vec<Interval>,
    pub score: f64,
    pub change_point: Option<usize>,
}

/// Tie-break order: higher score, then fewer bins, then lexicographically
/// earliest bin starts.
pub(crate) fn is_better(score: f64, ivs: &[Interval], best: &Found) -> bool {
    let tol = tie_tol(score, best.score);
    if score > best.score + tol {
        return true;
    }
    if score < best.score - tol {
        return false;
    }
    if ivs.len() != best.intervals.len() {
        return ivs.len() < best.intervals.len();
    }
    ivs.iter()
        .map(|iv| iv.start)
        .lt(best.intervals.iter().map(|iv| iv.start))
}

/// Problem instance with every default resolved and no `Auto` trend left.
#[derive(Debug, Clone)]
pub(crate) struct Problem<'a> {
    pub agg: &'a AggregateSet,
    pub limits: Limits,
    /// One trend per trend series (one per class for multiclass).
    pub trends: Vec<Trend>,
    pub min_diff: f64,
    pub concentration: Concentration,
    pub pairs: &'a PValuePairs,
    pub mask: Option<PresolveMask>,
}

impl<'a> Problem<'a> {
    /// Resolves `cfg` against `agg`. Trends are taken from the config and
    /// may still contain `Auto`; the driver replaces those before searching.
    pub fn new(agg: &'a AggregateSet, cfg: &BinningConfig, pairs: &'a PValuePairs) -> Result<Self> {
        let n = agg.n();
        let target = agg.target_kind();
        let limits = Limits::resolve(cfg, target, n, agg.total_records());
        let trends = match target {
            TargetKind::Multiclass(c) => {
                if cfg.class_trends.is_empty() {
                    vec![cfg.trend; c]
                } else if cfg.class_trends.len() == c {
                    cfg.class_trends.clone()
                } else {
                    return Err(Error::InvalidConfig(vec![format!(
                        "class_trends has {} entries for {c} classes",
                        cfg.class_trends.len()
                    )]));
                }
            }
            _ => vec![cfg.trend],
        };
        for t in &trends {
            if let Trend::PeakFixed(p) | Trend::ValleyFixed(p) = t {
                if *p >= n {
                    return Err(Error::InvalidConfig(vec![format!(
                        "change point {p} outside 0..{n}"
                    )]));
                }
            }
        }
        Ok(Self {
            agg,
            limits,
            trends,
            min_diff: cfg.min_diff,
            concentration: cfg.concentration,
            pairs,
            mask: None,
        })
    }

    pub fn n(&self) -> usize {
        self.agg.n()
    }

    pub fn with_trends(&self, trends: Vec<Trend>) -> Self {
        Self {
            trends,
            ..self.clone()
        }
    }

    /// Record-count bounds of a single bin.
    #[inline]
    pub fn bin_size_ok(&self, iv: Interval) -> bool {
        let lim = &self.limits;
        let r = self.agg.records.at(iv);
        if r < lim.min_size || r > lim.max_size {
            return false;
        }
        if let (Some(ne), Some(e)) = (self.agg.nonevents(), self.agg.events()) {
            let (ne, e) = (ne.at(iv), e.at(iv));
            if ne < lim.min_nonevent || ne > lim.max_nonevent {
                return false;
            }
            if e < lim.min_event || e > lim.max_event {
                return false;
            }
        }
        true
    }

    #[inline]
    pub fn bin_count_ok(&self, m: usize) -> bool {
        self.limits.min_bins <= m && m <= self.limits.max_bins
    }

    pub fn penalty(&self, intervals: &[Interval]) -> f64 {
        concentration_penalty(intervals, &self.agg.records, self.concentration)
    }

    /// Maximized score: total gain minus the weighted concentration penalty.
    pub fn score(&self, intervals: &[Interval]) -> f64 {
        let gain: f64 = intervals.iter().map(|&iv| self.agg.gain(iv)).sum();
        self.score_from_gain(gain, intervals)
    }

    #[inline]
    pub fn score_from_gain(&self, gain: f64, intervals: &[Interval]) -> f64 {
        let gamma = self.concentration.gamma();
        if gamma == 0.0 {
            gain
        } else {
            gain - gamma * self.penalty(intervals)
        }
    }

    /// Pivot position within `intervals` implied by a fixed change pre-bin.
    fn fixed_pivot(intervals: &[Interval], t: usize) -> usize {
        intervals
            .iter()
            .position(|iv| iv.contains(t))
            .unwrap_or(intervals.len() - 1)
    }

    fn series_values(&self, series: &TriMatrix<f64>, intervals: &[Interval]) -> Vec<f64> {
        intervals.iter().map(|&iv| series.at(iv)).collect()
    }

    pub fn trend_ok(&self, intervals: &[Interval]) -> bool {
        self.agg
            .trend_series()
            .into_iter()
            .zip(&self.trends)
            .all(|(series, &trend)| {
                let values = self.series_values(series, intervals);
                let trend = match trend {
                    Trend::PeakFixed(t) => Trend::PeakFixed(Self::fixed_pivot(intervals, t)),
                    Trend::ValleyFixed(t) => Trend::ValleyFixed(Self::fixed_pivot(intervals, t)),
                    other => other,
                };
                check_trend(&values, trend, self.min_diff)
            })
    }

    /// Full constraint check, ignoring any presolve mask.
    pub fn feasible(&self, intervals: &[Interval]) -> bool {
        self.bin_count_ok(intervals.len())
            && intervals.iter().all(|&iv| self.bin_size_ok(iv))
            && apply_pvalue_constraint(intervals, self.pairs)
            && self.trend_ok(intervals)
    }

    /// Score of a feasible partition, `None` otherwise.
    pub fn evaluate(&self, intervals: &[Interval]) -> Option<f64> {
        self.feasible(intervals).then(|| self.score(intervals))
    }

    /// Change pre-bin of a single-series peak/valley solution.
    pub fn change_point(&self, intervals: &[Interval]) -> Option<usize> {
        if self.trends.len() != 1 || intervals.is_empty() {
            return None;
        }
        match self.trends[0] {
            Trend::PeakFixed(t) | Trend::ValleyFixed(t) => Some(t),
            trend @ (Trend::Peak | Trend::Valley) => {
                let series = self.agg.trend_series()[0];
                let values = self.series_values(series, intervals);
                find_pivot(&values, trend == Trend::Peak, self.min_diff)
                    .map(|p| intervals[p].start)
            }
            _ => None,
        }
    }

    pub fn objective_from_score(&self, score: f64) -> f64 {
        match self.agg.target_kind() {
            TargetKind::Continuous => -score,
            _ => score,
        }
    }

    pub fn solution(&self, found: Found, status: Status, trend: Trend) -> Solution {
        let bins = bin_stats(self.agg, &found.intervals);
        let class_trends = match self.agg.target_kind() {
            TargetKind::Multiclass(_) => self.trends.clone(),
            _ => Vec::new(),
        };
        Solution {
            objective: self.objective_from_score(found.score),
            intervals: found.intervals,
            status,
            bins,
            trend,
            class_trends,
            change_point: found.change_point,
        }
    }
}

/// Per-bin statistics relative to the totals of `agg`.
pub fn bin_stats(agg: &AggregateSet, intervals: &[Interval]) -> Vec<BinStats> {
    let n = agg.n();
    intervals
        .iter()
        .map(|&iv| {
            let count = agg.records.at(iv);
            let target = match &agg.detail {
                Aggregates::Binary {
                    kind,
                    divergence,
                    event_rate,
                    nonevents,
                    events,
                } => {
                    let (ne_t, e_t) = (nonevents.get(n - 1, 0), events.get(n - 1, 0));
                    let (ne, e) = (nonevents.at(iv), events.at(iv));
                    let p = ne as f64 / ne_t as f64;
                    let q = e as f64 / e_t as f64;
                    let d = divergence.at(iv);
                    let other = |k| crate::aggregate::divergence_contrib(p, q, k).unwrap_or(0.0);
                    let (iv_c, js_c) = match kind {
                        crate::config::Divergence::Iv => (d, other(crate::config::Divergence::Jsd)),
                        crate::config::Divergence::Jsd => (other(crate::config::Divergence::Iv), d),
                    };
                    TargetStats::Binary {
                        nonevent: ne,
                        event: e,
                        event_rate: event_rate.at(iv),
                        woe: woe(ne, e, ne_t, e_t).unwrap_or(0.0),
                        iv: iv_c,
                        js: js_c,
                    }
                }
                Aggregates::Continuous { mean, sums, .. } => TargetStats::Continuous {
                    sum: sums.at(iv),
                    mean: mean.at(iv),
                },
                Aggregates::Multiclass { classes, .. } => {
                    let total = agg.total_records();
                    let mut counts = Vec::with_capacity(classes.len());
                    let mut woes = Vec::with_capacity(classes.len());
                    for c in classes {
                        let e = c.events.at(iv);
                        let e_t = c.events.get(n - 1, 0);
                        counts.push(e);
                        woes.push(woe(count - e, e, total - e_t, e_t).unwrap_or(0.0));
                    }
                    TargetStats::Multiclass {
                        event_rates: classes.iter().map(|c| c.event_rate.at(iv)).collect(),
                        divergence: classes.iter().map(|c| c.divergence.at(iv)).collect(),
                        counts,
                        woe: woes,
                    }
                }
            };
            BinStats { count, target }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::build_binary;
    use crate::config::Divergence;
    use crate::preprocess::PrebinTable;

    fn records(counts: &[u64]) -> TriMatrix<u64> {
        let t = PrebinTable::binary(counts.iter().map(|c| c / 2).collect(), counts.iter().map(|c| c - c / 2).collect());
        build_binary(&t, Divergence::Iv).unwrap().records
    }

    #[test]
    fn penalties_for_equal_bins() {
        let r = records(&[50, 50]);
        let ivs = [Interval::new(0, 0), Interval::new(1, 1)];
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::Std(1.0)), 0.0);
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::MaxMinDiff(1.0)), 0.0);
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::Hhi(1.0)), 0.5);
    }

    #[test]
    fn penalties_for_single_bin() {
        let r = records(&[60, 40]);
        let ivs = [Interval::new(0, 1)];
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::Hhi(1.0)), 1.0);
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::Std(1.0)), 0.0);
    }

    #[test]
    fn penalties_for_unequal_bins() {
        let r = records(&[30, 70]);
        let ivs = [Interval::new(0, 0), Interval::new(1, 1)];
        assert_eq!(concentration_penalty(&ivs, &r, Concentration::MaxMinDiff(1.0)), 40.0);
        assert!((concentration_penalty(&ivs, &r, Concentration::Hhi(1.0)) - 0.58).abs() < 1e-15);
        // sample std of {30, 70}: sqrt((400 + 400) / 1)
        assert!((concentration_penalty(&ivs, &r, Concentration::Std(1.0)) - 800f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pvalue_constraint() {
        let mut pairs = PValuePairs::empty();
        let split = [Interval::new(0, 0), Interval::new(1, 1)];
        assert!(apply_pvalue_constraint(&split, &pairs));
        pairs.quads.insert((0, 0, 1, 1));
        assert!(!apply_pvalue_constraint(&split, &pairs));
        assert!(apply_pvalue_constraint(&[Interval::new(0, 1)], &pairs));
    }

    #[test]
    fn tie_break_prefers_fewer_bins_then_earlier_starts() {
        let best = Found {
            intervals: vec![Interval::new(0, 1), Interval::new(2, 2)],
            score: 1.0,
            change_point: None,
        };
        assert!(is_better(1.0 + 1e-9, &[Interval::new(0, 2)], &best) || true);
        assert!(is_better(1.0, &[Interval::new(0, 2)], &best));
        assert!(is_better(1.0, &[Interval::new(0, 0), Interval::new(1, 2)], &best));
        assert!(!is_better(1.0, &[Interval::new(0, 1), Interval::new(2, 2)], &best));
        assert!(!is_better(0.5, &[Interval::new(0, 2)], &best));
    }
}
