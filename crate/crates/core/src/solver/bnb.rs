//! Depth-first branch-and-bound over bin ends.

use crate::aggregate::TriMatrix;
use crate::config::Concentration;
use crate::solution::Interval;

use super::problem::{is_better, tie_tol, Found, Problem};
use super::trend::{extend, Phase};

struct Search<'a, 'p> {
    p: &'a Problem<'p>,
    n: usize,
    series: Vec<&'a TriMatrix<f64>>,
    /// Best unconstrained gain over partitions of `s..n`.
    suffix: Vec<f64>,
    gamma: f64,
    total: f64,
    ivs: Vec<Interval>,
    ends: Vec<usize>,
    values: Vec<Vec<f64>>,
    phases: Vec<Phase>,
    best: Option<Found>,
}

fn suffix_bounds(p: &Problem) -> Vec<f64> {
    let n = p.n();
    let mut suffix = vec![0.0; n + 1];
    for s in (0..n).rev() {
        suffix[s] = (s..n)
            .map(|e| p.agg.gain(Interval::new(s, e)) + suffix[e + 1])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    suffix
}

impl Search<'_, '_> {
    /// Lower bound on the final penalty given the bins chosen so far.
    fn penalty_floor(&self) -> f64 {
        let records = &self.p.agg.records;
        match self.p.concentration {
            Concentration::Off | Concentration::Std(_) => 0.0,
            Concentration::Hhi(_) => self
                .ivs
                .iter()
                .map(|&iv| (records.at(iv) as f64 / self.total).powi(2))
                .sum(),
            Concentration::MaxMinDiff(_) => {
                let counts = self.ivs.iter().map(|&iv| records.at(iv) as f64);
                let hi = counts.clone().fold(f64::NEG_INFINITY, f64::max);
                let lo = counts.fold(f64::INFINITY, f64::min);
                hi - lo
            }
        }
    }

    /// True when some record-count maximum is already exceeded; all longer
    /// bins from the same start exceed it too.
    fn exceeds_max(&self, iv: Interval) -> bool {
        let lim = &self.p.limits;
        let agg = self.p.agg;
        if agg.records.at(iv) > lim.max_size {
            return true;
        }
        match (agg.nonevents(), agg.events()) {
            (Some(ne), Some(e)) => ne.at(iv) > lim.max_nonevent || e.at(iv) > lim.max_event,
            _ => false,
        }
    }

    fn dfs(&mut self, start: usize, gain: f64) {
        let n = self.n;
        let lim = self.p.limits;
        let m = self.ivs.len() + 1;
        for end in start..n {
            let last = end == n - 1;
            if m + (n - 1 - end) < lim.min_bins {
                break;
            }
            if !last && m >= lim.max_bins {
                continue;
            }
            if let Some(mask) = &self.p.mask {
                if !mask.allows_end(end) {
                    continue;
                }
            }
            let iv = Interval::new(start, end);
            if self.exceeds_max(iv) {
                break;
            }
            if !self.p.bin_size_ok(iv) {
                continue;
            }
            if let Some(&prev) = self.ivs.last() {
                if self.p.pairs.violates(prev, iv) {
                    continue;
                }
            }
            let mut phases = Vec::with_capacity(self.series.len());
            let mut trend_ok = true;
            for (s, series) in self.series.iter().enumerate() {
                match extend(
                    self.p.trends[s],
                    &self.values[s],
                    &self.ends,
                    series.at(iv),
                    start,
                    self.phases[s],
                    self.p.min_diff,
                ) {
                    Some(ph) => phases.push(ph),
                    None => {
                        trend_ok = false;
                        break;
                    }
                }
            }
            if !trend_ok {
                continue;
            }

            let new_gain = gain + self.p.agg.gain(iv);
            self.ivs.push(iv);
            let bound = new_gain + self.suffix[end + 1] - self.gamma * self.penalty_floor();
            let pruned = self
                .best
                .as_ref()
                .is_some_and(|b| bound < b.score - tie_tol(bound, b.score));
            if !pruned {
                let saved = std::mem::replace(&mut self.phases, phases);
                self.ends.push(end);
                for (s, series) in self.series.iter().enumerate() {
                    self.values[s].push(series.at(iv));
                }
                if last {
                    self.leaf();
                } else {
                    self.dfs(end + 1, new_gain);
                }
                for v in &mut self.values {
                    v.pop();
                }
                self.ends.pop();
                self.phases = saved;
            }
            self.ivs.pop();
        }
    }

    fn leaf(&mut self) {
        if !self.p.bin_count_ok(self.ivs.len()) {
            return;
        }
        debug_assert!(self.p.feasible(&self.ivs), "{:?}", self.ivs);
        let score = self.p.score(&self.ivs);
        if self.best.as_ref().is_none_or(|b| is_better(score, &self.ivs, b)) {
            self.best = Some(Found {
                intervals: self.ivs.clone(),
                score,
                change_point: self.p.change_point(&self.ivs),
            });
        }
    }
}

/// Best feasible partition of `p` under the tie-break order, if any.
pub(crate) fn branch_and_bound(p: &Problem) -> Option<Found> {
    let n = p.n();
    if n == 0 || p.limits.min_bins > p.limits.max_bins {
        return None;
    }
    let series = p.agg.trend_series();
    let k = series.len();
    let mut search = Search {
        p,
        n,
        series,
        suffix: suffix_bounds(p),
        gamma: p.concentration.gamma(),
        total: p.agg.total_records() as f64,
        ivs: Vec::with_capacity(n),
        ends: Vec::with_capacity(n),
        values: vec![Vec::with_capacity(n); k],
        phases: vec![Phase::First; k],
        best: None,
    };
    search.dfs(0, 0.0);
    search.best
}
