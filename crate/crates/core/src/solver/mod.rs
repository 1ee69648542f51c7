//! Exact solver: constraint evaluation, branch-and-bound, the brute-force
//! reference, peak/valley change-point enumeration and automatic trend
//! selection.

mod bnb;
mod presolve;
mod problem;
pub mod trend;

pub use presolve::{presolve_monotonic, PresolveMask};
pub use problem::{apply_pvalue_constraint, bin_stats, concentration_penalty};
pub use trend::{check_trend, find_pivot};

pub(crate) use problem::{is_better, tie_tol, Found, Problem};

use crate::aggregate::{AggregateSet, Aggregates, PValuePairs};
use crate::config::{validate_config, BinningConfig, TargetKind, Trend};
use crate::error::{Error, Result};
use crate::solution::{intervals_from_ends, Solution, Status};

/// Largest pre-bin count accepted by the brute-force reference.
pub const ORACLE_MAX_N: usize = 20;

/// Relative improvement peak/valley needs over ascending/descending to be
/// picked by the automatic trend rule.
pub const AUTO_PV_MARGIN: f64 = 0.1;

pub(crate) type SearchFn<'s> = dyn Fn(&Problem) -> Option<Found> + 's;

/// Shared solve pipeline around a search routine.
pub(crate) struct Driver<'s> {
    pub search: &'s SearchFn<'s>,
    /// Solve free peak/valley as one fixed change point per pre-bin.
    pub enumerate_t: bool,
    pub presolve: bool,
    pub status: Status,
}

impl Driver<'_> {
    pub fn run(&self, agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<Solution> {
        let cfg = validate_config(cfg.clone())?;
        if agg.n() == 0 {
            return Err(Error::Input("no pre-bins".into()));
        }
        let base = Problem::new(agg, &cfg, pairs)?;
        match agg.target_kind() {
            TargetKind::Multiclass(_) => {
                let trends = self.resolve_class_trends(&base);
                let p = base.with_trends(trends);
                Ok(match (self.search)(&p) {
                    Some(found) => p.solution(found, self.status, cfg.trend),
                    None => {
                        let mut s = Solution::infeasible(cfg.trend);
                        s.class_trends = p.trends.clone();
                        s
                    }
                })
            }
            _ => {
                let (trend, found) = if cfg.trend == Trend::Auto {
                    self.auto_single(&base)
                } else {
                    (cfg.trend, self.solve_trend(&base, cfg.trend))
                };
                let p = base.with_trends(vec![trend]);
                Ok(match found {
                    Some(found) => p.solution(found, self.status, trend),
                    None => Solution::infeasible(trend),
                })
            }
        }
    }

    /// Single-series solve under a concrete trend.
    fn solve_trend(&self, base: &Problem, trend: Trend) -> Option<Found> {
        let mut p = base.with_trends(vec![trend]);
        match trend {
            Trend::Peak | Trend::Valley if self.enumerate_t => {
                let mut best: Option<Found> = None;
                for t in 0..p.n() {
                    let fixed = if trend == Trend::Peak {
                        Trend::PeakFixed(t)
                    } else {
                        Trend::ValleyFixed(t)
                    };
                    if let Some(f) = self.solve_trend(base, fixed) {
                        if best.as_ref().is_none_or(|b| is_better(f.score, &f.intervals, b)) {
                            best = Some(f);
                        }
                    }
                }
                best
            }
            Trend::Ascending | Trend::Descending if self.presolve => {
                if let Aggregates::Binary { event_rate, .. } = &p.agg.detail {
                    p.mask = Some(presolve_monotonic(event_rate, trend));
                }
                (self.search)(&p)
            }
            _ => (self.search)(&p),
        }
    }

    fn auto_single(&self, base: &Problem) -> (Trend, Option<Found>) {
        let candidates = [Trend::Descending, Trend::Ascending, Trend::Peak, Trend::Valley]
            .map(|t| (t, self.solve_trend(base, t)));
        pick_auto(candidates)
    }

    /// Resolves `Auto` class trends one class at a time on the joint
    /// problem; classes still pending are left unconstrained meanwhile.
    fn resolve_class_trends(&self, base: &Problem) -> Vec<Trend> {
        let mut trends = base.trends.clone();
        for c in 0..trends.len() {
            if trends[c] != Trend::Auto {
                continue;
            }
            let candidates = [Trend::Descending, Trend::Ascending, Trend::Peak, Trend::Valley].map(|t| {
                let mut trial = trends.clone();
                trial[c] = t;
                for later in trial.iter_mut().skip(c + 1) {
                    if *later == Trend::Auto {
                        *later = Trend::None;
                    }
                }
                (t, (self.search)(&base.with_trends(trial)))
            });
            trends[c] = pick_auto(candidates).0;
        }
        trends
    }
}

/// Automatic trend rule over solutions ordered Descending, Ascending, Peak,
/// Valley. Peak/valley wins only with a strictly higher score that is also
/// at least [`AUTO_PV_MARGIN`] better relative to ascending/descending.
fn pick_auto(candidates: [(Trend, Option<Found>); 4]) -> (Trend, Option<Found>) {
    let best_of = |a: (Trend, Option<Found>), b: (Trend, Option<Found>)| match (&a.1, &b.1) {
        (Some(fa), Some(fb)) if is_better(fb.score, &fb.intervals, fa) => b,
        (None, Some(_)) => b,
        _ => a,
    };
    let [d, a, p, v] = candidates;
    let ad = best_of(d, a);
    let pv = best_of(p, v);
    match (&ad.1, &pv.1) {
        (Some(x), Some(y)) => {
            let gap = y.score - x.score;
            if gap > tie_tol(x.score, y.score) && gap >= AUTO_PV_MARGIN * x.score.abs() {
                pv
            } else {
                ad
            }
        }
        (None, Some(_)) => pv,
        _ => ad,
    }
}

/// Enumerates every contiguous partition and keeps the best feasible one.
pub(crate) fn exhaustive(p: &Problem) -> Option<Found> {
    let n = p.n();
    let mut best: Option<Found> = None;
    let mut ends = Vec::with_capacity(n);
    for bits in 0u64..(1u64 << (n - 1)) {
        ends.clear();
        ends.extend((0..n - 1).filter(|&i| bits >> i & 1 == 1));
        ends.push(n - 1);
        let ivs = intervals_from_ends(&ends);
        if let Some(score) = p.evaluate(&ivs) {
            if best.as_ref().is_none_or(|b| is_better(score, &ivs, b)) {
                best = Some(Found {
                    change_point: p.change_point(&ivs),
                    intervals: ivs,
                    score,
                });
            }
        }
    }
    best
}

/// Optimal partition by branch-and-bound. Infeasible instances are reported
/// through [`Status::Infeasible`]; invalid configurations are errors.
pub fn solve(agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<Solution> {
    Driver {
        search: &bnb::branch_and_bound,
        enumerate_t: true,
        presolve: cfg.presolve,
        status: Status::Optimal,
    }
    .run(agg, cfg, pairs)
}

/// [`solve`] restricted to peak/valley trends.
pub fn solve_peak_valley(agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<Solution> {
    match cfg.trend {
        Trend::Peak | Trend::Valley | Trend::PeakFixed(_) | Trend::ValleyFixed(_) => solve(agg, cfg, pairs),
        other => Err(Error::InvalidConfig(vec![format!(
            "peak/valley solve called with trend {}",
            other.name()
        )])),
    }
}

/// [`solve`] for a multiclass aggregate set.
pub fn solve_multiclass(agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<Solution> {
    match agg.target_kind() {
        TargetKind::Multiclass(_) => solve(agg, cfg, pairs),
        other => Err(Error::InvalidConfig(vec![format!(
            "multiclass solve called with {other:?} target"
        )])),
    }
}

/// Solves with `trend = Auto` and returns the selected trend.
pub fn auto_trend(agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<(Trend, Solution)> {
    let cfg = BinningConfig {
        trend: Trend::Auto,
        ..cfg.clone()
    };
    let sol = solve(agg, &cfg, pairs)?;
    Ok((sol.trend, sol))
}

/// Reference solver: scores all `2^(n-1)` partitions with the complete
/// constraint check. Requires `n <= ORACLE_MAX_N`.
pub fn brute_force_oracle(agg: &AggregateSet, cfg: &BinningConfig, pairs: &PValuePairs) -> Result<Solution> {
    if agg.n() > ORACLE_MAX_N {
        return Err(Error::InvalidConfig(vec![format!(
            "brute force limited to {ORACLE_MAX_N} pre-bins, got {}",
            agg.n()
        )]));
    }
    Driver {
        search: &exhaustive,
        enumerate_t: false,
        presolve: false,
        status: Status::Optimal,
    }
    .run(agg, cfg, pairs)
}
