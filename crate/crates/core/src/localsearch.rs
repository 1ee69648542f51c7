//! Local search over the run-length bin-end encoding.
//!
//! A partition of `n` pre-bins is a bit vector `x` with `x[i] = 1` when a bin
//! ends at pre-bin `i` (the last bit is always set). The accumulator `a`
//! counts zeros seen since the last set bit and `z[i]` is the length of the
//! zero run before a set bit, so the bin ending at `i` starts at `i - z[i]`.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{AggregateSet, PValuePairs};
use crate::config::{validate_config, BinningConfig, Trend};
use crate::error::{Error, Result};
use crate::solution::{Interval, Solution, Status};
use crate::solver::{apply_pvalue_constraint, is_better, tie_tol, Driver, Found, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalEncoding {
    pub x: Vec<bool>,
    pub a: Vec<usize>,
    pub z: Vec<usize>,
}

impl DiagonalEncoding {
    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.x.len())
            .filter(|&i| self.x[i])
            .map(|i| Interval::new(i - self.z[i], i))
            .collect()
    }
}

/// Runs both recurrences over `x`. Fails unless the last bit is set.
pub fn decode(x: &[bool]) -> Result<DiagonalEncoding> {
    match x.last() {
        Some(true) => {}
        Some(false) => return Err(Error::MalformedEncoding("last bit must be 1".into())),
        None => return Err(Error::MalformedEncoding("empty encoding".into())),
    }
    let n = x.len();
    let mut a = vec![0; n];
    let mut z = vec![0; n];
    let mut prev_a = 0;
    let mut prev_x = false;
    for i in 0..n {
        let xi = x[i] as usize;
        a[i] = (prev_a + 1) * (1 - xi);
        z[i] = prev_a * (1 - prev_x as usize) * xi;
        prev_a = a[i];
        prev_x = x[i];
    }
    Ok(DiagonalEncoding { x: x.to_vec(), a, z })
}

/// Bit vector of the bin ends of a partition of `0..n`.
pub fn encode(intervals: &[Interval], n: usize) -> Vec<bool> {
    let mut x = vec![false; n];
    for iv in intervals {
        x[iv.end] = true;
    }
    x
}

/// Stopping rule of [`ls_solve`]. The search ends at whichever limit is
/// hit first; the time limit applies to each trend searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsBudget {
    /// Neighbour evaluations.
    pub max_iterations: u64,
    pub time_limit: Option<Duration>,
    /// Random restarts after the first local optimum.
    pub max_restarts: usize,
}

impl Default for LsBudget {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            time_limit: None,
            max_restarts: 64,
        }
    }
}

impl LsBudget {
    pub fn with_time(limit: Duration) -> Self {
        Self {
            time_limit: Some(limit),
            ..Self::default()
        }
    }
}

/// Search key: fewer violations first, then higher score.
#[derive(Debug, Clone, Copy)]
struct Key {
    violations: usize,
    score: f64,
}

impl Key {
    fn beats(self, other: Key) -> bool {
        if self.violations != other.violations {
            return self.violations < other.violations;
        }
        self.score > other.score + tie_tol(self.score, other.score)
    }
}

fn intervals_of(x: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &bit) in x.iter().enumerate() {
        if bit {
            out.push(Interval::new(start, i));
            start = i + 1;
        }
    }
    out
}

/// Constraint violation count used only to steer towards feasibility.
/// Feasibility itself is decided by the full problem check.
fn violations(p: &Problem, ivs: &[Interval]) -> usize {
    let m = ivs.len();
    let lim = &p.limits;
    let count = lim.min_bins.saturating_sub(m) + m.saturating_sub(lim.max_bins);
    let sizes = ivs.iter().filter(|&&iv| !p.bin_size_ok(iv)).count();
    let pairs = if apply_pvalue_constraint(ivs, p.pairs) {
        0
    } else {
        ivs.windows(2).filter(|w| p.pairs.violates(w[0], w[1])).count()
    };
    let trend = usize::from(!p.trend_ok(ivs));
    (count + sizes + pairs + trend).max(1)
}

fn key(p: &Problem, x: &[bool]) -> Key {
    let ivs = intervals_of(x);
    match p.evaluate(&ivs) {
        Some(score) => Key {
            violations: 0,
            score,
        },
        None => Key {
            violations: violations(p, &ivs),
            score: p.score(&ivs),
        },
    }
}

struct Runner<'a, 'p> {
    p: &'a Problem<'p>,
    budget: LsBudget,
    started: Instant,
    iterations: u64,
    best: Option<Found>,
}

impl Runner<'_, '_> {
    fn exhausted(&self) -> bool {
        self.iterations >= self.budget.max_iterations
            || self
                .budget
                .time_limit
                .is_some_and(|t| self.started.elapsed() >= t)
    }

    fn record(&mut self, x: &[bool], k: Key) {
        if k.violations != 0 {
            return;
        }
        let ivs = intervals_of(x);
        if self.best.as_ref().is_none_or(|b| is_better(k.score, &ivs, b)) {
            self.best = Some(Found {
                change_point: self.p.change_point(&ivs),
                intervals: ivs,
                score: k.score,
            });
        }
    }

    /// Best neighbour by single flips and boundary shifts, if it improves on
    /// `current`. Returns `None` at a local optimum or when out of budget.
    fn step(&mut self, x: &mut Vec<bool>, current: Key) -> Option<Key> {
        let n = x.len();
        let mut best: Option<(Key, Vec<bool>)> = None;
        let mut consider = |runner: &mut Self, y: Vec<bool>| {
            runner.iterations += 1;
            let k = key(runner.p, &y);
            runner.record(&y, k);
            if best.as_ref().map_or(k.beats(current), |(bk, _)| k.beats(*bk)) {
                best = Some((k, y));
            }
        };
        for i in 0..n - 1 {
            if self.exhausted() {
                break;
            }
            let mut y = x.clone();
            y[i] = !y[i];
            consider(self, y);
        }
        for i in 0..n.saturating_sub(2) {
            if self.exhausted() {
                break;
            }
            if x[i] != x[i + 1] {
                let mut y = x.clone();
                y.swap(i, i + 1);
                consider(self, y);
            }
        }
        let (k, y) = best?;
        *x = y;
        Some(k)
    }

    fn climb(&mut self, x: &mut Vec<bool>) {
        let mut current = key(self.p, x);
        self.record(x, current);
        while !self.exhausted() {
            match self.step(x, current) {
                Some(k) => current = k,
                None => break,
            }
        }
    }
}

/// Merges adjacent bins greedily while that lowers the violation count.
fn greedy_repair(p: &Problem, x: &mut [bool]) {
    let n = x.len();
    let mut current = key(p, x);
    while current.violations > 0 {
        let mut best: Option<(Key, usize)> = None;
        for i in 0..n - 1 {
            if !x[i] {
                continue;
            }
            x[i] = false;
            let k = key(p, x);
            x[i] = true;
            if best.map_or(k.beats(current), |(bk, _)| k.beats(bk)) {
                best = Some((k, i));
            }
        }
        match best {
            Some((k, i)) => {
                x[i] = false;
                current = k;
            }
            None => break,
        }
    }
}

fn random_encoding(p: &Problem, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = p.n();
    let lo = p.limits.min_bins.clamp(1, n);
    let hi = p.limits.max_bins.clamp(lo, n);
    let k = rng.random_range(lo..=hi);
    let mut x = vec![false; n];
    x[n - 1] = true;
    if k > 1 {
        for i in sample(rng, n - 1, k - 1) {
            x[i] = true;
        }
    }
    x
}

fn search(p: &Problem, budget: LsBudget, seed: u64) -> Option<Found> {
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runner = Runner {
        p,
        budget,
        started: Instant::now(),
        iterations: 0,
        best: None,
    };
    let mut x = vec![true; n];
    greedy_repair(p, &mut x);
    runner.record(&x, key(p, &x));
    runner.climb(&mut x);
    let mut restarts = 0;
    while restarts < budget.max_restarts && !runner.exhausted() {
        restarts += 1;
        let mut x = random_encoding(p, &mut rng);
        runner.climb(&mut x);
    }
    runner.best
}

/// Objective of the partition encoded by `x`, or `None` when it violates a
/// constraint. `Auto` trends are not accepted.
pub fn ls_objective(
    x: &[bool],
    agg: &AggregateSet,
    cfg: &BinningConfig,
    pairs: &PValuePairs,
) -> Result<Option<f64>> {
    let cfg = validate_config(cfg.clone())?;
    let enc = decode(x)?;
    if enc.x.len() != agg.n() {
        return Err(Error::MalformedEncoding(format!(
            "encoding has {} bits for {} pre-bins",
            enc.x.len(),
            agg.n()
        )));
    }
    let p = Problem::new(agg, &cfg, pairs)?;
    if p.trends.contains(&Trend::Auto) {
        return Err(Error::InvalidConfig(vec!["auto trend has no single objective".into()]));
    }
    let gain: f64 = (0..enc.x.len())
        .filter(|&i| enc.x[i])
        .map(|i| agg.gain(Interval::new(i - enc.z[i], i)))
        .sum();
    let ivs = enc.intervals();
    Ok(p.feasible(&ivs)
        .then(|| p.objective_from_score(p.score_from_gain(gain, &ivs))))
}

/// Heuristic solve: steepest ascent from the all-ones encoding (greedily
/// repaired), then from random encodings, keeping the best feasible
/// partition. Status is `Feasible` when one is found. Deterministic for a
/// fixed seed unless the time limit cuts the search.
pub fn ls_solve(
    agg: &AggregateSet,
    cfg: &BinningConfig,
    pairs: &PValuePairs,
    budget: LsBudget,
    seed: u64,
) -> Result<Solution> {
    let run = move |p: &Problem| search(p, budget, seed);
    Driver {
        search: &run,
        enumerate_t: false,
        presolve: false,
        status: Status::Feasible,
    }
    .run(agg, cfg, pairs)
}
