//! Random problem instances shared by the integration tests.
#![allow(dead_code)]

use optbin::aggregate::{
    build_binary, build_continuous, build_multiclass, pvalue_pairs_for, AggregateSet, PValuePairs,
};
use optbin::config::{BinningConfig, Concentration, Divergence, Norm, TargetKind, Trend};
use optbin::preprocess::PrebinTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub agg: AggregateSet,
    pub cfg: BinningConfig,
    pub pairs: PValuePairs,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every trend family, with fixed change points drawn per instance.
pub const TREND_NAMES: [&str; 10] = [
    "none",
    "ascending",
    "descending",
    "concave",
    "convex",
    "peak",
    "valley",
    "peak_fixed",
    "valley_fixed",
    "auto",
];

pub fn trend_for(name: &str, n: usize, rng: &mut ChaCha8Rng) -> Trend {
    match name {
        "none" => Trend::None,
        "ascending" => Trend::Ascending,
        "descending" => Trend::Descending,
        "concave" => Trend::Concave,
        "convex" => Trend::Convex,
        "peak" => Trend::Peak,
        "valley" => Trend::Valley,
        "peak_fixed" => Trend::PeakFixed(rng.random_range(0..n)),
        "valley_fixed" => Trend::ValleyFixed(rng.random_range(0..n)),
        _ => Trend::Auto,
    }
}

/// Pre-bin counts with a random underlying rate profile so that every
/// trend family has a fair share of non-trivial feasible sets.
pub fn binary_table(n: usize, rng: &mut ChaCha8Rng) -> PrebinTable {
    let mut ne = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random_range(5..200u64);
        let rate: f64 = rng.random_range(0.02..0.6);
        let ev = ((r as f64 * rate).round() as u64).clamp(1, r - 1);
        ne.push(r - ev);
        e.push(ev);
    }
    PrebinTable::binary(ne, e)
}

pub fn continuous_table(n: usize, rng: &mut ChaCha8Rng) -> PrebinTable {
    let mut records = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random_range(1..150u64);
        let mean: f64 = rng.random_range(-5.0..20.0);
        records.push(r);
        sums.push(mean * r as f64);
    }
    PrebinTable::continuous(records, sums)
}

pub fn multiclass_table(n: usize, classes: usize, rng: &mut ChaCha8Rng) -> PrebinTable {
    let counts = (0..n)
        .map(|_| (0..classes).map(|_| rng.random_range(1..80u64)).collect())
        .collect();
    PrebinTable::multiclass(counts)
}

/// Random constraint mix: bin-count bounds, size bounds, min_diff,
/// concentration penalty and, for binary targets, p-value pairs.
pub fn random_config(n: usize, total: u64, binary: bool, rng: &mut ChaCha8Rng) -> BinningConfig {
    let mut cfg = BinningConfig {
        min_bin_size: Some(0),
        ..Default::default()
    };
    if rng.random_bool(0.5) {
        cfg.min_bins = Some(rng.random_range(1..=n.min(4)));
    } else {
        cfg.min_bins = Some(1);
    }
    if rng.random_bool(0.4) {
        cfg.max_bins = Some(rng.random_range(cfg.min_bins.unwrap()..=n));
    }
    if rng.random_bool(0.4) {
        cfg.min_bin_size = Some(rng.random_range(0..=total / 6));
    }
    if rng.random_bool(0.2) {
        cfg.max_bin_size = Some(rng.random_range(total / 3..=total));
    }
    if binary && rng.random_bool(0.2) {
        cfg.min_event = Some(rng.random_range(0..10));
    }
    if binary && rng.random_bool(0.1) {
        cfg.max_nonevent = Some(rng.random_range(total / 3..=total));
    }
    if rng.random_bool(0.3) {
        cfg.min_diff = if binary {
            rng.random_range(0.0..0.05)
        } else {
            rng.random_range(0.0..2.0)
        };
    }
    cfg.concentration = match rng.random_range(0..6) {
        0 => Concentration::Std(rng.random_range(0.0..0.002)),
        1 => Concentration::Hhi(rng.random_range(0.0..0.5)),
        2 => Concentration::MaxMinDiff(rng.random_range(0.0..0.002)),
        _ => Concentration::Off,
    };
    if binary && rng.random_bool(0.3) {
        cfg.max_pvalue = Some(rng.random_range(0.01..0.5));
    }
    if rng.random_bool(0.3) {
        cfg.divergence = Divergence::Jsd;
    }
    if rng.random_bool(0.3) {
        cfg.norm = Norm::L1;
    }
    cfg
}

pub fn binary_instance(n: usize, trend: Trend, rng: &mut ChaCha8Rng) -> Instance {
    let table = binary_table(n, rng);
    let mut cfg = random_config(n, table.total_records(), true, rng);
    cfg.trend = trend;
    let agg = build_binary(&table, cfg.divergence).unwrap();
    let pairs = pvalue_pairs_for(&agg, cfg.max_pvalue);
    Instance { agg, cfg, pairs }
}

pub fn continuous_instance(n: usize, trend: Trend, rng: &mut ChaCha8Rng) -> Instance {
    let table = continuous_table(n, rng);
    let mut cfg = random_config(n, table.total_records(), false, rng);
    cfg.trend = trend;
    let agg = build_continuous(&table, cfg.norm).unwrap();
    Instance {
        agg,
        cfg,
        pairs: PValuePairs::empty(),
    }
}

pub fn multiclass_instance(n: usize, trend_pool: &[Trend], rng: &mut ChaCha8Rng) -> Instance {
    let classes = rng.random_range(3..=4);
    let table = multiclass_table(n, classes, rng);
    let mut cfg = random_config(n, table.total_records(), false, rng);
    cfg.class_trends = (0..classes)
        .map(|_| trend_pool[rng.random_range(0..trend_pool.len())])
        .collect();
    let agg = build_multiclass(&table, cfg.divergence).unwrap();
    Instance {
        agg,
        cfg,
        pairs: PValuePairs::empty(),
    }
}

/// Instance of the given trend family with a random target kind; binary
/// dominates since it carries the full constraint set.
pub fn any_instance(name: &str, rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(3..=12);
    let trend = trend_for(name, n, rng);
    match rng.random_range(0..10) {
        0..=6 => binary_instance(n, trend, rng),
        7 | 8 => continuous_instance(n, trend, rng),
        _ => {
            let pool = [trend, Trend::None, Trend::Ascending, Trend::Descending];
            multiclass_instance(n, &pool, rng)
        }
    }
}

pub fn objectives_match(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Whether `ls` is within 10% of `|exact|` of the optimum, in the direction
/// of the objective. Matches `ls >= 0.9 * exact` for non-negative maxima.
pub fn within_ten_percent(kind: TargetKind, ls: f64, exact: f64) -> bool {
    let slack = 0.1 * exact.abs() + 1e-12;
    match kind {
        TargetKind::Continuous => ls <= exact + slack,
        _ => ls >= exact - slack,
    }
}
