//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the run; if one of them starts passing, the run fails so the list gets
//! updated.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{objectives_match, rng, trend_for, within_ten_percent, Instance, TREND_NAMES};
use optbin::aggregate::{
    build_binary, build_continuous, build_multiclass, divergence_contrib, pvalue_pairs_for, woe,
    PValuePairs,
};
use optbin::config::{BinningConfig, Concentration, Divergence, Limits, TargetKind, Trend};
use optbin::localsearch::{decode, encode, ls_solve, LsBudget};
use optbin::quality::{c_star, iv_label, quality_score, rayleigh_factor, IvLabel};
use optbin::solution::{is_partition, Interval, Solution, Status, TargetStats};
use optbin::solver::{
    apply_pvalue_constraint, brute_force_oracle, check_trend, solve, solve_peak_valley,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Criterion ids expected to fail, with the reason printed next to them.
const KNOWN_FAILURES: &[(usize, &str)] = &[(
    4,
    "presolve can cut the optimum under bin-count bounds, size bounds or a concentration penalty",
)];

const PER_TREND: usize = 200;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, failures: &[String], checked: usize) -> Outcome {
    let detail = match failures.first() {
        None => format!("{checked} checks"),
        Some(first) => format!("{} of {checked} checks failed; first: {first}", failures.len()),
    };
    Outcome {
        id,
        name,
        pass: failures.is_empty(),
        detail,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn rayleigh_reference() -> Outcome {
    let c = c_star(0.3, 0.5);
    let expected = [
        (0.02, 0.083),
        (0.1, 0.404),
        (0.3, 0.938),
        (0.5, 0.938),
        (0.7, 0.610),
        (0.9, 0.282),
        (1.0, 0.171),
        (1.5, 0.005),
    ];
    let failures: Vec<String> = expected
        .iter()
        .filter(|&&(nu, f)| !close(rayleigh_factor(nu, c), f, 1e-3))
        .map(|&(nu, f)| format!("nu {nu}: {} vs {f}", rayleigh_factor(nu, c)))
        .collect();
    outcome(1, "Rayleigh factor table", &failures, expected.len())
}

/// Count, non-event, event, event rate, WoE, IV, JS.
const FICO_ROWS: [(u64, u64, u64, f64, f64, f64, f64); 12] = [
    (544, 99, 445, 0.818015, -1.41513, 0.087337, 0.010089),
    (1060, 286, 774, 0.730189, -0.907752, 0.076782, 0.009281),
    (528, 184, 344, 0.651515, -0.537878, 0.014101, 0.001742),
    (1099, 450, 649, 0.590537, -0.278357, 0.008041, 0.001002),
    (791, 369, 422, 0.533502, -0.046381, 0.000162, 0.000020),
    (536, 262, 274, 0.511194, 0.0430441, 0.000095, 0.000012),
    (912, 475, 437, 0.479167, 0.171209, 0.002559, 0.000320),
    (2009, 1141, 868, 0.432056, 0.361296, 0.025000, 0.003108),
    (848, 532, 316, 0.372642, 0.608729, 0.029532, 0.003636),
    (1084, 702, 382, 0.352399, 0.696341, 0.049039, 0.006009),
    (558, 252, 306, 0.548387, -0.106328, 0.000601, 0.000075),
    (490, 248, 242, 0.493878, 0.112319, 0.000592, 0.000074),
];

fn fico_row_arithmetic() -> Outcome {
    let ne_t: u64 = FICO_ROWS.iter().map(|r| r.1).sum();
    let e_t: u64 = FICO_ROWS.iter().map(|r| r.2).sum();
    let mut failures = Vec::new();
    if (ne_t, e_t) != (5000, 5459) {
        failures.push(format!("totals {ne_t}/{e_t}"));
    }
    let mut checked = 1;
    for (k, &(count, ne, e, rate, w, iv, js)) in FICO_ROWS.iter().enumerate() {
        let p = ne as f64 / ne_t as f64;
        let q = e as f64 / e_t as f64;
        let got = [
            ((ne + e) as f64, count as f64, 0.0),
            (e as f64 / count as f64, rate, 1e-4),
            (woe(ne, e, ne_t, e_t).unwrap(), w, 1e-4),
            (divergence_contrib(p, q, Divergence::Iv).unwrap(), iv, 1e-5),
            (divergence_contrib(p, q, Divergence::Jsd).unwrap(), js, 1e-5),
        ];
        for (col, (g, want, tol)) in got.into_iter().enumerate() {
            checked += 1;
            if !close(g, want, tol) {
                failures.push(format!("row {k} column {col}: {g} vs {want}"));
            }
        }
    }
    outcome(2, "binning table row arithmetic", &failures, checked)
}

/// Oracle instance with a constraint mix drawn from bin bounds, record
/// bounds, min_diff in {0, 0.01}, p-value bound in {off, 0.05} and each
/// concentration kind with gamma in {0, 0.1}.
fn oracle_instance(family: &str, r: &mut ChaCha8Rng) -> Instance {
    let n = r.random_range(3..=12);
    let trend = trend_for(family, n, r);
    let kind = r.random_range(0..10);
    let table = match kind {
        0..=6 => common::binary_table(n, r),
        7 | 8 => common::continuous_table(n, r),
        _ => common::multiclass_table(n, r.random_range(3..=4), r),
    };
    let binary = kind <= 6;
    let total = table.total_records();
    let mut cfg = BinningConfig {
        trend,
        ..Default::default()
    };
    match r.random_range(0..3) {
        0 => {}
        1 => cfg.min_bins = Some(r.random_range(1..=n.min(4))),
        _ => {
            let lo = r.random_range(1..=n.min(3));
            cfg.min_bins = Some(lo);
            cfg.max_bins = Some(r.random_range(lo..=n));
        }
    }
    match r.random_range(0..4) {
        0 => {}
        1 => cfg.min_bin_size = Some(0),
        2 => cfg.min_bin_size = Some(r.random_range(0..=total / 6)),
        _ => {
            cfg.min_bin_size = Some(0);
            cfg.max_bin_size = Some(r.random_range(total / 3..=total));
        }
    }
    if r.random_bool(0.5) {
        cfg.min_diff = 0.01;
    }
    if binary && r.random_bool(0.5) {
        cfg.max_pvalue = Some(0.05);
    }
    let gamma = if r.random_bool(0.5) { 0.1 } else { 0.0 };
    cfg.concentration = match r.random_range(0..4) {
        0 => Concentration::Off,
        1 => Concentration::Std(gamma),
        2 => Concentration::Hhi(gamma),
        _ => Concentration::MaxMinDiff(gamma),
    };
    let (agg, pairs) = match kind {
        0..=6 => {
            let agg = build_binary(&table, cfg.divergence).unwrap();
            let pairs = pvalue_pairs_for(&agg, cfg.max_pvalue);
            (agg, pairs)
        }
        7 | 8 => (build_continuous(&table, cfg.norm).unwrap(), PValuePairs::empty()),
        _ => {
            let classes = match &table.counts {
                optbin::preprocess::PrebinCounts::Multiclass { counts } => counts[0].len(),
                _ => unreachable!(),
            };
            let pool = [trend, Trend::None, Trend::Ascending, Trend::Descending];
            cfg.class_trends = (0..classes).map(|_| pool[r.random_range(0..pool.len())]).collect();
            (build_multiclass(&table, cfg.divergence).unwrap(), PValuePairs::empty())
        }
    };
    Instance { agg, cfg, pairs }
}

struct Solved {
    family: &'static str,
    inst: Instance,
    exact: Solution,
}

fn same_result(a: &Solution, b: &Solution) -> bool {
    a.status == b.status
        && (a.status == Status::Infeasible || objectives_match(a.objective, b.objective))
}

fn oracle_equivalence(instances: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    for s in instances {
        let oracle = brute_force_oracle(&s.inst.agg, &s.inst.cfg, &s.inst.pairs).unwrap();
        if !same_result(&s.exact, &oracle) {
            failures.push(format!(
                "{}: {:?} {} vs oracle {:?} {}",
                s.family, s.exact.status, s.exact.objective, oracle.status, oracle.objective
            ));
        }
    }
    outcome(3, "exact solver matches brute force", &failures, instances.len())
}

fn presolve_soundness(instances: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    for s in instances {
        let cfg = BinningConfig {
            presolve: true,
            ..s.inst.cfg.clone()
        };
        let masked = solve(&s.inst.agg, &cfg, &s.inst.pairs).unwrap();
        if !same_result(&s.exact, &masked) {
            failures.push(format!(
                "{}: {:?} {} vs presolved {:?} {}",
                s.family, s.exact.status, s.exact.objective, masked.status, masked.objective
            ));
        }
    }
    outcome(4, "presolve keeps the optimum", &failures, instances.len())
}

fn peak_valley_equivalence(instances: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for s in instances {
        if matches!(s.inst.agg.target_kind(), TargetKind::Multiclass(_)) {
            continue;
        }
        for trend in [Trend::Peak, Trend::Valley] {
            let cfg = BinningConfig {
                trend,
                ..s.inst.cfg.clone()
            };
            let got = solve_peak_valley(&s.inst.agg, &cfg, &s.inst.pairs).unwrap();
            let want = brute_force_oracle(&s.inst.agg, &cfg, &s.inst.pairs).unwrap();
            checked += 1;
            let same = same_result(&got, &want)
                && (got.status == Status::Infeasible || got.intervals == want.intervals);
            if !same {
                failures.push(format!(
                    "{}: {:?} {:?} vs oracle {:?} {:?}",
                    trend.name(),
                    got.status,
                    got.intervals,
                    want.status,
                    want.intervals
                ));
            }
        }
    }
    outcome(5, "free change point matches brute force", &failures, checked)
}

/// Trend as seen on the bins: fixed change points move from pre-bin to
/// bin position.
fn bin_trend(trend: Trend, ivs: &[Interval]) -> Trend {
    let pos = |t: usize| ivs.iter().position(|iv| iv.contains(t)).unwrap();
    match trend {
        Trend::PeakFixed(t) => Trend::PeakFixed(pos(t)),
        Trend::ValleyFixed(t) => Trend::ValleyFixed(pos(t)),
        other => other,
    }
}

fn postcheck(s: &Solved) -> Result<(), String> {
    let sol = &s.exact;
    let agg = &s.inst.agg;
    let cfg = &s.inst.cfg;
    let n = agg.n();
    let kind = agg.target_kind();
    if kind != TargetKind::Continuous && agg.gain(Interval::new(0, n - 1)) != 0.0 {
        return Err(format!("full merge gain {}", agg.gain(Interval::new(0, n - 1))));
    }
    if sol.status == Status::Infeasible {
        return Ok(());
    }
    let ivs = &sol.intervals;
    if !is_partition(ivs, n) {
        return Err(format!("not a partition: {ivs:?}"));
    }
    if !apply_pvalue_constraint(ivs, &s.inst.pairs) {
        return Err("p-value pair merged into adjacent bins".into());
    }
    let lim = Limits::resolve(cfg, kind, n, agg.total_records());
    let m = ivs.len();
    if m < lim.min_bins || m > lim.max_bins {
        return Err(format!("{m} bins outside [{}, {}]", lim.min_bins, lim.max_bins));
    }
    for b in &sol.bins {
        if b.count < lim.min_size || b.count > lim.max_size {
            return Err(format!("bin size {} outside bounds", b.count));
        }
        if let TargetStats::Binary { nonevent, event, .. } = b.target {
            if nonevent < lim.min_nonevent
                || nonevent > lim.max_nonevent
                || event < lim.min_event
                || event > lim.max_event
            {
                return Err(format!("bin counts {nonevent}/{event} outside bounds"));
            }
        }
    }
    let series: Vec<(Vec<f64>, Trend)> = match kind {
        TargetKind::Multiclass(c) => (0..c)
            .map(|k| {
                let rates = sol
                    .bins
                    .iter()
                    .map(|b| match &b.target {
                        TargetStats::Multiclass { event_rates, .. } => event_rates[k],
                        _ => unreachable!(),
                    })
                    .collect();
                (rates, sol.class_trends[k])
            })
            .collect(),
        _ => vec![(
            sol.bins
                .iter()
                .map(|b| b.event_rate().or(b.mean()).unwrap())
                .collect(),
            sol.trend,
        )],
    };
    for (rates, trend) in series {
        if !check_trend(&rates, bin_trend(trend, ivs), cfg.min_diff) {
            return Err(format!("{} violated by {rates:?}", trend.name()));
        }
    }
    if m == 1 && kind != TargetKind::Continuous {
        let gain: f64 = sol
            .bins
            .iter()
            .map(|b| match &b.target {
                TargetStats::Binary { iv, js, .. } => {
                    if cfg.divergence == Divergence::Iv {
                        *iv
                    } else {
                        *js
                    }
                }
                TargetStats::Multiclass { divergence, .. } => divergence.iter().sum(),
                TargetStats::Continuous { .. } => 0.0,
            })
            .sum();
        if gain != 0.0 {
            return Err(format!("single bin scores {gain}"));
        }
    }
    Ok(())
}

fn feasibility_postcheck(instances: &[Solved]) -> Outcome {
    let failures: Vec<String> = instances
        .iter()
        .filter_map(|s| postcheck(s).err().map(|e| format!("{}: {e}", s.family)))
        .collect();
    outcome(6, "returned solutions pass the postcheck", &failures, instances.len())
}

fn local_search(instances: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut good = 0;
    for (k, s) in instances.iter().enumerate() {
        let ls = ls_solve(
            &s.inst.agg,
            &s.inst.cfg,
            &s.inst.pairs,
            LsBudget::with_time(Duration::from_secs(1)),
            k as u64,
        )
        .unwrap();
        let ok = match (s.exact.status, ls.status) {
            (Status::Infeasible, Status::Infeasible) => true,
            (Status::Optimal, Status::Feasible) => within_ten_percent(
                s.inst.agg.target_kind(),
                ls.objective,
                s.exact.objective,
            ),
            _ => false,
        };
        good += usize::from(ok);
    }
    if good * 100 < 95 * instances.len() {
        failures.push(format!("within 10% on {good} of {}", instances.len()));
    }
    let mut r = rng(7);
    let trips = 10_000;
    for _ in 0..trips {
        let n = r.random_range(1..=40);
        let mut x: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
        x[n - 1] = true;
        let back = encode(&decode(&x).unwrap().intervals(), n);
        if back != x {
            failures.push(format!("round trip changed {x:?}"));
        }
    }
    let mut o = outcome(7, "local search quality and encoding", &failures, instances.len() + trips);
    if o.pass {
        o.detail = format!("{good} of {} within 10%, {trips} round trips", instances.len());
    }
    o
}

fn quality_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut r = rng(8);
    let c = c_star(0.3, 0.5);
    let cases = 10_000;
    for _ in 0..cases {
        let k = r.random_range(1..=10);
        let nu = r.random_range(0.0..3.0);
        let mut p: Vec<f64> = (0..k - 1).map(|_| r.random_range(0.0..1.0)).collect();
        let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let sizes: Vec<f64> = raw.iter().map(|s| s / sum).collect();
        let q = quality_score(nu, &p, &sizes);
        if !(0.0..=1.0).contains(&q) {
            failures.push(format!("Q = {q} at nu {nu}"));
        }
        if !p.is_empty() {
            let i = r.random_range(0..p.len());
            p[i] = r.random_range(p[i]..=1.0);
            let q2 = quality_score(nu, &p, &sizes);
            if q2 > q {
                failures.push(format!("Q rose from {q} to {q2} with a larger p-value"));
            }
        }
    }
    let third = 1.0 / 3.0;
    let top = quality_score(c, &[0.0, 0.0], &[third; 3]);
    if !close(top, 1.0, 1e-12) {
        failures.push(format!("Q at the optimum is {top}"));
    }
    let labels = [
        (0.019999, IvLabel::NotUseful),
        (0.02, IvLabel::Weak),
        (0.099999, IvLabel::Weak),
        (0.1, IvLabel::Medium),
        (0.3, IvLabel::Strong),
        (0.499999, IvLabel::Strong),
        (0.5, IvLabel::OverPrediction),
    ];
    for (nu, want) in labels {
        if iv_label(nu) != want {
            failures.push(format!("label of {nu} is {}", iv_label(nu)));
        }
    }
    outcome(8, "quality score properties", &failures, cases + 1 + labels.len())
}

fn write_synthetic_csv(path: &std::path::Path) {
    let mut r = rng(2024);
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["score", "default"]).unwrap();
    for _ in 0..10_000 {
        let x: f64 = r.random_range(0.0..150.0);
        let u: f64 = r.random_range(0.0..1.0);
        let cell = if u < 0.04 {
            "-9".to_string()
        } else if u < 0.06 {
            String::new()
        } else {
            format!("{x:.3}")
        };
        let y = u8::from(r.random_bool((0.85 - 0.005 * x).clamp(0.05, 0.95)));
        w.write_record([cell, y.to_string()]).unwrap();
    }
    w.flush().unwrap();
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write_synthetic_csv(&data);
    let mut failures = Vec::new();
    let mut models = Vec::new();
    for run in 0..3 {
        let model = dir.path().join(format!("model{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_optbin"))
            .args(["fit", "--data"])
            .arg(&data)
            .args(["--variable", "score", "--target", "default", "--trend", "descending"])
            .args(["--special-values", "-9", "--model"])
            .arg(&model)
            .output()
            .unwrap();
        if !status.status.success() {
            failures.push(format!(
                "run {run} exited with {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ));
            continue;
        }
        models.push(std::fs::read(&model).unwrap());
    }
    if models.windows(2).any(|w| w[0] != w[1]) {
        failures.push("model files differ between runs".into());
    }
    outcome(9, "fit writes byte-identical models", &failures, 3)
}

fn main() {
    let start = Instant::now();
    let mut outcomes = vec![rayleigh_reference(), fico_row_arithmetic()];

    let mut r = rng(20240601);
    let mut instances = Vec::new();
    for family in TREND_NAMES {
        for _ in 0..PER_TREND {
            let inst = oracle_instance(family, &mut r);
            let exact = solve(&inst.agg, &inst.cfg, &inst.pairs).unwrap();
            instances.push(Solved {
                family,
                inst,
                exact,
            });
        }
    }
    let c3 = Instant::now();
    outcomes.push(oracle_equivalence(&instances));
    let c3_time = c3.elapsed();
    outcomes.push(presolve_soundness(&instances));
    outcomes.push(peak_valley_equivalence(&instances));
    outcomes.push(feasibility_postcheck(&instances));
    outcomes.push(local_search(&instances));
    outcomes.push(quality_properties());
    outcomes.push(end_to_end_determinism());
    if c3_time > Duration::from_secs(300) {
        let o = &mut outcomes[2];
        o.pass = false;
        o.detail = format!("took {c3_time:?}, over five minutes");
    }

    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == o.id);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {} ({})", o.id, o.name, o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("    known failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("    listed as a known failure but passed; update KNOWN_FAILURES");
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s ({} oracle instances)",
        outcomes.iter().filter(|o| o.pass).count(),
        outcomes.len(),
        start.elapsed().as_secs_f64(),
        instances.len()
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
