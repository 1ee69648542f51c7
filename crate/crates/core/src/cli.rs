//! Command-line front end: fit, transform and report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{BinningConfig, Concentration, Divergence, TargetKind, Trend};
use crate::error::{Error, Result};
use crate::localsearch::LsBudget;
use crate::model::{fit, BinRecord, BinningModel, SolverChoice, TransformMode};
use crate::preprocess::{Cell, RawColumn, TargetValues};
use crate::solution::TargetStats;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "optbin", version, about = "Optimal binning of a single variable")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a binning and print its table.
    Fit(FitArgs),
    /// Map a column of a CSV file through a saved model.
    Transform(TransformArgs),
    /// Print the quality report of a saved binary-target model.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Binary,
    Continuous,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConcentrationArg {
    Off,
    Std,
    Hhi,
    MaxMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceArg {
    Iv,
    Js,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Ls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Woe,
    Mean,
    Index,
}

impl From<ModeArg> for TransformMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Woe => TransformMode::Woe,
            ModeArg::Mean => TransformMode::Mean,
            ModeArg::Index => TransformMode::Index,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub variable: String,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value = "binary")]
    pub target_kind: KindArg,
    /// none, ascending, descending, concave, convex, peak, valley,
    /// peak:T, valley:T or auto.
    #[arg(long, default_value = "auto")]
    pub trend: String,
    #[arg(long)]
    pub min_bins: Option<usize>,
    #[arg(long)]
    pub max_bins: Option<usize>,
    #[arg(long)]
    pub min_bin_size: Option<u64>,
    #[arg(long)]
    pub max_bin_size: Option<u64>,
    #[arg(long)]
    pub max_pvalue: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub min_diff: f64,
    #[arg(long, value_enum, default_value = "off")]
    pub concentration: ConcentrationArg,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "iv")]
    pub divergence: DivergenceArg,
    /// Comma-separated values binned apart from the rest.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub special_values: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub others_cutoff: f64,
    #[arg(long, default_value_t = 20)]
    pub prebins: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: SolverArg,
    /// Seconds given to the local search.
    #[arg(long, default_value_t = 1.0)]
    pub time_budget: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the fitted model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long, default_value = "")]
    pub missing_token: String,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Column to transform; defaults to the model's variable.
    #[arg(long)]
    pub variable: Option<String>,
    #[arg(long, value_enum, default_value = "woe")]
    pub mode: ModeArg,
    #[arg(long, default_value = "")]
    pub missing_token: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

/// Runs the parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Transform(a) => cmd_transform(&a, out),
        Command::Report(a) => cmd_report(&a, out),
    }
}

/// Header plus the requested columns of a CSV file, as raw strings.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Input(format!("{} has no header row", path.display())));
    }
    let idx = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h.trim() == *n)
                .ok_or_else(|| Error::Input(format!("column {n:?} not found in header")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in reader.records() {
        let rec = rec?;
        for (col, &i) in cols.iter_mut().zip(&idx) {
            col.push(rec.get(i).unwrap_or("").to_string());
        }
    }
    if cols[0].is_empty() {
        return Err(Error::Input(format!("{} has no data rows", path.display())));
    }
    Ok(cols)
}

fn is_missing(raw: &str, token: &str) -> bool {
    let t = raw.trim();
    t.is_empty() || t == token
}

/// Numeric cells when every non-missing entry parses as a number,
/// otherwise labels.
pub fn parse_cells(raw: &[String], missing_token: &str) -> Vec<Cell> {
    let numeric = raw
        .iter()
        .filter(|r| !is_missing(r, missing_token))
        .all(|r| r.trim().parse::<f64>().is_ok());
    raw.iter()
        .map(|r| {
            if is_missing(r, missing_token) {
                Cell::Missing
            } else if numeric {
                Cell::Number(r.trim().parse().unwrap())
            } else {
                Cell::Label(r.trim().to_string())
            }
        })
        .collect()
}

fn parse_special(raw: &[String]) -> Vec<Cell> {
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(v) => Cell::Number(v),
            Err(_) => Cell::Label(s.to_string()),
        })
        .collect()
}

/// Target column and, for multiclass targets, the sorted class labels.
pub fn parse_target(raw: &[String], kind: KindArg) -> Result<(TargetValues, Vec<String>)> {
    let bad = |row: usize, v: &str| Error::Input(format!("row {}: bad target value {v:?}", row + 1));
    match kind {
        KindArg::Binary => {
            let t = raw
                .iter()
                .enumerate()
                .map(|(i, v)| match v.trim().parse::<f64>() {
                    Ok(0.0) => Ok(0u8),
                    Ok(1.0) => Ok(1u8),
                    _ => Err(bad(i, v)),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((TargetValues::Binary(t), Vec::new()))
        }
        KindArg::Continuous => {
            let t = raw
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(i, v))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((TargetValues::Continuous(t), Vec::new()))
        }
        KindArg::Multiclass => {
            let mut classes = BTreeMap::new();
            for (i, v) in raw.iter().enumerate() {
                if v.trim().is_empty() {
                    return Err(bad(i, v));
                }
                classes.entry(v.trim().to_string()).or_insert(0usize);
            }
            for (k, idx) in classes.values_mut().enumerate() {
                *idx = k;
            }
            let labels = raw.iter().map(|v| classes[v.trim()]).collect();
            let names = classes.into_keys().collect::<Vec<_>>();
            Ok((
                TargetValues::Multiclass {
                    labels,
                    classes: names.len(),
                },
                names,
            ))
        }
    }
}

/// Binning config assembled from the fit flags.
pub fn config_from_args(a: &FitArgs) -> Result<BinningConfig> {
    let trend: Trend = a.trend.parse()?;
    let concentration = match a.concentration {
        ConcentrationArg::Off => Concentration::Off,
        ConcentrationArg::Std => Concentration::Std(a.gamma),
        ConcentrationArg::Hhi => Concentration::Hhi(a.gamma),
        ConcentrationArg::MaxMin => Concentration::MaxMinDiff(a.gamma),
    };
    Ok(BinningConfig {
        min_bins: a.min_bins,
        max_bins: a.max_bins,
        min_bin_size: a.min_bin_size,
        max_bin_size: a.max_bin_size,
        max_pvalue: a.max_pvalue,
        min_diff: a.min_diff,
        concentration,
        divergence: match a.divergence {
            DivergenceArg::Iv => Divergence::Iv,
            DivergenceArg::Js => Divergence::Jsd,
        },
        special_values: parse_special(&a.special_values),
        cat_others_cutoff: a.others_cutoff,
        prebin_count: a.prebins,
        trend: if a.target_kind == KindArg::Multiclass {
            Trend::None
        } else {
            trend
        },
        ..Default::default()
    })
}

/// Reads the CSV, fits the binning and returns the model.
pub fn fit_from_args(a: &FitArgs) -> Result<BinningModel> {
    let cols = read_columns(&a.data, &[&a.variable, &a.target])?;
    let values = parse_cells(&cols[0], &a.missing_token);
    let (target, class_labels) = parse_target(&cols[1], a.target_kind)?;
    let mut cfg = config_from_args(a)?;
    if let TargetValues::Multiclass { classes, .. } = &target {
        let trend: Trend = a.trend.parse()?;
        cfg.class_trends = vec![trend; *classes];
    }
    let col = RawColumn::new(values, target)?;
    let solver = match a.solver {
        SolverArg::Exact => SolverChoice::Exact,
        SolverArg::Ls => {
            if !(a.time_budget.is_finite() && a.time_budget > 0.0) {
                return Err(Error::Input("time budget must be positive".into()));
            }
            SolverChoice::LocalSearch {
                budget: LsBudget::with_time(Duration::from_secs_f64(a.time_budget)),
                seed: a.seed,
            }
        }
    };
    let mut model = fit(&a.variable, &col, &cfg, solver)?.model;
    model.class_labels = class_labels;
    Ok(model)
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let model = fit_from_args(a)?;
    if let Some(path) = &a.model {
        model.save(path)?;
    }
    match a.format {
        Format::Table => out.write_all(render_table(&model).as_bytes())?,
        Format::Json => writeln!(out, "{}", model.to_json()?)?,
    }
    Ok(())
}

fn cmd_transform(a: &TransformArgs, out: &mut dyn Write) -> Result<()> {
    let model = BinningModel::load(&a.model)?;
    let name = a.variable.clone().unwrap_or_else(|| model.variable.clone());
    let cols = read_columns(&a.data, &[&name])?;
    let mode = TransformMode::from(a.mode);
    let mut w = csv::Writer::from_writer(out);
    w.write_record([format!("{name}_{}", mode_name(mode))])?;
    for raw in &cols[0] {
        let cell = if is_missing(raw, &a.missing_token) {
            Cell::Missing
        } else {
            match raw.trim().parse::<f64>() {
                Ok(v) => Cell::Number(v),
                Err(_) => Cell::Label(raw.trim().to_string()),
            }
        };
        let v = model.transform_one(&cell, mode)?;
        w.write_record([format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

fn mode_name(m: TransformMode) -> &'static str {
    match m {
        TransformMode::Woe => "woe",
        TransformMode::Mean => "mean",
        TransformMode::Index => "index",
    }
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let model = BinningModel::load(&a.model)?;
    let q = model.quality.as_ref().ok_or_else(|| {
        Error::Unsupported("quality report needs a binary-target model".into())
    })?;
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(q)?)?,
        Format::Table => {
            let pv = q
                .adjacent_pvalues
                .iter()
                .map(|p| format!("{p:.6}"))
                .collect::<Vec<_>>()
                .join(", ");
            let sizes = q
                .bin_sizes
                .iter()
                .map(|s| format!("{s:.6}"))
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(out, "variable          {}", model.variable)?;
            writeln!(out, "bins              {}", model.bins.len())?;
            writeln!(out, "IV                {:.6}", q.iv)?;
            writeln!(out, "IV label          {}", q.iv_label)?;
            writeln!(out, "p-values          [{pv}]")?;
            writeln!(out, "bin sizes         [{sizes}]")?;
            writeln!(out, "Rayleigh factor   {:.6}", q.rayleigh_factor)?;
            writeln!(out, "HHI (normalized)  {:.6}", q.hhi_normalized)?;
            writeln!(out, "quality score     {:.6}", q.score)?;
        }
    }
    Ok(())
}

fn row(rec: &BinRecord, total: u64) -> Vec<String> {
    let pct = if total == 0 {
        0.0
    } else {
        rec.stats.count as f64 / total as f64
    };
    let mut cells = vec![
        rec.label.clone(),
        rec.stats.count.to_string(),
        format!("{pct:.6}"),
    ];
    match &rec.stats.target {
        TargetStats::Binary {
            nonevent,
            event,
            event_rate,
            woe,
            iv,
            js,
        } => cells.extend([
            nonevent.to_string(),
            event.to_string(),
            format!("{event_rate:.6}"),
            format!("{woe:.6}"),
            format!("{iv:.6}"),
            format!("{js:.6}"),
        ]),
        TargetStats::Continuous { sum, mean } => {
            cells.extend([format!("{sum:.6}"), format!("{mean:.6}")])
        }
        TargetStats::Multiclass {
            counts,
            event_rates,
            ..
        } => {
            cells.extend(counts.iter().map(u64::to_string));
            cells.extend(event_rates.iter().map(|r| format!("{r:.6}")));
        }
    }
    cells
}

/// Fixed-width binning table: optimized bins, then Others, Special and
/// Missing rows.
pub fn render_table(model: &BinningModel) -> String {
    let mut header: Vec<String> = ["Bin", "Count", "Count (%)"].map(String::from).to_vec();
    match model.target_kind {
        TargetKind::Binary => header.extend(
            ["Non-event", "Event", "Event rate", "WoE", "IV", "JS"].map(String::from),
        ),
        TargetKind::Continuous => header.extend(["Sum", "Mean"].map(String::from)),
        TargetKind::Multiclass(c) => {
            let name = |k: usize| model.class_labels.get(k).cloned().unwrap_or(k.to_string());
            header.extend((0..c).map(|k| format!("Count {}", name(k))));
            header.extend((0..c).map(|k| format!("Rate {}", name(k))));
        }
    }
    let records = model.records();
    let total: u64 = records.iter().map(|r| r.stats.count).sum();
    let rows: Vec<Vec<String>> = records.iter().map(|r| row(r, total)).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap()
        })
        .collect();
    let mut s = String::new();
    let line = |s: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut s, &header);
    let rule = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let _ = writeln!(s, "{}", "-".repeat(rule));
    for r in &rows {
        line(&mut s, r);
    }
    let _ = writeln!(s, "{}", "-".repeat(rule));
    let _ = write!(s, "trend {}  status {:?}", model.trend.name(), model.status);
    if let Some(q) = &model.quality {
        let _ = write!(s, "  IV {:.6} ({})  quality {:.6}", q.iv, q.iv_label, q.score);
    }
    s.push('\n');
    s
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
