//! Python bindings: the quality measures, a solver over pre-bin counts and
//! an `OptimalBinning` class wrapping the fit pipeline.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use optbin::aggregate::{build_binary, pvalue_pairs_for};
use optbin::cli::{parse_target, KindArg};
use optbin::model::{fit, BinningModel, SolverChoice, TransformMode};
use optbin::preprocess::{Cell, PrebinTable, RawColumn};
use optbin::{quality, solver, BinningConfig, Divergence, Error, Status, TargetStats, Trend};

create_exception!(pyoptbin, InfeasibleError, PyRuntimeError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Infeasible(msg) => InfeasibleError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A value of the binned column: number, label or None for missing.
#[derive(FromPyObject)]
enum PyCell {
    Num(f64),
    Str(String),
}

fn cell(v: Option<PyCell>) -> Cell {
    match v {
        None => Cell::Missing,
        Some(PyCell::Num(x)) => Cell::Number(x),
        Some(PyCell::Str(s)) => Cell::Label(s),
    }
}

fn divergence(kind: &str) -> PyResult<Divergence> {
    match kind {
        "iv" => Ok(Divergence::Iv),
        "js" | "jsd" => Ok(Divergence::Jsd),
        other => Err(PyValueError::new_err(format!("unknown divergence {other:?}"))),
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Feasible => "feasible",
        Status::Infeasible => "infeasible",
    }
}

#[pyfunction]
fn woe(nonevent: u64, event: u64, nonevent_total: u64, event_total: u64) -> PyResult<f64> {
    optbin::aggregate::woe(nonevent, event, nonevent_total, event_total).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, q, kind = "iv"))]
fn divergence_contrib(p: f64, q: f64, kind: &str) -> PyResult<f64> {
    optbin::aggregate::divergence_contrib(p, q, divergence(kind)?).map_err(to_py)
}

#[pyfunction]
fn rayleigh_factor(nu: f64, c: f64) -> f64 {
    quality::rayleigh_factor(nu, c)
}

#[pyfunction]
fn c_star(a: f64, b: f64) -> f64 {
    quality::c_star(a, b)
}

#[pyfunction]
fn quality_score(nu: f64, pvalues: Vec<f64>, sizes: Vec<f64>) -> f64 {
    quality::quality_score(nu, &pvalues, &sizes)
}

#[pyfunction]
fn iv_label(nu: f64) -> &'static str {
    quality::iv_label(nu).as_str()
}

/// Optimal binning of binary pre-bin counts. Returns the bins as inclusive
/// `(start, end)` pre-bin ranges, the objective and the status.
#[pyfunction]
#[pyo3(signature = (nonevent, event, trend = "auto", min_bins = None, max_bins = None,
                    min_bin_size = None, max_pvalue = None, min_diff = 0.0))]
#[allow(clippy::too_many_arguments)]
fn solve_counts(
    nonevent: Vec<u64>,
    event: Vec<u64>,
    trend: &str,
    min_bins: Option<usize>,
    max_bins: Option<usize>,
    min_bin_size: Option<u64>,
    max_pvalue: Option<f64>,
    min_diff: f64,
) -> PyResult<(Vec<(usize, usize)>, f64, &'static str)> {
    if nonevent.len() != event.len() || nonevent.is_empty() {
        return Err(PyValueError::new_err("count vectors must be non-empty and equally long"));
    }
    let cfg = BinningConfig {
        trend: trend.parse::<Trend>().map_err(to_py)?,
        min_bins,
        max_bins,
        min_bin_size,
        max_pvalue,
        min_diff,
        ..Default::default()
    };
    let agg = build_binary(&PrebinTable::binary(nonevent, event), cfg.divergence).map_err(to_py)?;
    let pairs = pvalue_pairs_for(&agg, cfg.max_pvalue);
    let sol = solver::solve(&agg, &cfg, &pairs).map_err(to_py)?;
    let ivs = sol.intervals.iter().map(|iv| (iv.start, iv.end)).collect();
    Ok((ivs, sol.objective, status_name(sol.status)))
}

/// Fit and apply an optimal binning of one variable.
#[pyclass(name = "OptimalBinning")]
struct PyOptimalBinning {
    cfg: BinningConfig,
    kind: KindArg,
    model: Option<BinningModel>,
}

impl PyOptimalBinning {
    fn fitted(&self) -> PyResult<&BinningModel> {
        self.model
            .as_ref()
            .ok_or_else(|| PyRuntimeError::new_err("call fit first"))
    }
}

#[pymethods]
impl PyOptimalBinning {
    #[new]
    #[pyo3(signature = (target_kind = "binary", trend = "auto", min_bins = None, max_bins = None,
                        min_bin_size = None, max_bin_size = None, max_pvalue = None,
                        min_diff = 0.0, special_values = None, others_cutoff = 0.0, prebins = 20))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        target_kind: &str,
        trend: &str,
        min_bins: Option<usize>,
        max_bins: Option<usize>,
        min_bin_size: Option<u64>,
        max_bin_size: Option<u64>,
        max_pvalue: Option<f64>,
        min_diff: f64,
        special_values: Option<Vec<PyCell>>,
        others_cutoff: f64,
        prebins: usize,
    ) -> PyResult<Self> {
        let kind = match target_kind {
            "binary" => KindArg::Binary,
            "continuous" => KindArg::Continuous,
            "multiclass" => KindArg::Multiclass,
            other => return Err(PyValueError::new_err(format!("unknown target kind {other:?}"))),
        };
        let trend: Trend = trend.parse().map_err(to_py)?;
        let cfg = BinningConfig {
            trend,
            min_bins,
            max_bins,
            min_bin_size,
            max_bin_size,
            max_pvalue,
            min_diff,
            special_values: special_values
                .unwrap_or_default()
                .into_iter()
                .map(|v| cell(Some(v)))
                .collect(),
            cat_others_cutoff: others_cutoff,
            prebin_count: prebins,
            ..Default::default()
        };
        Ok(Self {
            cfg,
            kind,
            model: None,
        })
    }

    /// Fits on column `x` against target `y`; returns self.
    #[pyo3(signature = (x, y, name = "x"))]
    fn fit<'py>(
        mut slf: PyRefMut<'py, Self>,
        x: Vec<Option<PyCell>>,
        y: Vec<PyCell>,
        name: &str,
    ) -> PyResult<PyRefMut<'py, Self>> {
        let raw: Vec<String> = y
            .into_iter()
            .map(|v| match v {
                PyCell::Num(n) => format!("{n}"),
                PyCell::Str(s) => s,
            })
            .collect();
        let (target, labels) = parse_target(&raw, slf.kind).map_err(to_py)?;
        let mut cfg = slf.cfg.clone();
        if let optbin::preprocess::TargetValues::Multiclass { classes, .. } = &target {
            cfg.class_trends = vec![cfg.trend; *classes];
            cfg.trend = Trend::None;
        }
        let col = RawColumn::new(x.into_iter().map(cell).collect(), target).map_err(to_py)?;
        let mut model = fit(name, &col, &cfg, SolverChoice::Exact).map_err(to_py)?.model;
        model.class_labels = labels;
        slf.model = Some(model);
        Ok(slf)
    }

    /// Maps values through the fitted bins; `mode` is woe, mean or index.
    #[pyo3(signature = (x, mode = "woe"))]
    fn transform(&self, x: Vec<Option<PyCell>>, mode: &str) -> PyResult<Vec<f64>> {
        let model = self.fitted()?;
        let mode: TransformMode = mode.parse().map_err(to_py)?;
        let cells: Vec<Cell> = x.into_iter().map(cell).collect();
        model.transform(&cells, mode).map_err(to_py)
    }

    #[getter]
    fn status(&self) -> PyResult<&'static str> {
        Ok(status_name(self.fitted()?.status))
    }

    #[getter]
    fn trend(&self) -> PyResult<String> {
        Ok(self.fitted()?.trend.name())
    }

    #[getter]
    fn splits(&self) -> PyResult<Option<Vec<f64>>> {
        Ok(match &self.fitted()?.layout {
            optbin::model::BinLayout::Numeric { splits } => Some(splits.clone()),
            optbin::model::BinLayout::Categorical { .. } => None,
        })
    }

    /// Bin labels and counts, including others, special and missing rows.
    #[getter]
    fn bins(&self) -> PyResult<Vec<(String, u64)>> {
        Ok(self
            .fitted()?
            .records()
            .iter()
            .map(|r| (r.label.clone(), r.stats.count))
            .collect())
    }

    /// WoE of every record for a binary target.
    #[getter]
    fn woe(&self) -> PyResult<Vec<f64>> {
        self.fitted()?
            .records()
            .iter()
            .map(|r| match r.stats.target {
                TargetStats::Binary { woe, .. } => Ok(woe),
                _ => Err(PyValueError::new_err("WoE needs a binary target")),
            })
            .collect()
    }

    #[getter]
    fn iv(&self) -> PyResult<Option<f64>> {
        Ok(self.fitted()?.total_iv())
    }

    #[getter]
    fn quality_score(&self) -> PyResult<Option<f64>> {
        Ok(self.fitted()?.quality.as_ref().map(|q| q.score))
    }

    fn to_json(&self) -> PyResult<String> {
        self.fitted()?.to_json().map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let model = BinningModel::from_json(text).map_err(to_py)?;
        let kind = match model.target_kind {
            optbin::TargetKind::Binary => KindArg::Binary,
            optbin::TargetKind::Continuous => KindArg::Continuous,
            optbin::TargetKind::Multiclass(_) => KindArg::Multiclass,
        };
        Ok(Self {
            cfg: model.config.clone(),
            kind,
            model: Some(model),
        })
    }
}

#[pymodule]
fn pyoptbin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(woe, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_contrib, m)?)?;
    m.add_function(wrap_pyfunction!(rayleigh_factor, m)?)?;
    m.add_function(wrap_pyfunction!(c_star, m)?)?;
    m.add_function(wrap_pyfunction!(quality_score, m)?)?;
    m.add_function(wrap_pyfunction!(iv_label, m)?)?;
    m.add_function(wrap_pyfunction!(solve_counts, m)?)?;
    m.add_class::<PyOptimalBinning>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}
