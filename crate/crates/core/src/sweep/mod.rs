//! Parameter sweeps, CSV output, the analytic-versus-simulation report and
//! the embedded figure presets.

mod presets;
mod spec;
mod validate;

pub use presets::{preset, preset_names, PRESETS};
pub use spec::{
    Axis, Coupling, DbGrid, Engine, EngineKind, RunSpec, Spacing, SweepSpec, ValidationSpec,
    AXIS_KEYS, INTEGER_KEYS,
};
pub use validate::{validate, ValidationOptions, ValidationReport, ValidationRow};

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::Tier;
use crate::config::{build_config, ConfigError, ParamSet};
use crate::metrics::{self, MetricsError, PowerModel};
use crate::montecarlo::{McError, McOptions};
use crate::quadrature::QuadratureSpec;

/// Metric columns after the axis (and engine) columns.
pub const METRIC_COLUMNS: &[&str] = &[
    "asr_bps",
    "ee_bpj",
    "rate_cue_bps",
    "rate_d2d_bps",
    "beta_c_star",
    "beta_d_star",
    "flags",
];

/// Absolute analytic/simulation gap accepted by default.
pub fn default_tolerance(tier: Tier) -> f64 {
    match tier {
        Tier::D2d => 0.03,
        Tier::Cellular => 0.02,
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Simulation(#[from] McError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl SweepError {
    /// Spec and configuration problems, as opposed to run-time failures.
    pub fn is_spec_error(&self) -> bool {
        matches!(self, SweepError::Spec(_) | SweepError::Config(_))
    }
}

/// Execution settings shared by every cell.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Parameters under the spec's `[base]` table.
    pub base: ParamSet,
    pub workers: Option<usize>,
    pub fastpath_chisq: bool,
    /// Overrides the spec's `out`.
    pub out: Option<PathBuf>,
    pub quad: QuadratureSpec,
    /// Overrides the spec's seed and trial count when set.
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub engine: Option<Engine>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            base: ParamSet::defaults(),
            workers: None,
            fastpath_chisq: false,
            out: None,
            quad: QuadratureSpec::default(),
            seed: None,
            trials: None,
            engine: None,
        }
    }
}

/// Metrics of one evaluated cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub asr: f64,
    pub ee: f64,
    pub rate_cue: f64,
    pub rate_d2d: f64,
    pub beta_c_star: f64,
    pub beta_d_star: f64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    /// T_c when a coupling rule is active.
    pub coupled: Option<f64>,
    /// Present only for `engine = both`.
    pub engine: Option<EngineKind>,
    /// `None` when the cell failed; `flags` then carries `error=<code>`.
    pub metrics: Option<CellMetrics>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub axis_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows that carry an error code.
    pub fn failed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.metrics.is_none())
    }
}

fn header(spec: &SweepSpec, engine: Engine) -> Vec<String> {
    let mut cols = spec.axis_names();
    if let Some(c) = &spec.coupling {
        cols.push(c.coupled_param().into());
    }
    if engine == Engine::Both {
        cols.push("engine".into());
    }
    cols.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

/// 17 significant digits, so every value parses back exactly.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn format_param(name: &str, x: f64) -> String {
    if INTEGER_KEYS.contains(&name) {
        format!("{}", x as u64)
    } else {
        format_float(x)
    }
}

fn record(row: &SweepRow, names: &[String]) -> Vec<String> {
    let mut out: Vec<String> = row
        .axis_values
        .iter()
        .zip(names)
        .map(|(v, n)| format_param(n, *v))
        .collect();
    if let Some(t) = row.coupled {
        out.push(format_param("t_c", t));
    }
    if let Some(e) = row.engine {
        out.push(e.to_string());
    }
    let m = row.metrics;
    let pick = |f: fn(&CellMetrics) -> f64| format_float(m.as_ref().map(f).unwrap_or(f64::NAN));
    out.push(pick(|m| m.asr));
    out.push(pick(|m| m.ee));
    out.push(pick(|m| m.rate_cue));
    out.push(pick(|m| m.rate_d2d));
    out.push(pick(|m| m.beta_c_star));
    out.push(pick(|m| m.beta_d_star));
    out.push(row.flags.join(";"));
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `result` as CSV: header, then one line per row.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), SweepError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(result, file)?;
    Ok(())
}

pub fn write_csv<W: Write>(result: &SweepResult, sink: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&result.columns)?;
    for row in &result.rows {
        w.write_record(record(row, &result.axis_names))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn error_code(e: &MetricsError) -> &'static str {
    match e {
        MetricsError::UnboundedObjective { .. } => "unbounded_objective",
        MetricsError::Domain(_) => "domain",
        MetricsError::Coverage { .. } => "coverage",
        MetricsError::Config(_) => "config",
    }
}

struct Cell {
    axis_values: Vec<f64>,
    coupled: Option<f64>,
    params: Result<ParamSet, String>,
}

fn evaluate_cell(
    cell: &Cell,
    kind: EngineKind,
    show_engine: bool,
    mc: &McOptions,
    quad: &QuadratureSpec,
) -> SweepRow {
    let mut row = SweepRow {
        axis_values: cell.axis_values.clone(),
        coupled: cell.coupled,
        engine: show_engine.then_some(kind),
        metrics: None,
        flags: Vec::new(),
    };
    let params = match &cell.params {
        Ok(p) => p,
        Err(code) => {
            row.flags.push(format!("error={code}"));
            return row;
        }
    };
    let built = build_config(params).and_then(|cfg| Ok((cfg, PowerModel::from_params(params)?)));
    let (cfg, pm) = match built {
        Ok(x) => x,
        Err(_) => {
            row.flags.push("error=config".into());
            return row;
        }
    };
    let rates = match kind {
        EngineKind::Analytic => metrics::analytic_rates(&cfg, quad),
        EngineKind::Montecarlo => metrics::montecarlo_rates(&cfg, mc),
    };
    match rates.and_then(|r| metrics::operating_point(&cfg, &pm, r)) {
        Ok(op) => {
            row.flags.extend(op.rates.flags.iter().map(|s| s.to_string()));
            row.metrics = Some(CellMetrics {
                asr: op.asr,
                ee: op.ee,
                rate_cue: op.rates.cue.rate,
                rate_d2d: op.rates.d2d.rate,
                beta_c_star: op.rates.cue.best_beta,
                beta_d_star: op.rates.d2d.best_beta,
            });
        }
        Err(e) => row.flags.push(format!("error={}", error_code(&e))),
    }
    row
}

fn cells(spec: &SweepSpec, base: &ParamSet) -> Result<Vec<Cell>, SweepError> {
    let names = spec.axis_names();
    let base = base.overlay(&spec.base_params()?);
    let mut out = Vec::new();
    for point in spec.grid_points()? {
        let mut params = base.clone();
        for (name, v) in names.iter().zip(&point) {
            params.set_number(name, *v)?;
        }
        let mut coupled = None;
        let mut failure = None;
        if let Some(c) = &spec.coupling {
            let u = params.number("u_c")?;
            match c.apply(u) {
                Ok(t) => {
                    params.set_number(c.coupled_param(), t)?;
                    coupled = Some(t);
                }
                Err(_) => failure = Some("coupling".to_string()),
            }
        }
        out.push(Cell {
            axis_values: point,
            coupled,
            params: match failure {
                None => Ok(params),
                Some(code) => Err(code),
            },
        });
    }
    Ok(out)
}

/// Evaluates every grid point, writing CSV as chunks complete when an
/// output path is set. Cell failures are recorded in the `flags` column.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let engine = opts.engine.unwrap_or(spec.engine);
    let mut mc = McOptions::new(opts.trials.unwrap_or(spec.trials), opts.seed.unwrap_or(spec.seed));
    if engine.uses_montecarlo() && mc.trials == 0 {
        return Err(SweepError::Spec("trials must be >= 1".into()));
    }
    mc.fastpath_chisq = opts.fastpath_chisq;
    opts.quad.validate().map_err(SweepError::Spec)?;
    let cells = cells(spec, &opts.base)?;
    let jobs: Vec<(&Cell, EngineKind)> = cells
        .iter()
        .flat_map(|c| engine.kinds().iter().map(move |k| (c, *k)))
        .collect();
    let show_engine = engine == Engine::Both;
    let mut result = SweepResult {
        columns: header(spec, engine),
        axis_names: spec.axis_names(),
        rows: Vec::with_capacity(jobs.len()),
    };

    let out_path = opts.out.clone().or_else(|| spec.out.clone());
    let mut writer = match &out_path {
        Some(p) => {
            let file = File::create(p).map_err(io_err(p))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(&result.columns)?;
            w.flush().map_err(io_err(p))?;
            Some((w, p.clone()))
        }
        None => None,
    };
    let names = spec.axis_names();

    let pool = match opts.workers {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SweepError::Simulation(McError::Pool(e.to_string())))?,
        ),
        None => None,
    };
    let threads = pool
        .as_ref()
        .map_or_else(rayon::current_num_threads, |p| p.current_num_threads());
    let chunk = (2 * threads).max(1);
    for batch in jobs.chunks(chunk) {
        let eval = || {
            batch
                .par_iter()
                .map(|(cell, kind)| evaluate_cell(cell, *kind, show_engine, &mc, &opts.quad))
                .collect::<Vec<_>>()
        };
        let rows = match &pool {
            Some(p) => p.install(eval),
            None => eval(),
        };
        if let Some((w, p)) = writer.as_mut() {
            for row in &rows {
                w.write_record(record(row, &names))?;
            }
            w.flush().map_err(io_err(p))?;
        }
        result.rows.extend(rows);
    }
    Ok(result)
}
