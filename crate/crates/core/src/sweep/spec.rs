use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SweepError;
use crate::analytic::Tier;
use crate::config::{ParamSet, ParamValue};

/// Parameters an axis may vary, in file units.
pub const AXIS_KEYS: &[&str] = &[
    "lambda_d", "u_c", "t_c", "p_d", "p_c", "r_00", "r", "b_w", "n_0", "f", "alpha_c", "alpha_d",
    "a_c", "a_d",
];

/// Axis parameters written as integers.
pub const INTEGER_KEYS: &[&str] = &["u_c", "t_c"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Analytic,
    #[serde(alias = "mc")]
    Montecarlo,
    Both,
}

impl Engine {
    pub fn kinds(self) -> &'static [EngineKind] {
        match self {
            Engine::Analytic => &[EngineKind::Analytic],
            Engine::Montecarlo => &[EngineKind::Montecarlo],
            Engine::Both => &[EngineKind::Analytic, EngineKind::Montecarlo],
        }
    }

    pub fn uses_montecarlo(self) -> bool {
        self != Engine::Analytic
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(Engine::Analytic),
            "mc" | "montecarlo" => Ok(Engine::Montecarlo),
            "both" => Ok(Engine::Both),
            other => Err(format!("unknown engine `{other}` (analytic, mc, both)")),
        }
    }
}

/// The engine that produced one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineKind {
    Analytic,
    Montecarlo,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Analytic => "analytic",
            EngineKind::Montecarlo => "montecarlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One swept parameter. Either `values` is given, or `start`/`stop` with
/// `points` (any spacing) or `points_per_decade` (log spacing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    #[serde(default)]
    pub spacing: Spacing,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub points_per_decade: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn values(param: &str, values: Vec<f64>) -> Self {
        Self {
            param: param.into(),
            spacing: Spacing::Linear,
            start: None,
            stop: None,
            points: None,
            points_per_decade: None,
            values: Some(values),
        }
    }

    pub fn log_decades(param: &str, start: f64, stop: f64, points_per_decade: usize) -> Self {
        Self {
            param: param.into(),
            spacing: Spacing::Log,
            start: Some(start),
            stop: Some(stop),
            points: None,
            points_per_decade: Some(points_per_decade),
            values: None,
        }
    }

    pub fn linear(param: &str, start: f64, stop: f64, points: usize) -> Self {
        Self {
            param: param.into(),
            spacing: Spacing::Linear,
            start: Some(start),
            stop: Some(stop),
            points: Some(points),
            points_per_decade: None,
            values: None,
        }
    }

    /// The grid in sweep order.
    pub fn grid(&self) -> Result<Vec<f64>, SweepError> {
        let bad = |msg: String| SweepError::Spec(format!("axis `{}`: {msg}", self.param));
        if let Some(v) = &self.values {
            if self.start.is_some() || self.stop.is_some() || self.points.is_some() {
                return Err(bad("give either `values` or a start/stop range".into()));
            }
            if v.is_empty() {
                return Err(bad("empty value list".into()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(bad("non-finite value".into()));
            }
            return Ok(v.clone());
        }
        let (start, stop) = match (self.start, self.stop) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => (a, b),
            _ => return Err(bad("needs `values` or finite `start` and `stop`".into())),
        };
        let grid = match (self.spacing, self.points, self.points_per_decade) {
            (_, Some(_), Some(_)) => {
                return Err(bad("give `points` or `points_per_decade`, not both".into()))
            }
            (_, Some(0), None) => return Err(bad("empty grid (points = 0)".into())),
            (_, Some(1), None) => vec![start],
            (Spacing::Linear, Some(n), None) => (0..n)
                .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                .collect(),
            (Spacing::Log, pts, ppd) => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(bad("log spacing needs positive bounds".into()));
                }
                let (lo, hi) = (start.log10(), stop.log10());
                let n = match (pts, ppd) {
                    (Some(n), None) => n,
                    (None, Some(0)) => return Err(bad("empty grid (points_per_decade = 0)".into())),
                    (None, Some(d)) => ((hi - lo).abs() * d as f64).round() as usize + 1,
                    _ => return Err(bad("needs `points` or `points_per_decade`".into())),
                };
                if n == 1 {
                    vec![start]
                } else {
                    (0..n)
                        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
                        .collect()
                }
            }
            (Spacing::Linear, None, _) => {
                return Err(bad("linear spacing needs `points`".into()))
            }
        };
        Ok(grid)
    }
}

/// T_c tied to U_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    /// T_c = ratio · U_c.
    pub ratio: f64,
}

impl Coupling {
    pub fn coupled_param(&self) -> &'static str {
        "t_c"
    }

    pub fn apply(&self, u_c: f64) -> Result<f64, String> {
        let t = self.ratio * u_c;
        if (t - t.round()).abs() > 1e-9 {
            return Err(format!("ratio {} times u_c = {u_c} is not an integer", self.ratio));
        }
        Ok(t.round())
    }
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> usize {
    5000
}

/// A parameter grid to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Parameter overrides on top of the run's base parameters.
    #[serde(default)]
    pub base: toml::Table,
    #[serde(default)]
    pub coupling: Option<Coupling>,
    #[serde(default)]
    pub axes: Vec<Axis>,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec =
            toml::from_str(text).map_err(|e| SweepError::Spec(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn base_params(&self) -> Result<ParamSet, SweepError> {
        ParamSet::from_toml_table(&self.base).map_err(|e| SweepError::Spec(format!("[base]: {e}")))
    }

    /// Checks everything that can be checked before any cell runs.
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() {
            return Err(SweepError::Spec("a sweep needs at least one axis".into()));
        }
        let mut seen = BTreeSet::new();
        for axis in &self.axes {
            let key = axis.param.to_ascii_lowercase();
            if !AXIS_KEYS.contains(&key.as_str()) {
                return Err(SweepError::Spec(format!(
                    "axis parameter `{}` is not sweepable (one of {})",
                    axis.param,
                    AXIS_KEYS.join(", ")
                )));
            }
            if !seen.insert(key) {
                return Err(SweepError::Spec(format!("axis `{}` repeated", axis.param)));
            }
            let grid = axis.grid()?;
            if INTEGER_KEYS.contains(&axis.param.to_ascii_lowercase().as_str())
                && grid.iter().any(|v| v.fract() != 0.0 || *v < 1.0)
            {
                return Err(SweepError::Spec(format!(
                    "axis `{}` needs positive integers",
                    axis.param
                )));
            }
        }
        if let Some(c) = &self.coupling {
            if !(c.ratio > 0.0 && c.ratio.is_finite()) {
                return Err(SweepError::Spec(format!("coupling ratio must be > 0, got {}", c.ratio)));
            }
            if seen.contains(c.coupled_param()) {
                return Err(SweepError::Spec(
                    "t_c is coupled to u_c and cannot also be an axis".into(),
                ));
            }
        }
        if self.engine.uses_montecarlo() && self.trials == 0 {
            return Err(SweepError::Spec("trials must be >= 1".into()));
        }
        self.base_params()?;
        Ok(())
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.param.to_ascii_lowercase()).collect()
    }

    /// Grid points in lexicographic order, first axis slowest.
    pub fn grid_points(&self) -> Result<Vec<Vec<f64>>, SweepError> {
        let grids = self
            .axes
            .iter()
            .map(Axis::grid)
            .collect::<Result<Vec<_>, _>>()?;
        let mut points = vec![Vec::new()];
        for g in &grids {
            points = points
                .into_iter()
                .flat_map(|p| {
                    g.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }
}

/// A threshold grid in dB, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbGrid {
    pub fn db_values(&self) -> Result<Vec<f64>, SweepError> {
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(SweepError::Spec(format!(
                "beta grid needs start <= stop and step > 0, got {:?}",
                self
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

/// An analytic-versus-simulation comparison on a threshold grid, run once
/// per entry of `cases`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub tier: Tier,
    pub beta_db: DbGrid,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub base: toml::Table,
    /// Per-case overrides; one report each. Empty means a single case.
    #[serde(default)]
    pub cases: Vec<toml::Table>,
}

impl ValidationSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.trials == 0 {
            return Err(SweepError::Spec("trials must be >= 1".into()));
        }
        self.beta_db.db_values()?;
        ParamSet::from_toml_table(&self.base).map_err(|e| SweepError::Spec(format!("[base]: {e}")))?;
        for case in &self.cases {
            ParamSet::from_toml_table(case).map_err(|e| SweepError::Spec(format!("case: {e}")))?;
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(super::default_tolerance(self.tier))
    }

    /// (label, parameters) per case, base applied underneath.
    pub fn case_params(&self) -> Result<Vec<(String, ParamSet)>, SweepError> {
        let base =
            ParamSet::from_toml_table(&self.base).map_err(|e| SweepError::Spec(format!("[base]: {e}")))?;
        if self.cases.is_empty() {
            return Ok(vec![(self.name.clone(), base)]);
        }
        self.cases
            .iter()
            .map(|case| {
                let over =
                    ParamSet::from_toml_table(case).map_err(|e| SweepError::Spec(format!("case: {e}")))?;
                let label = over
                    .iter()
                    .map(|(k, v)| match v {
                        ParamValue::Number(x) => format!("{k}={x}"),
                        ParamValue::Flag(b) => format!("{k}={b}"),
                    })
                    .collect::<Vec<_>>()
                    .join(",");
                Ok((label, base.overlay(&over)))
            })
            .collect()
    }
}

/// An embedded or user-supplied run description.
#[derive(Debug, Clone, PartialEq)]
pub enum RunSpec {
    Sweep(SweepSpec),
    Validation(ValidationSpec),
}

impl RunSpec {
    /// Parses a TOML document; `kind = "validate"` selects a validation run,
    /// anything else (or no `kind`) a sweep.
    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| SweepError::Spec(format!("spec: {e}")))?;
        let kind = match table.remove("kind") {
            None => "sweep".to_string(),
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(SweepError::Spec(format!("`kind` must be a string, got {other}")))
            }
        };
        match kind.as_str() {
            "sweep" => {
                let spec: SweepSpec = table
                    .try_into()
                    .map_err(|e| SweepError::Spec(format!("sweep spec: {e}")))?;
                spec.validate()?;
                Ok(RunSpec::Sweep(spec))
            }
            "validate" => {
                let spec: ValidationSpec = table
                    .try_into()
                    .map_err(|e| SweepError::Spec(format!("validation spec: {e}")))?;
                spec.validate()?;
                Ok(RunSpec::Validation(spec))
            }
            other => Err(SweepError::Spec(format!(
                "unknown kind `{other}` (sweep or validate)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            RunSpec::Sweep(s) => &s.name,
            RunSpec::Validation(v) => &v.name,
        }
    }

    pub fn description(&self) -> &str {
        match self {
            RunSpec::Sweep(s) => &s.description,
            RunSpec::Validation(v) => &v.description,
        }
    }
}
