//! Best constant rates, average sum rate, power consumption and energy
//! efficiency.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Display;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{self, CoverageQuery, Tier};
use crate::config::{ConfigError, ParamSet, SystemConfig};
use crate::montecarlo::{self, EmpiricalCoverage, McOptions};
use crate::quadrature::QuadratureSpec;
use crate::special::sinc_norm;

pub const BETA_GRID_MIN: f64 = 1e-4;
pub const BETA_GRID_MAX: f64 = 1e6;
pub const BETA_POINTS_PER_DECADE: usize = 25;
/// Golden-section stops once the bracket is this narrow relative to β.
pub const BETA_REL_TOL: f64 = 1e-4;
/// Coverage at the top of the grid at or above this means the rate
/// objective keeps growing.
pub const UNBOUNDED_COVERAGE: f64 = 1.0 - 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{tier} rate objective is unbounded: coverage {coverage} at beta = {beta}")]
    UnboundedObjective { tier: Tier, beta: f64, coverage: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{tier} coverage evaluation failed: {message}")]
    Coverage { tier: Tier, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Power consumption coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Power amplifier efficiency.
    pub eta: f64,
    /// Load-independent BS power [W].
    pub c0: f64,
    /// Per-antenna circuit power [W].
    pub c1: f64,
    /// Per-device circuit power [W].
    pub c2: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            eta: 0.3,
            c0: 5.0,
            c1: 0.5,
            c2: 0.1,
        }
    }
}

impl PowerModel {
    /// Reads `eta`, `c_0`, `c_1`, `c_2`, falling back to the defaults.
    pub fn from_params(raw: &ParamSet) -> Result<Self, ConfigError> {
        let d = Self::default();
        let pm = Self {
            eta: raw.optional_number("eta")?.unwrap_or(d.eta),
            c0: raw.optional_number("c_0")?.unwrap_or(d.c0),
            c1: raw.optional_number("c_1")?.unwrap_or(d.c1),
            c2: raw.optional_number("c_2")?.unwrap_or(d.c2),
        };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ConfigError::InvalidRange {
                field: "eta".into(),
                value: self.eta,
                bound: "0 < eta <= 1".into(),
            });
        }
        for (field, value) in [("c_0", self.c0), ("c_1", self.c1), ("c_2", self.c2)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::InvalidRange {
                    field: field.into(),
                    value,
                    bound: ">= 0".into(),
                });
            }
        }
        Ok(())
    }
}

/// Maximizer of B_w·log2(1+β)·P_cov(β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub best_beta: f64,
    /// [bit/s]
    pub rate: f64,
    pub coverage_at_best: f64,
}

impl RateResult {
    pub fn zero() -> Self {
        Self {
            best_beta: 0.0,
            rate: 0.0,
            coverage_at_best: 1.0,
        }
    }
}

/// β_k = 10^(k/ppd) spanning [`BETA_GRID_MIN`, `BETA_GRID_MAX`].
pub fn rate_beta_grid(points_per_decade: usize) -> Vec<f64> {
    let lo = BETA_GRID_MIN.log10();
    let hi = BETA_GRID_MAX.log10();
    let n = ((hi - lo) * points_per_decade as f64).round() as usize;
    (0..=n)
        .map(|k| 10f64.powf(lo + k as f64 / points_per_decade as f64))
        .collect()
}

/// Best constant rate for one tier: log-grid search, then golden-section
/// refinement in log β around the best grid point.
pub fn best_constant_rate<F, E>(
    cfg: &SystemConfig,
    tier: Tier,
    coverage_fn: F,
) -> Result<RateResult, MetricsError>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Display + Send,
{
    best_constant_rate_on(cfg.bandwidth, tier, BETA_POINTS_PER_DECADE, coverage_fn)
}

/// [`best_constant_rate`] with explicit bandwidth and grid density.
pub fn best_constant_rate_on<F, E>(
    bandwidth: f64,
    tier: Tier,
    points_per_decade: usize,
    coverage_fn: F,
) -> Result<RateResult, MetricsError>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Display + Send,
{
    let eval = |beta: f64| -> Result<f64, MetricsError> {
        coverage_fn(beta).map_err(|e| MetricsError::Coverage {
            tier,
            message: e.to_string(),
        })
    };
    let objective = |beta: f64, p: f64| bandwidth * (1.0 + beta).log2() * p;
    let grid = rate_beta_grid(points_per_decade);
    let cov: Vec<f64> = grid
        .par_iter()
        .map(|&b| eval(b))
        .collect::<Result<_, _>>()?;
    let top = *cov.last().expect("non-empty grid");
    if top >= UNBOUNDED_COVERAGE {
        return Err(MetricsError::UnboundedObjective {
            tier,
            beta: *grid.last().expect("non-empty grid"),
            coverage: top,
        });
    }
    let mut best = RateResult {
        best_beta: grid[0],
        rate: objective(grid[0], cov[0]),
        coverage_at_best: cov[0],
    };
    let mut k_best = 0;
    for (k, (&b, &p)) in grid.iter().zip(&cov).enumerate() {
        let r = objective(b, p);
        if r > best.rate {
            best = RateResult {
                best_beta: b,
                rate: r,
                coverage_at_best: p,
            };
            k_best = k;
        }
    }
    let mut lo = grid[k_best.saturating_sub(1)].ln();
    let mut hi = grid[(k_best + 1).min(grid.len() - 1)].ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut consider = |x: f64| -> Result<f64, MetricsError> {
        let beta = x.exp();
        let p = eval(beta)?;
        let r = objective(beta, p);
        if r > best.rate {
            best = RateResult {
                best_beta: beta,
                rate: r,
                coverage_at_best: p,
            };
        }
        Ok(r)
    };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = consider(x1)?;
    let mut f2 = consider(x2)?;
    let tol = BETA_REL_TOL.ln_1p();
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = consider(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = consider(x1)?;
        }
    }
    Ok(best)
}

/// U_c·R̄_c + πR²λ_d·R̄_d [bit/s].
pub fn average_sum_rate(cfg: &SystemConfig, rate_c: &RateResult, rate_d: &RateResult) -> f64 {
    cfg.n_cue as f64 * rate_c.rate + cfg.mean_d2d_in_cell() * rate_d.rate
}

/// (1/η)(P_c + λ_dπR²P_d) + C₀ + T_c·C₁ + (U_c + 2λ_dπR²)·C₂ [W].
pub fn total_power(cfg: &SystemConfig, pm: &PowerModel) -> f64 {
    let pairs = cfg.lambda_d * PI * cfg.radius * cfg.radius;
    (cfg.p_c + pairs * cfg.p_d) / pm.eta
        + pm.c0
        + cfg.n_antennas as f64 * pm.c1
        + (cfg.n_cue as f64 + 2.0 * pairs) * pm.c2
}

/// ASR over total power [bit/J].
pub fn energy_efficiency(asr: f64, power: f64) -> Result<f64, MetricsError> {
    if !(power > 0.0) {
        return Err(MetricsError::Domain(format!("power must be > 0 W, got {power}")));
    }
    Ok(asr / power)
}

/// D2D density maximizing the D2D sum rate at a fixed threshold:
/// sinc(2/α_d)/(πR₀₀²)·β_d^(−2/α_d).
pub fn optimal_d2d_density(cfg: &SystemConfig, beta_d: f64) -> Result<f64, MetricsError> {
    if !(beta_d > 0.0) {
        return Err(MetricsError::Domain(format!(
            "beta_d must be > 0, got {beta_d}"
        )));
    }
    let delta = 2.0 / cfg.alpha_d;
    let r00 = cfg.d2d_pair_distance;
    Ok(sinc_norm(delta) / (PI * r00 * r00) * beta_d.powf(-delta))
}

/// Both tier rates plus any numerical diagnostics raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct TierRates {
    pub cue: RateResult,
    pub d2d: RateResult,
    pub flags: BTreeSet<&'static str>,
}

/// Rates from the closed-form coverage expressions.
pub fn analytic_rates(cfg: &SystemConfig, quad: &QuadratureSpec) -> Result<TierRates, MetricsError> {
    cfg.validate()?;
    let flags = Mutex::new(BTreeSet::new());
    let d2d = best_constant_rate(cfg, Tier::D2d, |b| {
        analytic::d2d_coverage(&CoverageQuery::new(cfg, Tier::D2d, b))
    })?;
    let cue = best_constant_rate(cfg, Tier::Cellular, |b| {
        let out = analytic::cue_coverage(&CoverageQuery::new(cfg, Tier::Cellular, b), quad)?;
        let raised = out.flags();
        if !raised.is_empty() {
            flags.lock().expect("flag set").extend(raised);
        }
        Ok::<_, analytic::AnalyticError>(out.probability)
    })?;
    Ok(TierRates {
        cue,
        d2d,
        flags: flags.into_inner().expect("flag set"),
    })
}

/// Rates from empirical coverage of one simulation run.
pub fn montecarlo_rates(cfg: &SystemConfig, opts: &McOptions) -> Result<TierRates, MetricsError> {
    let samples = montecarlo::sample_sinrs(cfg, opts).map_err(|e| MetricsError::Coverage {
        tier: Tier::D2d,
        message: e.to_string(),
    })?;
    let rate = |tier| {
        let emp = EmpiricalCoverage::from_trials(&samples, tier, opts.seed);
        best_constant_rate(cfg, tier, |b| Ok::<_, String>(emp.coverage(b)))
    };
    Ok(TierRates {
        d2d: rate(Tier::D2d)?,
        cue: rate(Tier::Cellular)?,
        flags: BTreeSet::new(),
    })
}

/// ASR, power and EE at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub rates: TierRates,
    pub asr: f64,
    pub power: f64,
    pub ee: f64,
}

pub fn operating_point(
    cfg: &SystemConfig,
    pm: &PowerModel,
    rates: TierRates,
) -> Result<OperatingPoint, MetricsError> {
    let asr = average_sum_rate(cfg, &rates.cue, &rates.d2d);
    let power = total_power(cfg, pm);
    let ee = energy_efficiency(asr, power)?;
    Ok(OperatingPoint {
        rates,
        asr,
        power,
        ee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg_with(u_c: usize, t_c: usize, lambda: f64) -> SystemConfig {
        let mut cfg = SystemConfig::table_defaults();
        cfg.n_cue = u_c;
        cfg.n_antennas = t_c;
        cfg.lambda_d = lambda;
        cfg
    }

    #[test]
    fn grid_layout() {
        let g = rate_beta_grid(25);
        assert_eq!(g.len(), 251);
        assert_eq!(g[100], 1.0);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[250] / 1e6 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn certain_coverage_is_unbounded() {
        let cfg = cfg_with(4, 20, 1e-5);
        let err = best_constant_rate(&cfg, Tier::D2d, |_| Ok::<_, String>(1.0)).unwrap_err();
        assert!(matches!(err, MetricsError::UnboundedObjective { .. }));
    }

    #[test]
    fn step_coverage() {
        let cfg = cfg_with(4, 20, 1e-5);
        let r = best_constant_rate(&cfg, Tier::D2d, |b| {
            Ok::<_, String>(if b <= 1.0 { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert_eq!(r.best_beta, 1.0);
        assert_eq!(r.rate, cfg.bandwidth);
    }

    #[test]
    fn coverage_errors_propagate() {
        let cfg = cfg_with(4, 20, 1e-5);
        let err = best_constant_rate(&cfg, Tier::Cellular, |_| Err::<f64, _>("boom")).unwrap_err();
        assert!(matches!(err, MetricsError::Coverage { .. }));
    }

    #[test]
    fn power_by_hand() {
        let mut cfg = cfg_with(1, 1, 0.0);
        cfg.p_c = 1.0;
        let p = total_power(&cfg, &PowerModel::default());
        assert!((p - (1.0 / 0.3 + 5.0 + 0.5 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn power_table_point() {
        // independent arithmetic: 1/0.3·(1 + 25π·0.00398107) + 5 + 35 + (14 + 50π)·0.1
        let cfg = cfg_with(14, 70, 1e-4);
        let p = total_power(&cfg, &PowerModel::default());
        assert!((p - 61.483_538_736_575_87).abs() < 1e-9, "{p}");
    }

    #[test]
    fn doubling_antennas_adds_their_circuit_power() {
        let pm = PowerModel::default();
        let a = cfg_with(4, 20, 1e-5);
        let b = cfg_with(4, 40, 1e-5);
        assert!((total_power(&b, &pm) - total_power(&a, &pm) - 20.0 * pm.c1).abs() < 1e-12);
    }

    #[test]
    fn efficiency_ratio() {
        assert_eq!(energy_efficiency(0.0, 3.0).unwrap(), 0.0);
        let ee = energy_efficiency(8.9333e6, 8.9333).unwrap();
        assert!((ee - 1e6).abs() < 1e-6);
        assert!(energy_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn sum_rate_edges() {
        let r = RateResult {
            best_beta: 1.0,
            rate: 3.0,
            coverage_at_best: 0.5,
        };
        let cfg = cfg_with(4, 20, 0.0);
        assert_eq!(average_sum_rate(&cfg, &r, &r), 12.0);
        let cfg = cfg_with(4, 20, 1e-5);
        let asr = average_sum_rate(&cfg, &RateResult::zero(), &r);
        assert_eq!(asr, PI * 250_000.0 * 1e-5 * 3.0);
    }

    #[test]
    fn optimal_density_closed_form() {
        let cfg = cfg_with(4, 20, 1e-5);
        let l = optimal_d2d_density(&cfg, 1.0).unwrap();
        assert!((l / 1.074_449_6e-4 - 1.0).abs() < 1e-7, "{l}");
        let l8 = optimal_d2d_density(&cfg, 8.0).unwrap();
        assert!((l8 / l - 0.25).abs() < 1e-14);
        assert!(optimal_d2d_density(&cfg, 0.0).is_err());
    }

    #[test]
    fn power_model_params() {
        let mut raw = ParamSet::defaults();
        assert_eq!(PowerModel::from_params(&raw).unwrap(), PowerModel::default());
        raw.set_number("eta", 1.5).unwrap();
        assert!(PowerModel::from_params(&raw).is_err());
    }

    proptest! {
        #[test]
        fn power_is_affine_in_each_input(u in 1usize..20, extra in 0usize..50, lexp in -7.0f64..-3.0) {
            let pm = PowerModel::default();
            let lambda = 10f64.powf(lexp);
            let base = cfg_with(u, u + extra, lambda);
            let at = |f: &dyn Fn(&mut SystemConfig, f64), x: f64| {
                let mut c = base.clone();
                f(&mut c, x);
                total_power(&c, &pm)
            };
            let lam = |c: &mut SystemConfig, x: f64| c.lambda_d = x;
            let tc = |c: &mut SystemConfig, x: f64| c.n_antennas = x as usize;
            let uc = |c: &mut SystemConfig, x: f64| { c.n_antennas = 1000; c.n_cue = x as usize };
            let cases: [(&dyn Fn(&mut SystemConfig, f64), [f64; 3]); 3] = [
                (&lam, [lambda, 2.0 * lambda, 3.0 * lambda]),
                (&tc, [(u + extra) as f64, (u + extra + 1) as f64, (u + extra + 2) as f64]),
                (&uc, [u as f64, (u + 1) as f64, (u + 2) as f64]),
            ];
            for (f, xs) in cases {
                let y: Vec<f64> = xs.iter().map(|&x| at(f, x)).collect();
                let second = y[2] - 2.0 * y[1] + y[0];
                prop_assert!(second.abs() <= 1e-9 * y[1].abs());
            }
        }
    }
}
