use std::fmt;
use std::io::Write;

use super::{format_float, SweepError};
use crate::analytic::{self, CoverageQuery, Tier};
use crate::config::{db_to_linear, SystemConfig};
use crate::montecarlo::{self, EmpiricalCoverage, McEstimate, McOptions};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Accepted absolute gap; the per-point allowance is
    /// max(tolerance, 3·ci95).
    pub tolerance: f64,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Also run the Gamma-law fast path and report it alongside.
    pub fastpath_diagnostic: bool,
    pub quad: QuadratureSpec,
}

impl ValidationOptions {
    pub fn new(tier: Tier, trials: usize, seed: u64) -> Self {
        Self {
            tolerance: super::default_tolerance(tier),
            trials,
            seed,
            workers: None,
            fastpath_diagnostic: true,
            quad: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub beta_db: f64,
    pub beta: f64,
    pub analytic: f64,
    pub mc: McEstimate,
    pub fastpath: Option<McEstimate>,
    /// mc − analytic.
    pub gap: f64,
    pub allowed: f64,
    pub pass: bool,
    pub flags: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub label: String,
    pub tier: Tier,
    pub tolerance: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_abs_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap.abs()).fold(0.0, f64::max)
    }

    pub const COLUMNS: &'static [&'static str] = &[
        "case",
        "tier",
        "beta_db",
        "beta",
        "analytic",
        "mc_mean",
        "mc_ci95",
        "gap",
        "allowed",
        "pass",
        "fastpath_mean",
        "fastpath_ci95",
        "flags",
    ];

    /// Rows only; pair with [`Self::COLUMNS`] for a header.
    pub fn write_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<(), SweepError> {
        for r in &self.rows {
            let fast = r.fastpath.map_or((f64::NAN, f64::NAN), |f| (f.mean, f.ci95_halfwidth));
            w.write_record([
                self.label.clone(),
                self.tier.to_string(),
                format_float(r.beta_db),
                format_float(r.beta),
                format_float(r.analytic),
                format_float(r.mc.mean),
                format_float(r.mc.ci95_halfwidth),
                format_float(r.gap),
                format_float(r.allowed),
                r.pass.to_string(),
                format_float(fast.0),
                format_float(fast.1),
                r.flags.join(";"),
            ])?;
        }
        Ok(())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} tier), tolerance {}", self.label, self.tier, self.tolerance)?;
        writeln!(
            f,
            "{:>7} {:>9} {:>9} {:>8} {:>8} {:>9} {:>5}",
            "beta_dB", "analytic", "mc", "ci95", "gap", "fastpath", "ok"
        )?;
        for r in &self.rows {
            let fast = r.fastpath.map_or(String::from("-"), |e| format!("{:.4}", e.mean));
            writeln!(
                f,
                "{:>7.2} {:>9.4} {:>9.4} {:>8.4} {:>+8.4} {:>9} {:>5}",
                r.beta_db,
                r.analytic,
                r.mc.mean,
                r.mc.ci95_halfwidth,
                r.gap,
                fast,
                if r.pass { "yes" } else { "NO" }
            )?;
        }
        write!(
            f,
            "max |gap| {:.4}: {}",
            self.max_abs_gap(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn analytic_point(
    cfg: &SystemConfig,
    tier: Tier,
    beta: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, Vec<&'static str>), SweepError> {
    let q = CoverageQuery::new(cfg, tier, beta);
    let wrap = |e: analytic::AnalyticError| SweepError::Spec(e.to_string());
    match tier {
        Tier::D2d => Ok((analytic::d2d_coverage(&q).map_err(wrap)?, Vec::new())),
        Tier::Cellular => {
            let out = analytic::cue_coverage(&q, quad).map_err(wrap)?;
            Ok((out.probability, out.flags()))
        }
    }
}

/// Runs both engines on a dB threshold grid and compares them point by
/// point.
pub fn validate(
    label: &str,
    cfg: &SystemConfig,
    tier: Tier,
    beta_db: &[f64],
    opts: &ValidationOptions,
) -> Result<ValidationReport, SweepError> {
    if opts.trials == 0 {
        return Err(SweepError::Spec("trials must be >= 1".into()));
    }
    if !(opts.tolerance >= 0.0) {
        return Err(SweepError::Spec(format!("tolerance must be >= 0, got {}", opts.tolerance)));
    }
    cfg.validate()?;
    let mut mc = McOptions::new(opts.trials, opts.seed);
    mc.workers = opts.workers;
    let samples = montecarlo::sample_sinrs(cfg, &mc)?;
    let emp = EmpiricalCoverage::from_trials(&samples, tier, opts.seed);
    let fast = if opts.fastpath_diagnostic {
        let mut fo = mc;
        fo.fastpath_chisq = true;
        let s = montecarlo::sample_sinrs(cfg, &fo)?;
        Some(EmpiricalCoverage::from_trials(&s, tier, opts.seed))
    } else {
        None
    };
    let mut rows = Vec::with_capacity(beta_db.len());
    for &db in beta_db {
        let beta = db_to_linear(db);
        let (analytic, flags) = analytic_point(cfg, tier, beta, &opts.quad)?;
        let est = emp.estimate(beta);
        let gap = est.mean - analytic;
        let allowed = opts.tolerance.max(3.0 * est.ci95_halfwidth);
        rows.push(ValidationRow {
            beta_db: db,
            beta,
            analytic,
            mc: est,
            fastpath: fast.as_ref().map(|e| e.estimate(beta)),
            gap,
            allowed,
            pass: gap.abs() <= allowed,
            flags,
        });
    }
    Ok(ValidationReport {
        label: label.into(),
        tier,
        tolerance: opts.tolerance,
        rows,
    })
}
