//! Closed-form coverage probabilities for the typical D2D receiver and the
//! typical cellular user, plus their special cases.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SystemConfig};
use crate::quadrature::{integrate_adaptive, QuadratureSpec};
use crate::special::{gamma, generalized_binomial, incomplete_beta, BellTable, MathError};

/// Terms below this fraction of the running partial sum are dropped.
pub const TRUNCATION_REL: f64 = 1e-14;

/// Condition estimate above which a CUE result is flagged ill-conditioned.
pub const ILL_CONDITIONED_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    D2d,
    Cellular,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::D2d => "d2d",
            Tier::Cellular => "cellular",
        })
    }
}

impl std::str::FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d2d" | "d" => Ok(Tier::D2d),
            "cellular" | "cue" | "c" => Ok(Tier::Cellular),
            other => Err(format!("unknown tier `{other}` (expected d2d or cellular)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("query is for the {got} tier, this expression covers {expected}")]
    WrongTier { expected: Tier, got: Tier },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("invalid quadrature spec: {0}")]
    Quadrature(String),
}

/// A coverage question: which tier, under which parameters, at which
/// linear SINR threshold.
#[derive(Debug, Clone, Copy)]
pub struct CoverageQuery<'a> {
    pub cfg: &'a SystemConfig,
    pub tier: Tier,
    pub beta: f64,
}

impl<'a> CoverageQuery<'a> {
    pub fn new(cfg: &'a SystemConfig, tier: Tier, beta: f64) -> Self {
        Self { cfg, tier, beta }
    }

    fn check(&self, tier: Tier) -> Result<(), AnalyticError> {
        if self.tier != tier {
            return Err(AnalyticError::WrongTier {
                expected: tier,
                got: self.tier,
            });
        }
        if !(self.beta >= 0.0) || self.beta.is_nan() {
            return Err(AnalyticError::Domain(format!(
                "SINR threshold must be >= 0, got {}",
                self.beta
            )));
        }
        self.cfg.validate()?;
        Ok(())
    }
}

fn assert_probability(p: f64) -> f64 {
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&p),
        "coverage probability {p} outside [0, 1]"
    );
    p
}

/// Laplace transform of the BS interference at the typical D2D receiver,
/// averaged over its uniform position in the cell:
/// ((κβ)^(2/α_c)/R²)·[y^a (1−y)^(−2/α_c) − a·B(y; a, 1 − 2/α_c)] with
/// a = U_c + 2/α_c − 1 and y = 1/(κβR^(−α_c) + 1).
pub fn bs_interference_laplace(cfg: &SystemConfig, beta: f64) -> Result<f64, AnalyticError> {
    if beta == 0.0 {
        return Ok(1.0);
    }
    let d = cfg.derived();
    let c = 2.0 / cfg.alpha_c;
    let a = cfg.n_cue as f64 + c - 1.0;
    let b = 1.0 - c;
    let kb = d.kappa * beta;
    let t = kb * cfg.radius.powf(-cfg.alpha_c);
    let y = 1.0 / (t + 1.0);
    let one_minus_y = t / (t + 1.0);
    let lead = kb.powf(c) / (cfg.radius * cfg.radius);
    let first = (-a * t.ln_1p()).exp() * one_minus_y.powf(-c);
    let second = a * incomplete_beta(y, a, b)?;
    Ok(lead * (first - second))
}

/// exp(−πλ_d R₀₀² β^(2/α_d) / sinc(2/α_d)), the PPP interference factor.
pub fn d2d_interference_laplace(cfg: &SystemConfig, beta: f64) -> f64 {
    let delta = 2.0 / cfg.alpha_d;
    let r00 = cfg.d2d_pair_distance;
    (-std::f64::consts::PI * cfg.lambda_d * r00 * r00 * beta.powf(delta)
        / crate::special::sinc_norm(delta))
    .exp()
}

/// Coverage probability of the typical D2D receiver: BS interference,
/// D2D interference and noise factors multiplied together.
pub fn d2d_coverage(q: &CoverageQuery) -> Result<f64, AnalyticError> {
    q.check(Tier::D2d)?;
    if q.beta == 0.0 {
        return Ok(1.0);
    }
    let noise = (-q.beta / q.cfg.derived().gamma_bar_d).exp();
    let p = bs_interference_laplace(q.cfg, q.beta)? * d2d_interference_laplace(q.cfg, q.beta) * noise;
    Ok(assert_probability(p))
}

/// D2D coverage with the noise factor dropped (interference-limited).
pub fn d2d_coverage_high_snr(q: &CoverageQuery) -> Result<f64, AnalyticError> {
    q.check(Tier::D2d)?;
    if q.beta == 0.0 {
        return Ok(1.0);
    }
    let p = bs_interference_laplace(q.cfg, q.beta)? * d2d_interference_laplace(q.cfg, q.beta);
    Ok(assert_probability(p))
}

/// A cellular coverage value together with its numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CueCoverage {
    pub probability: f64,
    /// The node-doubling loop met its tolerance.
    pub converged: bool,
    pub nodes_used: usize,
    /// Largest Σ|terms|/|Σ terms| over the inner sums.
    pub condition: f64,
}

impl CueCoverage {
    pub fn ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED_LIMIT
    }

    /// Short diagnostic tokens, empty when the value is clean.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.converged {
            out.push("quadrature_not_converged");
        }
        if self.ill_conditioned() {
            out.push("ill_conditioned");
        }
        out
    }

    fn certain() -> Self {
        Self {
            probability: 1.0,
            converged: true,
            nodes_used: 0,
            condition: 1.0,
        }
    }
}

#[derive(Clone, Copy)]
enum CueForm {
    Full,
    InterferenceLimited,
}

fn check_quad(quad: &QuadratureSpec) -> Result<(), AnalyticError> {
    quad.validate().map_err(AnalyticError::Quadrature)
}

/// Coverage probability of the typical cellular user.
///
/// For a user at distance r from the BS, s = (A_d/ζ)·r^α_c·β and the
/// conditional coverage is
/// e^(−N₀s/A_d) Σ_{k≤T_c−U_c} (s^k/k!) Σ_{i≤k} C(k,i) (N₀/A_d)^(k−i) (−1)^i Υ(λ_d, s, i);
/// the result is its average under the density 2r/R².
pub fn cue_coverage(q: &CoverageQuery, quad: &QuadratureSpec) -> Result<CueCoverage, AnalyticError> {
    cue_coverage_form(q, quad, CueForm::Full)
}

/// [`cue_coverage`] with the noise terms dropped:
/// 𝔼[Σ_{k≤T_c−U_c} ((−s)^k/k!) Υ(λ_d, s, k)].
pub fn cue_coverage_interference_limited(
    q: &CoverageQuery,
    quad: &QuadratureSpec,
) -> Result<CueCoverage, AnalyticError> {
    cue_coverage_form(q, quad, CueForm::InterferenceLimited)
}

fn cue_coverage_form(
    q: &CoverageQuery,
    quad: &QuadratureSpec,
    form: CueForm,
) -> Result<CueCoverage, AnalyticError> {
    q.check(Tier::Cellular)?;
    check_quad(quad)?;
    if q.beta == 0.0 {
        return Ok(CueCoverage::certain());
    }
    let cfg = q.cfg;
    let d = cfg.derived();
    let delta = 2.0 / cfg.alpha_d;
    let m = cfg.spare_antennas();
    let table = BellTable::shared(delta, m);
    let s_scale = cfg.a_d / d.zeta * q.beta;
    let noise_over_ad = match form {
        CueForm::Full => cfg.noise_power / cfg.a_d,
        CueForm::InterferenceLimited => 0.0,
    };
    let density_scale = d.c_d * cfg.lambda_d;
    let r2 = cfg.radius * cfg.radius;

    let mut moments = vec![0.0; m + 1];
    let mut worst = 1.0f64;
    let out = integrate_adaptive(quad, 0.0, cfg.radius, |r| {
        let s = s_scale * r.powf(cfg.alpha_c);
        let u = density_scale * s.powf(delta);
        worst = worst.max(table.scaled_moments(u, &mut moments));
        let w = noise_over_ad * s;
        let value = if w == 0.0 {
            moments.iter().sum::<f64>()
        } else {
            noise_weighted_sum(&moments, w)
        };
        2.0 * r / r2 * value
    });
    Ok(CueCoverage {
        probability: assert_probability(out.value),
        converged: out.converged,
        nodes_used: out.nodes_used,
        condition: worst,
    })
}

// Σ_i Σ_{j ≤ m−i} (w^j e^(−w)/j!)·M_i, i.e. the (k = i + j, i) terms of the
// double sum, with negligible tails cut once they fall below TRUNCATION_REL
// of the running partial sum.
fn noise_weighted_sum(moments: &[f64], w: f64) -> f64 {
    let m = moments.len() - 1;
    let ln_w = w.ln();
    let mut weights = Vec::with_capacity(m + 1);
    let mut ln_fact = 0.0;
    for j in 0..=m {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        weights.push((j as f64 * ln_w - w - ln_fact).exp());
    }
    let mut partial = 0.0;
    for (i, &mi) in moments.iter().enumerate() {
        if mi == 0.0 {
            continue;
        }
        for (j, &qj) in weights.iter().take(m - i + 1).enumerate() {
            let term = qj * mi;
            if j as f64 > w && term < TRUNCATION_REL * partial {
                break;
            }
            partial += term;
        }
    }
    partial
}

/// T_c = U_c special case: 𝔼[exp(−(N₀/A_d)s − C_d λ_d s^(2/α_d))].
pub fn cue_coverage_zf_equal(
    q: &CoverageQuery,
    quad: &QuadratureSpec,
) -> Result<CueCoverage, AnalyticError> {
    q.check(Tier::Cellular)?;
    check_quad(quad)?;
    if q.cfg.n_antennas != q.cfg.n_cue {
        return Err(AnalyticError::PreconditionViolated(format!(
            "requires T_c = U_c, got T_c = {} and U_c = {}",
            q.cfg.n_antennas, q.cfg.n_cue
        )));
    }
    if q.beta == 0.0 {
        return Ok(CueCoverage::certain());
    }
    let cfg = q.cfg;
    let d = cfg.derived();
    let delta = 2.0 / cfg.alpha_d;
    let s_scale = cfg.a_d / d.zeta * q.beta;
    let r2 = cfg.radius * cfg.radius;
    let out = integrate_adaptive(quad, 0.0, cfg.radius, |r| {
        let s = s_scale * r.powf(cfg.alpha_c);
        let exponent = cfg.noise_power / cfg.a_d * s + d.c_d * cfg.lambda_d * s.powf(delta);
        2.0 * r / r2 * (-exponent).exp()
    });
    Ok(CueCoverage {
        probability: assert_probability(out.value),
        converged: out.converged,
        nodes_used: out.nodes_used,
        condition: 1.0,
    })
}

/// Closed form for λ_d = 0, reported as printed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoD2dCoverage {
    pub value: f64,
    /// The printed expression is not a probability here (value > 1).
    pub exceeds_one: bool,
}

/// λ_d = 0 closed form
/// (2/(α_c R²))·Γ(2/α_c)·(N₀β/ζ)^(−2/α_c)·Σ_{k≤T_c−U_c} C(2/α_c + k − 1, k).
///
/// The expression integrates the distance law over [0, ∞), so it can exceed
/// one for small β. It is returned unclamped with `exceeds_one` set.
pub fn cue_coverage_no_d2d(q: &CoverageQuery) -> Result<NoD2dCoverage, AnalyticError> {
    q.check(Tier::Cellular)?;
    if q.cfg.lambda_d != 0.0 {
        return Err(AnalyticError::PreconditionViolated(format!(
            "requires lambda_d = 0, got {}",
            q.cfg.lambda_d
        )));
    }
    let cfg = q.cfg;
    let c = 2.0 / cfg.alpha_c;
    let zeta = cfg.derived().zeta;
    let series: f64 = (0..=cfg.spare_antennas() as u64)
        .map(|k| generalized_binomial(c + k as f64 - 1.0, k))
        .sum();
    let value = 2.0 / (cfg.alpha_c * cfg.radius * cfg.radius)
        * gamma(c)
        * (cfg.noise_power * q.beta / zeta).powf(-c)
        * series;
    Ok(NoD2dCoverage {
        value,
        exceeds_one: value > 1.0,
    })
}
