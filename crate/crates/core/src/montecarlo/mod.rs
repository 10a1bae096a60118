//! First-principles simulator: samples node positions, Rayleigh fading and
//! zero-forcing precoders, evaluates both SINRs and estimates coverage by
//! counting threshold exceedances.

pub mod channel;
pub mod geometry;
pub mod rng;

pub use channel::{zf_precoder, zf_residual, ChannelDraw, LinkGains};
pub use geometry::{NetworkRealization, SIM_REGION_FACTOR};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::Tier;
use crate::config::{ConfigError, SystemConfig};

/// Channel redraws allowed per trial before giving up on a singular draw.
pub const MAX_REDRAWS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("SINR threshold must be >= 0, got {0}")]
    NegativeThreshold(f64),
    #[error("CUE channel matrix is rank deficient")]
    RankDeficient,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Empirical coverage at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub beta: f64,
    pub mean: f64,
    pub trials: usize,
    /// 1.96·sqrt(mean(1 − mean)/trials).
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_count(beta: f64, hits: usize, trials: usize, seed: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        Self {
            beta,
            mean,
            trials,
            ci95_halfwidth: 1.96 * (mean * (1.0 - mean) / trials as f64).sqrt(),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    /// Draw |h₀ᴴv₀|² ~ Gamma(T_c−U_c+1, 1) and ‖fᴴV‖² ~ Gamma(U_c, 1)
    /// instead of building the precoder.
    pub fastpath_chisq: bool,
    /// Size of a dedicated thread pool; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            fastpath_chisq: false,
            workers: None,
        }
    }
}

/// Both SINRs of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSinr {
    pub d2d: f64,
    pub cue: f64,
}

impl TrialSinr {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::D2d => self.d2d,
            Tier::Cellular => self.cue,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// SINR of the typical D2D receiver,
/// P_d R₀₀^(−α_d)|g₀₀|² / (ζR_{0,BS}^(−α_c)/A_d·‖fᴴV‖² + I_{d,0} + N₀/A_d).
pub fn sinr_d2d_from_gains(
    cfg: &SystemConfig,
    real: &NetworkRealization,
    ch: &ChannelDraw,
    bs_to_d2d: f64,
) -> f64 {
    let zeta = cfg.derived().zeta;
    let signal = cfg.p_d * cfg.d2d_pair_distance.powf(-cfg.alpha_d) * ch.g_typical.norm_sqr();
    let bs = zeta * real.typical_d2d_rx_distance().powf(-cfg.alpha_c) / cfg.a_d * bs_to_d2d;
    let rx = real.typical_d2d_rx;
    let d2d: f64 = real
        .d2d_tx_positions
        .iter()
        .zip(&ch.g)
        .map(|(tx, g)| cfg.p_d * (rx - tx).norm().powf(-cfg.alpha_d) * g.norm_sqr())
        .sum();
    ratio(signal, bs + d2d + cfg.noise_power / cfg.a_d)
}

/// SINR of the typical CUE,
/// |h₀ᴴv₀|² / ((A_d/ζ)D_{0,BS}^α_c (I_{d,c} + N₀/A_d)), with I_{d,c} summed
/// over every D2D transmitter of the draw.
pub fn sinr_cue_from_gains(
    cfg: &SystemConfig,
    real: &NetworkRealization,
    ch: &ChannelDraw,
    cue_signal: f64,
) -> f64 {
    let zeta = cfg.derived().zeta;
    let user = real.cue_positions[0];
    let interference: f64 = real
        .d2d_tx_positions
        .iter()
        .zip(&ch.e)
        .map(|(tx, e)| cfg.p_d * (user - tx).norm().powf(-cfg.alpha_d) * e.norm_sqr())
        .sum();
    let scale = cfg.a_d / zeta * real.typical_cue_distance().powf(cfg.alpha_c);
    ratio(cue_signal, scale * (interference + cfg.noise_power / cfg.a_d))
}

pub fn sinr_d2d(
    real: &NetworkRealization,
    ch: &ChannelDraw,
    cfg: &SystemConfig,
) -> Result<f64, McError> {
    Ok(sinr_d2d_from_gains(cfg, real, ch, ch.link_gains()?.bs_to_d2d))
}

pub fn sinr_cue(
    real: &NetworkRealization,
    ch: &ChannelDraw,
    cfg: &SystemConfig,
) -> Result<f64, McError> {
    Ok(sinr_cue_from_gains(cfg, real, ch, ch.link_gains()?.cue_signal))
}

/// Geometry and channels of one trial, replayable from (seed, trial).
pub fn draw_trial(
    cfg: &SystemConfig,
    seed: u64,
    trial: u64,
) -> Result<(NetworkRealization, ChannelDraw, LinkGains), McError> {
    let mut geo = rng::trial_rng(seed, trial, rng::GEOMETRY_STREAM);
    let real = NetworkRealization::sample(cfg, &mut geo);
    let mut chan = rng::trial_rng(seed, trial, rng::CHANNEL_STREAM);
    let n = real.d2d_tx_positions.len();
    for _ in 0..MAX_REDRAWS {
        let ch = ChannelDraw::sample(cfg.n_antennas, cfg.n_cue, n, &mut chan);
        match ch.link_gains() {
            Ok(gains) => return Ok((real, ch, gains)),
            Err(McError::RankDeficient) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(McError::RankDeficient)
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Like [`draw_trial`] but with the precoder gains drawn from their
/// Gamma laws. Only the scalar fades of `ChannelDraw` are populated.
fn draw_trial_fastpath(
    cfg: &SystemConfig,
    seed: u64,
    trial: u64,
) -> (NetworkRealization, ChannelDraw, LinkGains) {
    let mut geo = rng::trial_rng(seed, trial, rng::GEOMETRY_STREAM);
    let real = NetworkRealization::sample(cfg, &mut geo);
    let mut chan = rng::trial_rng(seed, trial, rng::CHANNEL_STREAM);
    let gains = LinkGains {
        cue_signal: gamma_draw((cfg.spare_antennas() + 1) as f64, &mut chan),
        bs_to_d2d: gamma_draw(cfg.n_cue as f64, &mut chan),
    };
    let ch = ChannelDraw::sample(0, 0, real.d2d_tx_positions.len(), &mut chan);
    (real, ch, gains)
}

pub fn simulate_trial(
    cfg: &SystemConfig,
    seed: u64,
    trial: u64,
    fastpath_chisq: bool,
) -> Result<TrialSinr, McError> {
    let (real, ch, gains) = if fastpath_chisq {
        draw_trial_fastpath(cfg, seed, trial)
    } else {
        draw_trial(cfg, seed, trial)?
    };
    Ok(TrialSinr {
        d2d: sinr_d2d_from_gains(cfg, &real, &ch, gains.bs_to_d2d),
        cue: sinr_cue_from_gains(cfg, &real, &ch, gains.cue_signal),
    })
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, McError> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| McError::Pool(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Per-trial SINRs in trial order.
pub fn sample_sinrs(cfg: &SystemConfig, opts: &McOptions) -> Result<Vec<TrialSinr>, McError> {
    if opts.trials == 0 {
        return Err(McError::NoTrials);
    }
    cfg.validate()?;
    with_workers(opts.workers, || {
        (0..opts.trials as u64)
            .into_par_iter()
            .map(|t| simulate_trial(cfg, opts.seed, t, opts.fastpath_chisq))
            .collect::<Result<Vec<_>, _>>()
    })?
}

/// Sorted SINR samples of one tier; answers coverage at any threshold.
#[derive(Debug, Clone)]
pub struct EmpiricalCoverage {
    sorted: Vec<f64>,
    seed: u64,
}

impl EmpiricalCoverage {
    pub fn new(mut samples: Vec<f64>, seed: u64) -> Self {
        samples.sort_by(f64::total_cmp);
        Self {
            sorted: samples,
            seed,
        }
    }

    pub fn from_trials(trials: &[TrialSinr], tier: Tier, seed: u64) -> Self {
        Self::new(trials.iter().map(|t| t.get(tier)).collect(), seed)
    }

    pub fn trials(&self) -> usize {
        self.sorted.len()
    }

    /// Number of samples with SINR ≥ β.
    pub fn hits(&self, beta: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x < beta)
    }

    pub fn coverage(&self, beta: f64) -> f64 {
        self.hits(beta) as f64 / self.sorted.len() as f64
    }

    pub fn estimate(&self, beta: f64) -> McEstimate {
        McEstimate::from_count(beta, self.hits(beta), self.sorted.len(), self.seed)
    }
}

fn check_betas(betas: &[f64]) -> Result<(), McError> {
    match betas.iter().find(|b| !(**b >= 0.0)) {
        Some(&b) => Err(McError::NegativeThreshold(b)),
        None => Ok(()),
    }
}

/// Coverage estimates for one tier on a threshold grid.
pub fn estimate_coverage(
    cfg: &SystemConfig,
    tier: Tier,
    betas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<McEstimate>, McError> {
    estimate_coverage_with(cfg, tier, betas, &McOptions::new(trials, seed))
}

pub fn estimate_coverage_with(
    cfg: &SystemConfig,
    tier: Tier,
    betas: &[f64],
    opts: &McOptions,
) -> Result<Vec<McEstimate>, McError> {
    check_betas(betas)?;
    let samples = sample_sinrs(cfg, opts)?;
    let emp = EmpiricalCoverage::from_trials(&samples, tier, opts.seed);
    Ok(betas.iter().map(|&b| emp.estimate(b)).collect())
}
