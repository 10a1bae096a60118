mod common;

use common::{db_grid, log_grid, rel, table_cfg};
use hetnet_core::analytic::{
    cue_coverage, cue_coverage_interference_limited, cue_coverage_no_d2d, cue_coverage_zf_equal,
    d2d_coverage, d2d_coverage_high_snr, d2d_interference_laplace,
};
use hetnet_core::special::sinc_norm;
use hetnet_core::{CoverageQuery, QuadratureSpec, Tier};
use proptest::prelude::*;
use std::f64::consts::PI;

fn d2d(cfg: &hetnet_core::SystemConfig, beta: f64) -> f64 {
    d2d_coverage(&CoverageQuery::new(cfg, Tier::D2d, beta)).unwrap()
}

fn cue(cfg: &hetnet_core::SystemConfig, beta: f64) -> f64 {
    cue_coverage(&CoverageQuery::new(cfg, Tier::Cellular, beta), &QuadratureSpec::default())
        .unwrap()
        .probability
}

#[test]
fn zero_threshold_is_certain() {
    let cfg = table_cfg(4, 20, 1e-5);
    assert_eq!(d2d(&cfg, 0.0), 1.0);
    assert_eq!(cue(&cfg, 0.0), 1.0);
}

#[test]
fn wrong_tier_and_negative_threshold_are_rejected() {
    let cfg = table_cfg(4, 20, 1e-5);
    assert!(d2d_coverage(&CoverageQuery::new(&cfg, Tier::Cellular, 1.0)).is_err());
    assert!(d2d_coverage(&CoverageQuery::new(&cfg, Tier::D2d, -1.0)).is_err());
    let q = CoverageQuery::new(&cfg, Tier::Cellular, -0.5);
    assert!(cue_coverage(&q, &QuadratureSpec::default()).is_err());
}

#[test]
fn coverage_nonincreasing_in_threshold() {
    let betas = db_grid(-20.0, 30.0, 0.5);
    assert!(betas.len() >= 50);
    for cfg in [table_cfg(4, 20, 1e-5), table_cfg(14, 70, 1e-4), table_cfg(4, 4, 1e-6)] {
        let d: Vec<f64> = betas.iter().map(|&b| d2d(&cfg, b)).collect();
        let c: Vec<f64> = betas.iter().map(|&b| cue(&cfg, b)).collect();
        for k in 1..betas.len() {
            assert!(d[k] <= d[k - 1], "d2d rises at {}", betas[k]);
            assert!(c[k] <= c[k - 1] + 1e-12, "cue rises at {}", betas[k]);
        }
    }
}

#[test]
fn d2d_log_coverage_is_linear_in_density() {
    let beta: f64 = 1.7;
    let base = table_cfg(4, 20, 1e-6);
    let delta = 2.0 / base.alpha_d;
    let r00 = base.d2d_pair_distance;
    let slope = -PI * r00 * r00 * beta.powf(delta) / sinc_norm(delta);
    let ln_p = |lambda: f64| d2d(&table_cfg(4, 20, lambda), beta).ln();
    for &(l1, l2) in &[(1e-6, 1e-4), (1e-5, 3e-5), (2e-6, 5e-5)] {
        let measured = (ln_p(l2) - ln_p(l1)) / (l2 - l1);
        assert!(rel(measured, slope) < 1e-9, "{measured} vs {slope}");
    }
}

#[test]
fn d2d_coverage_bit_identical_across_antennas() {
    for &beta in &db_grid(-10.0, 20.0, 2.5) {
        let reference = d2d(&table_cfg(4, 4, 1e-5), beta);
        for t_c in [5, 20, 70, 300] {
            assert_eq!(d2d(&table_cfg(4, t_c, 1e-5), beta).to_bits(), reference.to_bits());
        }
    }
}

#[test]
fn d2d_interference_limited_form_depends_on_power_ratio_only() {
    let a = table_cfg(4, 20, 1e-5);
    let mut b = a.clone();
    b.p_c *= 7.0;
    b.p_d *= 7.0;
    for &beta in &db_grid(-10.0, 20.0, 5.0) {
        let pa = d2d_coverage_high_snr(&CoverageQuery::new(&a, Tier::D2d, beta)).unwrap();
        let pb = d2d_coverage_high_snr(&CoverageQuery::new(&b, Tier::D2d, beta)).unwrap();
        assert!(rel(pb, pa) < 1e-12, "beta={beta}: {pa} vs {pb}");
    }
}

#[test]
fn d2d_interference_factor_scales_with_pair_distance_squared() {
    let a = table_cfg(4, 20, 1e-5);
    let mut b = a.clone();
    b.d2d_pair_distance *= 2.0;
    let beta = 3.0;
    let la = d2d_interference_laplace(&a, beta).ln();
    let lb = d2d_interference_laplace(&b, beta).ln();
    assert!(rel(lb, 4.0 * la) < 1e-12);
}

#[test]
fn cue_coverage_nondecreasing_in_antennas() {
    for &beta in &[0.1, 1.0, 10.0] {
        let mut prev = 0.0;
        for t_c in [4, 5, 8, 12, 20, 40, 70, 100] {
            let p = cue(&table_cfg(4, t_c, 1e-5), beta);
            assert!(p >= prev - 1e-12, "beta={beta} t_c={t_c}: {p} < {prev}");
            prev = p;
        }
    }
}

#[test]
fn cue_coverage_approaches_one_with_many_spare_antennas() {
    let p = cue(&table_cfg(4, 204, 1e-6), 1.0);
    assert!(p >= 0.99, "{p}");
}

#[test]
fn zf_equal_form_matches_general_form() {
    let cfg = table_cfg(4, 4, 1e-5);
    let quad = QuadratureSpec::default();
    for &beta in &log_grid(1e-2, 1e3, 20) {
        let q = CoverageQuery::new(&cfg, Tier::Cellular, beta);
        let general = cue_coverage(&q, &quad).unwrap().probability;
        let special = cue_coverage_zf_equal(&q, &quad).unwrap().probability;
        assert!(rel(general, special) < 1e-10, "beta={beta}: {general} vs {special}");
    }
}

#[test]
fn zf_equal_form_requires_equal_dimensions() {
    let cfg = table_cfg(4, 20, 1e-5);
    let q = CoverageQuery::new(&cfg, Tier::Cellular, 1.0);
    assert!(cue_coverage_zf_equal(&q, &QuadratureSpec::default()).is_err());
}

#[test]
fn interference_limited_form_close_to_full_form() {
    let cfg = table_cfg(4, 20, 1e-4);
    let quad = QuadratureSpec::default();
    for &beta in &db_grid(-10.0, 20.0, 1.0) {
        let q = CoverageQuery::new(&cfg, Tier::Cellular, beta);
        let full = cue_coverage(&q, &quad).unwrap().probability;
        let il = cue_coverage_interference_limited(&q, &quad).unwrap().probability;
        assert!((full - il).abs() <= 0.01, "beta={beta}: {full} vs {il}");
        assert!(il >= full - 1e-12);
    }
}

#[test]
fn vanishing_noise_gives_interference_limited_form() {
    let mut cfg = table_cfg(4, 20, 1e-5);
    cfg.noise_power *= 1e-9;
    let quad = QuadratureSpec::default();
    for &beta in &db_grid(-10.0, 20.0, 5.0) {
        let q = CoverageQuery::new(&cfg, Tier::Cellular, beta);
        let full = cue_coverage(&q, &quad).unwrap().probability;
        let il = cue_coverage_interference_limited(&q, &quad).unwrap().probability;
        assert!((full - il).abs() < 1e-6, "beta={beta}: {full} vs {il}");
    }
}

#[test]
fn no_d2d_closed_form_tracks_sparse_network() {
    let sparse = table_cfg(4, 70, 1e-12);
    let mut empty = sparse.clone();
    empty.lambda_d = 0.0;
    let closed = |beta: f64| {
        cue_coverage_no_d2d(&CoverageQuery::new(&empty, Tier::Cellular, beta)).unwrap()
    };
    let at_ten = closed(10.0);
    assert!(at_ten.exceeds_one && at_ten.value > 1.0);
    let mut compared = 0;
    for &beta in &log_grid(10.0, 1e7, 25) {
        let c = closed(beta);
        assert_eq!(c.exceeds_one, c.value > 1.0);
        if c.value <= 0.9 {
            let numeric = cue(&sparse, beta);
            assert!(rel(c.value, numeric) < 0.05, "beta={beta}: {} vs {numeric}", c.value);
            compared += 1;
        }
    }
    assert!(compared >= 5, "{compared}");
}

#[test]
fn no_d2d_closed_form_requires_zero_density() {
    let cfg = table_cfg(4, 70, 1e-5);
    assert!(cue_coverage_no_d2d(&CoverageQuery::new(&cfg, Tier::Cellular, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coverage_is_a_probability(
        u_c in 1usize..16,
        spare in 0usize..60,
        log_lambda in -7.0f64..-3.0,
        beta_db in -20.0f64..30.0,
    ) {
        let cfg = table_cfg(u_c, u_c + spare, 10f64.powf(log_lambda));
        let beta = 10f64.powf(beta_db / 10.0);
        let p_d = d2d(&cfg, beta);
        let p_c = cue(&cfg, beta);
        prop_assert!((0.0..=1.0).contains(&p_d), "d2d {}", p_d);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p_c), "cue {}", p_c);
    }
}
