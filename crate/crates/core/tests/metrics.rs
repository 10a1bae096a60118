mod common;

use common::{log_grid, rel, table_cfg};
use hetnet_core::analytic::d2d_coverage;
use hetnet_core::metrics::{
    analytic_rates, average_sum_rate, best_constant_rate, best_constant_rate_on, energy_efficiency,
    operating_point, optimal_d2d_density, rate_beta_grid, total_power, MetricsError, RateResult,
};
use hetnet_core::{CoverageQuery, PowerModel, QuadratureSpec, Tier};
use std::convert::Infallible;

fn exp_rate(beta: f64) -> f64 {
    (1.0 + beta).log2() * (-beta).exp()
}

#[test]
fn rate_grid_spans_ten_decades() {
    let g = rate_beta_grid(25);
    assert_eq!(g.len(), 251);
    assert_eq!(g[100], 1.0);
    assert!(rel(g[0], 1e-4) < 1e-12 && rel(g[250], 1e6) < 1e-12);
}

#[test]
fn exponential_coverage_matches_dense_search() {
    let found = best_constant_rate_on(1.0, Tier::D2d, 25, |b| Ok::<_, Infallible>((-b).exp())).unwrap();
    let dense = log_grid(1e-4, 1e6, 1_000_000);
    let (beta, rate) = dense
        .iter()
        .map(|&b| (b, exp_rate(b)))
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    assert!(rel(found.best_beta, beta) < 5e-3, "{} vs {beta}", found.best_beta);
    assert!(rel(found.rate, rate) < 1e-4, "{} vs {rate}", found.rate);
    assert!(found.rate >= rate * (1.0 - 1e-9));
    assert!(rel(found.coverage_at_best, (-found.best_beta).exp()) < 1e-12);
}

#[test]
fn refinement_is_insensitive_to_grid_density() {
    let cfg = table_cfg(4, 20, 1e-5);
    let cov = |b: f64| d2d_coverage(&CoverageQuery::new(&cfg, Tier::D2d, b));
    let coarse = best_constant_rate_on(cfg.bandwidth, Tier::D2d, 25, cov).unwrap();
    let fine = best_constant_rate_on(cfg.bandwidth, Tier::D2d, 50, cov).unwrap();
    assert!(rel(coarse.rate, fine.rate) < 1e-4, "{} vs {}", coarse.rate, fine.rate);
}

#[test]
fn saturated_coverage_is_reported_unbounded() {
    let cfg = table_cfg(4, 20, 1e-5);
    let err = best_constant_rate(&cfg, Tier::Cellular, |_| Ok::<_, Infallible>(1.0)).unwrap_err();
    assert!(matches!(err, MetricsError::UnboundedObjective { tier: Tier::Cellular, .. }));
}

#[test]
fn coverage_errors_carry_the_tier() {
    let cfg = table_cfg(4, 20, 1e-5);
    let err = best_constant_rate(&cfg, Tier::D2d, |_| Err::<f64, _>("boom")).unwrap_err();
    assert!(matches!(err, MetricsError::Coverage { tier: Tier::D2d, .. }));
}

#[test]
fn sum_rate_adds_tiers() {
    let cfg = table_cfg(6, 30, 3e-5);
    let rc = RateResult { best_beta: 2.0, rate: 3.0e6, coverage_at_best: 0.5 };
    let rd = RateResult { best_beta: 1.0, rate: 1.5e6, coverage_at_best: 0.7 };
    let pairs = 3e-5 * std::f64::consts::PI * cfg.radius * cfg.radius;
    let expected = 6.0 * 3.0e6 + pairs * 1.5e6;
    assert!(rel(average_sum_rate(&cfg, &rc, &rd), expected) < 1e-14);
    let zero = RateResult::zero();
    assert!(rel(average_sum_rate(&cfg, &rc, &zero), 6.0 * 3.0e6) < 1e-14);
}

#[test]
fn power_grows_with_every_component() {
    let pm = PowerModel::default();
    let base = total_power(&table_cfg(4, 20, 1e-5), &pm);
    assert!(total_power(&table_cfg(4, 21, 1e-5), &pm) > base);
    assert!(total_power(&table_cfg(5, 20, 1e-5), &pm) > base);
    assert!(total_power(&table_cfg(4, 20, 2e-5), &pm) > base);
    assert!(energy_efficiency(1.0, 0.0).is_err());
}

#[test]
fn density_argmax_matches_closed_form() {
    let cfg = table_cfg(4, 20, 1e-5);
    let lambda_star = optimal_d2d_density(&cfg, 1.0).unwrap();
    assert!(rel(lambda_star, 1.074_449_6e-4) < 1e-7);
    let grid = log_grid(1e-6, 1e-2, 201);
    let d2d_asr = |lambda: f64| {
        let c = table_cfg(4, 20, lambda);
        let p = d2d_coverage(&CoverageQuery::new(&c, Tier::D2d, 1.0)).unwrap();
        c.mean_d2d_in_cell() * c.bandwidth * p
    };
    let values: Vec<f64> = grid.iter().map(|&l| d2d_asr(l)).collect();
    let k = (0..grid.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let step = 10f64.powf(1.0 / 50.0);
    assert!(grid[k] / lambda_star <= step && lambda_star / grid[k] <= step);
    assert!(rel(grid[k], lambda_star) < 0.05);
    assert!(k > 0 && k < grid.len() - 1);
}

#[test]
fn analytic_operating_point_is_finite() {
    let cfg = table_cfg(4, 20, 1e-5);
    let rates = analytic_rates(&cfg, &QuadratureSpec::default()).unwrap();
    assert!(rates.flags.is_empty(), "{:?}", rates.flags);
    let op = operating_point(&cfg, &PowerModel::default(), rates).unwrap();
    assert!(op.asr > 0.0 && op.asr.is_finite());
    assert!(rel(op.ee, op.asr / op.power) < 1e-14);
    assert!(op.rates.cue.coverage_at_best > 0.0 && op.rates.cue.coverage_at_best < 1.0);
}
