//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use hetnet_core::config::SystemConfig;
use hetnet_core::special::regularized_gamma_p;

pub fn table_cfg(u_c: usize, t_c: usize, lambda_d: f64) -> SystemConfig {
    let mut cfg = SystemConfig::table_defaults();
    cfg.n_cue = u_c;
    cfg.n_antennas = t_c;
    cfg.lambda_d = lambda_d;
    cfg
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| 10f64.powf((start + k as f64 * step) / 10.0)).collect()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// n-th derivative of `f` at `x` by the central n-th difference with
/// three levels of Richardson extrapolation (error O(h⁸)).
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, n: usize, h: f64) -> f64 {
    let central = |h: f64| {
        let mut acc = 0.0;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom(n, k) * f(x + (n as f64 / 2.0 - k as f64) * h);
        }
        acc / h.powi(n as i32)
    };
    let mut t: Vec<f64> = (0..4).map(|j| central(h / 2f64.powi(j))).collect();
    for level in 1..4 {
        let factor = 4f64.powi(level);
        for j in (level as usize..4).rev() {
            t[j] = (factor * t[j] - t[j - 1]) / (factor - 1.0);
        }
    }
    t[3]
}

/// Derivatives 0..=max of exp(−c·s^δ) by the product rule on
/// ℒ' = ℒ·φ', φ = −c·s^δ.
pub fn laplace_derivatives(c: f64, delta: f64, s: f64, max: usize) -> Vec<f64> {
    // φ^(m)(s) = −c·(δ)_m falling·s^(δ−m)
    let mut phi = vec![0.0; max + 1];
    for (m, slot) in phi.iter_mut().enumerate().skip(1) {
        let falling: f64 = (0..m).map(|j| delta - j as f64).product();
        *slot = -c * falling * s.powf(delta - m as f64);
    }
    let mut d = vec![(-c * s.powf(delta)).exp()];
    for n in 0..max {
        let next: f64 = (0..=n).map(|k| binom(n, k) * d[k] * phi[n + 1 - k]).sum();
        d.push(next);
    }
    d
}

/// ∫ₐᵇ f by tanh–sinh, halving the step until two levels agree. `f` is
/// called as f(t, t − a, b − t) so endpoint distances stay accurate.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let eval = |h: f64, odd_only: bool| {
        let mut acc = 0.0;
        let mut k: i64 = if odd_only { 1 } else { 0 };
        loop {
            let x = k as f64 * h;
            let sh = FRAC_PI_2 * x.sinh();
            let w = FRAC_PI_2 * x.cosh() / sh.cosh().powi(2);
            if w < 1e-300 || x > 7.0 {
                break;
            }
            // distance of the node from each end: half·(1 ∓ tanh)
            let e = (-2.0 * sh.abs()).exp();
            let near = half * 2.0 * e / (1.0 + e);
            let far = 2.0 * half - near;
            let mut term = 0.0;
            if k == 0 {
                term += f(a + half, half, half);
            } else if near > 0.0 {
                term += f(a + near, near, far);
                term += f(b - near, far, near);
            }
            acc += w * term;
            k += if odd_only { 2 } else { 1 };
        }
        acc
    };
    let mut h = 0.5;
    let mut sum = eval(h, false);
    let mut est = sum * h * half;
    for _ in 0..12 {
        h /= 2.0;
        sum += eval(h, true);
        let next = sum * h * half;
        if (next - est).abs() <= 1e-14 * next.abs() {
            return next;
        }
        est = next;
    }
    est
}

/// ∫₀ˣ t^(a−1)(1−t)^(b−1) dt by tanh–sinh.
pub fn incomplete_beta_quadrature(x: f64, a: f64, b: f64) -> f64 {
    tanh_sinh(
        |_, from_zero, to_x| {
            let one_minus_t = (1.0 - x) + to_x;
            ((a - 1.0) * from_zero.ln() + (b - 1.0) * one_minus_t.ln()).exp()
        },
        0.0,
        x,
    )
}

/// p(n) from Euler's pentagonal-number recurrence.
pub fn partition_counts(max: usize) -> Vec<u64> {
    let mut p = vec![0u64; max + 1];
    p[0] = 1;
    for n in 1..=max {
        let mut acc: i128 = 0;
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
            acc += sign * p[n - g1] as i128;
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                acc += sign * p[n - g2] as i128;
            }
            k += 1;
        }
        p[n] = acc as u64;
    }
    p
}

/// CDF of the chi-squared law with `dof` degrees of freedom.
pub fn chi_squared_cdf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        regularized_gamma_p(dof / 2.0, x / 2.0)
    }
}

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_test(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    let en = n.sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let sign = if j as i64 % 2 == 1 { 2.0 } else { -2.0 };
        p += sign * (-2.0 * j * j * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}

/// Coefficient of determination of a least-squares line.
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}
