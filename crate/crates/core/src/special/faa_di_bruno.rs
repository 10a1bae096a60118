//! Derivatives of the D2D interference Laplace transform
//! ℒ(s) = exp(−C_d·λ_d·s^δ), δ = 2/α_d.
//!
//! Three independent routes are provided:
//!
//! * [`upsilon`] sums Faà di Bruno's formula over every integer partition of
//!   the order, term by term.
//! * [`laplace_derivatives_by_recurrence`] uses the product rule on
//!   ℒ' = g'·ℒ, i.e. ℒ⁽ⁿ⁺¹⁾ = Σₖ C(n,k)·g⁽ᵏ⁺¹⁾·ℒ⁽ⁿ⁻ᵏ⁾.
//! * [`BellTable`] groups the partition sum by number of parts. Every term of
//!   Υ(λ_d, s, i) with n parts equals (−u)ⁿ·s⁻ⁱ times a constant that depends
//!   only on (δ, i, n), where u = C_d·λ_d·s^δ. The table stores those
//!   constants once, which turns the coverage integrand into a handful of
//!   Poisson weights in u and keeps every quantity inside f64 range.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{binomial, generalized_binomial, ln_gamma, CompensatedSum, MathError};
use super::{for_each_partition, PARTITION_GUARD};
use crate::config::SystemConfig;

/// Orders up to this bound are tabulated straight from the partition sum;
/// higher rows come from the partial Bell recurrence.
pub const PARTITION_TABLE_MAX_ORDER: usize = 48;

const DIRECT_PRODUCT_MAX_ORDER: usize = 12;

/// δ(δ−1)…(δ−ℓ+1).
fn falling(delta: f64, l: usize) -> f64 {
    (0..l).map(|q| delta - q as f64).product()
}

fn check_args(lambda_d: f64, s: f64, i: usize) -> Result<(), MathError> {
    if !(lambda_d >= 0.0 && lambda_d.is_finite()) {
        return Err(MathError::Domain(format!("lambda_d = {lambda_d} must be >= 0")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(MathError::Domain(format!("s = {s} must be >= 0")));
    }
    if s == 0.0 && i >= 1 {
        return Err(MathError::Domain(
            "s = 0 with i >= 1 involves negative powers of s".into(),
        ));
    }
    Ok(())
}

/// Υ(λ_d, s, i): the i-th derivative of ℒ at s by Faà di Bruno's formula,
/// summed over every partition (j₁,…,jᵢ) of i.
///
/// The caller applies the (−1)ⁱ factor; (−1)ⁱ·Υ ≥ 0 is the moment
/// 𝔼[Iⁱ e^(−sI)] of the D2D interference.
pub fn upsilon(lambda_d: f64, s: f64, i: usize, cfg: &SystemConfig) -> Result<f64, MathError> {
    let d = cfg.derived();
    upsilon_with(d.c_d, 2.0 / cfg.alpha_d, lambda_d, s, i)
}

/// [`upsilon`] with C_d and δ = 2/α_d given explicitly.
pub fn upsilon_with(
    c_d: f64,
    delta: f64,
    lambda_d: f64,
    s: f64,
    i: usize,
) -> Result<f64, MathError> {
    check_args(lambda_d, s, i)?;
    let prefactor = (-c_d * lambda_d * s.powf(delta)).exp();
    if i == 0 {
        return Ok(prefactor);
    }
    if lambda_d == 0.0 {
        return Ok(0.0);
    }
    if i > PARTITION_GUARD {
        let derivs = laplace_derivatives_by_recurrence(c_d, delta, lambda_d, s, i)?;
        return Ok(derivs[i]);
    }

    // factors x_l = −C_d λ_d s^(δ−l) Π_{q<l}(δ−q), l = 1..i
    if i <= DIRECT_PRODUCT_MAX_ORDER {
        let mut x = vec![0.0; i + 1];
        let mut fact = vec![1.0; i + 1];
        for l in 1..=i {
            x[l] = -c_d * lambda_d * s.powf(delta - l as f64) * falling(delta, l);
            fact[l] = fact[l - 1] * l as f64;
        }
        let mut sum = CompensatedSum::new();
        for_each_partition(i, |mults| {
            let mut term = fact[i];
            for (idx, &j) in mults.iter().enumerate() {
                if j == 0 {
                    continue;
                }
                let l = idx + 1;
                term *= (x[l] / fact[l]).powi(j as i32) / fact[j as usize];
            }
            sum.add(term);
        });
        return Ok(prefactor * sum.value());
    }

    // log-magnitude and sign form
    let ln_cl = (c_d * lambda_d).ln();
    let ln_s = s.ln();
    let mut ln_x = vec![0.0; i + 1];
    let mut neg_x = vec![false; i + 1];
    for l in 1..=i {
        let f = falling(delta, l);
        ln_x[l] = ln_cl + (delta - l as f64) * ln_s + f.abs().ln() - ln_gamma(l as f64 + 1.0);
        neg_x[l] = f > 0.0; // x_l carries a leading minus sign
    }
    let ln_fact_i = ln_gamma(i as f64 + 1.0);
    let term_ln = |mults: &[u32]| -> (f64, bool) {
        let mut ln = ln_fact_i;
        let mut negative = false;
        for (idx, &j) in mults.iter().enumerate() {
            if j == 0 {
                continue;
            }
            let l = idx + 1;
            ln += j as f64 * ln_x[l] - ln_gamma(j as f64 + 1.0);
            if neg_x[l] && j % 2 == 1 {
                negative = !negative;
            }
        }
        (ln, negative)
    };
    let mut max_ln = f64::NEG_INFINITY;
    for_each_partition(i, |m| max_ln = max_ln.max(term_ln(m).0));
    let mut sum = CompensatedSum::new();
    for_each_partition(i, |m| {
        let (ln, negative) = term_ln(m);
        let t = (ln - max_ln).exp();
        sum.add(if negative { -t } else { t });
    });
    let ln_pref = -c_d * lambda_d * s.powf(delta);
    Ok(sum.value() * (max_ln + ln_pref).exp())
}

/// ℒ⁽ⁿ⁾(s) for n = 0..=max_order through ℒ⁽ⁿ⁺¹⁾ = Σₖ C(n,k)·g⁽ᵏ⁺¹⁾·ℒ⁽ⁿ⁻ᵏ⁾
/// with g(s) = −C_d·λ_d·s^δ.
pub fn laplace_derivatives_by_recurrence(
    c_d: f64,
    delta: f64,
    lambda_d: f64,
    s: f64,
    max_order: usize,
) -> Result<Vec<f64>, MathError> {
    check_args(lambda_d, s, max_order)?;
    let g: Vec<f64> = (0..=max_order)
        .map(|l| -c_d * lambda_d * falling(delta, l) * s.powf(delta - l as f64))
        .collect();
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(g[0].exp());
    for n in 0..max_order {
        let mut acc = CompensatedSum::new();
        for k in 0..=n {
            acc.add(binomial(n as u64, k as u64) * g[k + 1] * out[n - k]);
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Faà di Bruno coefficients of ℒ grouped by number of parts.
///
/// Row `i`, column `n` holds n!·B_{i,n}(δ⁽¹⁾, δ⁽²⁾, …)/i!, where B_{i,n} is
/// the partial Bell polynomial and δ⁽ˡ⁾ the falling factorial. With
/// u = C_d·λ_d·s^δ and the Poisson weights pₙ(u) = uⁿe^(−u)/n!,
///
/// sⁱ·Υ(λ_d, s, i)/i! = Σₙ (−1)ⁿ·coeff[i][n]·pₙ(u).
///
/// Coefficients are bounded by 2ⁱ in magnitude, so rows up to several
/// hundred stay finite.
#[derive(Debug, Clone)]
pub struct BellTable {
    delta: f64,
    rows: Vec<Vec<f64>>,
}

impl BellTable {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Rows 0..=max_order grouped directly from the partition sum.
    pub fn from_partitions(delta: f64, max_order: usize) -> Result<Self, MathError> {
        if max_order > PARTITION_GUARD {
            return Err(MathError::GuardExceeded {
                requested: max_order,
                limit: PARTITION_GUARD,
            });
        }
        let coeff: Vec<f64> = (0..=max_order as u64)
            .map(|l| generalized_binomial(delta, l))
            .collect();
        let ln_fact: Vec<f64> = (0..=max_order).map(|n| ln_gamma(n as f64 + 1.0)).collect();
        let mut rows = Vec::with_capacity(max_order + 1);
        for i in 0..=max_order {
            let mut sums = vec![CompensatedSum::new(); i + 1];
            for_each_partition(i, |mults| {
                // Π_l C(δ,l)^j_l / j_l!, scaled by n! with n = Σ j_l
                let mut term = 1.0;
                let mut parts = 0usize;
                let mut ln_den = 0.0;
                for (idx, &j) in mults.iter().enumerate() {
                    if j == 0 {
                        continue;
                    }
                    term *= coeff[idx + 1].powi(j as i32);
                    ln_den += ln_fact[j as usize];
                    parts += j as usize;
                }
                sums[parts].add(term * (ln_fact[parts] - ln_den).exp());
            });
            rows.push(sums.iter().map(CompensatedSum::value).collect());
        }
        Ok(Self { delta, rows })
    }

    /// Rows 0..=max_order by the partial Bell recurence
    /// B_{i,n} = Σ_m C(i−1, m−1)·x_m·B_{i−m,n−1}.
    pub fn from_recurrence(delta: f64, max_order: usize) -> Self {
        let mut table = Self {
            delta,
            rows: vec![vec![1.0]],
        };
        table.extend_by_recurrence(max_order);
        table
    }

    fn extend_by_recurrence(&mut self, max_order: usize) {
        let coeff: Vec<f64> = (0..=max_order as u64)
            .map(|l| generalized_binomial(self.delta, l))
            .collect();
        for i in self.rows.len()..=max_order {
            let mut row = vec![0.0; i + 1];
            for (n, slot) in row.iter_mut().enumerate().skip(1) {
                let mut acc = CompensatedSum::new();
                for m in 1..=(i + 1 - n) {
                    acc.add(m as f64 * coeff[m] * self.rows[i - m][n - 1]);
                }
                *slot = acc.value() * n as f64 / i as f64;
            }
            self.rows.push(row);
        }
    }

    /// Partition rows up to [`PARTITION_TABLE_MAX_ORDER`], recurrence above.
    pub fn build(delta: f64, max_order: usize) -> Self {
        let direct = max_order.min(PARTITION_TABLE_MAX_ORDER);
        let mut table = Self::from_partitions(delta, direct).expect("order within guard");
        table.extend_by_recurrence(max_order);
        table
    }

    /// Process-wide memoized table covering at least `max_order`.
    pub fn shared(delta: f64, max_order: usize) -> Arc<BellTable> {
        static CACHE: OnceLock<RwLock<HashMap<u64, Arc<BellTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        let key = delta.to_bits();
        if let Some(t) = cache.read().expect("bell cache").get(&key) {
            if t.max_order() >= max_order {
                return Arc::clone(t);
            }
        }
        let mut guard = cache.write().expect("bell cache");
        if let Some(t) = guard.get(&key) {
            if t.max_order() >= max_order {
                return Arc::clone(t);
            }
        }
        let table = Arc::new(Self::build(delta, max_order.max(16)));
        guard.insert(key, Arc::clone(&table));
        table
    }

    /// Fills `out[i] = (−1)ⁱ·sⁱ·Υ(λ_d, s, i)/i!` for i = 0..out.len(), given
    /// u = C_d·λ_d·s^δ. Each entry is a non-negative "Poisson-like" weight;
    /// returns the worst condition number Σ|terms|/|Σ terms| seen.
    pub fn scaled_moments(&self, u: f64, out: &mut [f64]) -> f64 {
        let m = out.len();
        assert!(m <= self.rows.len(), "table too short for requested moments");
        if m == 0 {
            return 1.0;
        }
        let mut poisson = vec![0.0; m];
        if u == 0.0 {
            poisson[0] = 1.0;
        } else {
            let ln_u = u.ln();
            for (n, p) in poisson.iter_mut().enumerate() {
                *p = (n as f64 * ln_u - u - ln_gamma(n as f64 + 1.0)).exp();
            }
        }
        let mut worst = 1.0f64;
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.rows[i];
            let mut acc = CompensatedSum::new();
            for (n, (&c, &p)) in row.iter().zip(&poisson).enumerate() {
                if p == 0.0 || c == 0.0 {
                    continue;
                }
                let t = c * p;
                acc.add(if (i + n) % 2 == 0 { t } else { -t });
            }
            *slot = acc.value();
            worst = worst.max(acc.condition());
        }
        worst
    }

    /// Υ(λ_d, s, i) reconstructed from the table, for cross-checks.
    pub fn upsilon(&self, c_d: f64, lambda_d: f64, s: f64, i: usize) -> Result<f64, MathError> {
        check_args(lambda_d, s, i)?;
        let u = c_d * lambda_d * s.powf(self.delta);
        let mut moments = vec![0.0; i + 1];
        self.scaled_moments(u, &mut moments);
        let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * moments[i] * (ln_gamma(i as f64 + 1.0) - i as f64 * s.ln()).exp())
    }
}
