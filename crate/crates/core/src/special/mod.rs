//! Special functions and combinatorics behind the closed-form coverage
//! expressions.

mod beta;
mod faa_di_bruno;
mod gamma;
mod partitions;

pub use beta::{complete_beta, incomplete_beta, regularized_incomplete_beta};
pub use faa_di_bruno::{
    laplace_derivatives_by_recurrence, upsilon, upsilon_with, BellTable, PARTITION_TABLE_MAX_ORDER,
};
pub use gamma::{gamma, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use partitions::{
    enumerate_partitions, for_each_partition, IntegerPartition, PARTITION_GUARD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("order {requested} exceeds the enumeration guard {limit}")]
    GuardExceeded { requested: usize, limit: usize },
}

/// Normalized sinc, sin(πx)/(πx), with the removable singularity filled in.
pub fn sinc_norm(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    // sin(πx) loses relative precision near integers when computed as
    // sin(PI * x); reduce the argument first.
    let r = x - 2.0 * (x / 2.0).round();
    let s = if r.fract() == 0.0 {
        0.0
    } else {
        (std::f64::consts::PI * r).sin()
    };
    s / (std::f64::consts::PI * x)
}

/// Integer binomial coefficient C(n, k) as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    // exact below 2^53
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Generalized binomial coefficient C(x, k) = x(x−1)…(x−k+1)/k! by the
/// product form.
pub fn generalized_binomial(x: f64, k: u64) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc *= (x - j as f64) / (j + 1) as f64;
    }
    acc
}

/// C(x, k) through Γ(x+1)/(Γ(k+1)Γ(x−k+1)); requires x − k + 1 > 0.
pub fn generalized_binomial_gamma(x: f64, k: u64) -> Result<f64, MathError> {
    let k = k as f64;
    if !(x - k + 1.0 > 0.0) {
        return Err(MathError::Domain(format!(
            "gamma form of C({x}, {k}) needs x - k + 1 > 0"
        )));
    }
    Ok((ln_gamma(x + 1.0) - ln_gamma(k + 1.0) - ln_gamma(x - k + 1.0)).exp())
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Σ|terms|, for condition estimates.
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }

    /// Σ|terms| / |Σ terms|; 1 when every term has the same sign.
    pub fn condition(&self) -> f64 {
        let v = self.value().abs();
        if self.abs_sum == 0.0 {
            1.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            self.abs_sum / v
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
