//! Gauss–Legendre rules and the doubling driver used for expectations over
//! the BS–user distance.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

/// Node/weight pairs on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from Tricomi's initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for k in 0..n.div_ceil(2) {
            let theta = PI * (k as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            weights[k] = w;
            nodes[n - 1 - k] = x;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Cached rule for `n` nodes.
    pub fn shared(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(rule) = cache.read().expect("quadrature cache").get(&n) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(GaussLegendre::new(n));
        cache
            .write()
            .expect("quadrature cache")
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Controls the node-doubling loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub target_rel_tol: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    /// 64 nodes, doubling up to 1024, relative tolerance 1e-6.
    fn default() -> Self {
        Self {
            nodes: 64,
            target_rel_tol: 1e-6,
            max_doublings: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes < 8 {
            return Err(format!("quadrature needs >= 8 nodes, got {}", self.nodes));
        }
        if !(self.target_rel_tol > 0.0 && self.target_rel_tol <= 1e-3) {
            return Err(format!(
                "target_rel_tol must lie in (0, 1e-3], got {}",
                self.target_rel_tol
            ));
        }
        Ok(())
    }
}

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

/// Integrates with `spec.nodes`, then keeps doubling until two successive
/// estimates agree to `target_rel_tol` or `max_doublings` is spent.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    spec: &QuadratureSpec,
    a: f64,
    b: f64,
    mut f: F,
) -> QuadratureOutcome {
    let mut n = spec.nodes;
    let mut est = GaussLegendre::shared(n).integrate(a, b, &mut f);
    for _ in 0..spec.max_doublings {
        n *= 2;
        let next = GaussLegendre::shared(n).integrate(a, b, &mut f);
        let scale = next.abs().max(1e-300);
        let done = (next - est).abs() <= spec.target_rel_tol * scale || (next - est).abs() < 1e-15;
        est = next;
        if done {
            return QuadratureOutcome {
                value: est,
                nodes_used: n,
                converged: true,
            };
        }
    }
    QuadratureOutcome {
        value: est,
        nodes_used: n,
        converged: spec.max_doublings == 0,
    }
}
