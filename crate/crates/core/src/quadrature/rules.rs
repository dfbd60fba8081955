//! Gauss-Legendre rule generation with a process-wide cache.

use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the n-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Integrates polynomials of degree `<= 2n−1` exactly. Nodes are the roots of
/// the Legendre polynomial `P_n`, found by Newton iteration on the three-term
/// recurrence; weights are `2 / ((1−x²) P_n'(x)²)`.
pub fn gauss_legendre_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = cached_rule(n)?;
    Ok((rule.0.clone(), rule.1.clone()))
}

pub(crate) type Rule = Arc<(Vec<f64>, Vec<f64>)>;

pub(crate) fn cached_rule(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "Gauss-Legendre rule requires n >= 1".into(),
        ));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    if let Some(rule) = guard.get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(compute_rule(n));
    guard.insert(n, rule.clone());
    Ok(rule)
}

/// Legendre polynomial value and derivative at `x` via the recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        // Tricomi-style initial guess for the i-th positive-side root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_pair(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}
