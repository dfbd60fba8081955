//! Adaptive integration on an interval: embedded Gauss-Legendre pairs with
//! bisection for smooth integrands, and a tanh-sinh (double-exponential)
//! substitution when endpoint singularities are declared.

use super::rules::cached_rule;
use super::{IntegrationResult, QuadratureSpec};
use crate::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A quadrature node on `[a, b]` carrying numerically stable distances to
/// both endpoints. Near an endpoint, `t` itself rounds while the distance
/// stays exact; integrands built from closed forms should prefer the
/// distances.
#[derive(Debug, Clone, Copy)]
pub struct TPoint {
    pub t: f64,
    pub from_left: f64,
    pub from_right: f64,
}

impl TPoint {
    fn interior(a: f64, b: f64, t: f64) -> Self {
        Self {
            t,
            from_left: t - a,
            from_right: b - t,
        }
    }
}

/// Which endpoints of the interval carry an integrable singularity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EndpointSingularities {
    pub left: bool,
    pub right: bool,
}

impl EndpointSingularities {
    pub fn both() -> Self {
        Self {
            left: true,
            right: true,
        }
    }

    pub fn any(&self) -> bool {
        self.left || self.right
    }
}

/// Integrates `f` over `[a, b]`.
///
/// With a singularity flag set, a double-exponential change of variable is
/// applied so integrable endpoint blow-ups (`t^{-γ}`, `γ < 1`) converge.
/// Non-convergence within the depth budget is reported through
/// `converged = false`, never silently.
pub fn integrate_interval(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    endpoints: EndpointSingularities,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    integrate_interval_nodes(|tp: &TPoint| f(tp.t), a, b, endpoints, spec)
}

/// Node-aware variant of [`integrate_interval`]: the integrand receives
/// stable endpoint distances, which closed-form integrands with endpoint
/// blow-ups need to stay accurate once `t` itself rounds to `a` or `b`.
pub fn integrate_interval_nodes(
    f: impl Fn(&TPoint) -> Complex64,
    a: f64,
    b: f64,
    endpoints: EndpointSingularities,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    spec.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "interval bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if endpoints.any() {
        tanh_sinh(&f, a, b, spec)
    } else {
        adaptive_gauss(&f, a, b, spec)
    }
}

struct Cell {
    lo: f64,
    hi: f64,
    depth: u32,
    value: Complex64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn eval_cell(
    f: &impl Fn(&TPoint) -> Complex64,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    depth: u32,
    spec: &QuadratureSpec,
) -> Result<Cell> {
    let coarse = cached_rule(spec.base_order)?;
    let fine = cached_rule(2 * spec.base_order)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut sum_fine = Complex64::new(0.0, 0.0);
    let mut fine_values = Vec::with_capacity(fine.0.len());
    for (&x, &w) in fine.0.iter().zip(&fine.1) {
        let t = mid + half * x;
        let v = f(&TPoint::interior(a, b, t));
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteSample(Complex64::new(t, 0.0)));
        }
        fine_values.push(v);
        sum_fine += w * v;
    }
    let mut sum_coarse = Complex64::new(0.0, 0.0);
    for (&x, &w) in coarse.0.iter().zip(&coarse.1) {
        let t = mid + half * x;
        let v = f(&TPoint::interior(a, b, t));
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteSample(Complex64::new(t, 0.0)));
        }
        sum_coarse += w * v;
    }
    let value = half * sum_fine;
    let err = (half * (sum_fine - sum_coarse)).norm();
    Ok(Cell {
        lo,
        hi,
        depth,
        value,
        err,
    })
}

fn adaptive_gauss(
    f: &impl Fn(&TPoint) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    const MAX_CELLS: usize = 100_000;
    let mut heap = BinaryHeap::new();
    let root = eval_cell(f, a, b, a, b, 0, spec)?;
    let mut total = root.value;
    let mut total_err = root.err;
    heap.push(root);
    let mut saturated: Vec<Cell> = Vec::new();
    let mut since_resum = 0usize;

    loop {
        // Counter the drift of incremental updates with a periodic exact resum.
        if since_resum >= 512 {
            total = heap.iter().map(|c| c.value).sum::<Complex64>()
                + saturated.iter().map(|c| c.value).sum::<Complex64>();
            total_err = heap.iter().map(|c| c.err).sum::<f64>()
                + saturated.iter().map(|c| c.err).sum::<f64>();
            since_resum = 0;
        }
        let tol = spec.tolerance_for(total.norm());
        let cells = heap.len() + saturated.len();
        if total_err <= tol || heap.is_empty() || cells >= MAX_CELLS {
            let value = heap.iter().map(|c| c.value).sum::<Complex64>()
                + saturated.iter().map(|c| c.value).sum::<Complex64>();
            let err = heap.iter().map(|c| c.err).sum::<f64>()
                + saturated.iter().map(|c| c.err).sum::<f64>();
            return Ok(IntegrationResult {
                value,
                error_estimate: err,
                cells_used: cells,
                converged: err <= spec.tolerance_for(value.norm()),
            });
        }
        let worst = heap.pop().expect("checked non-empty");
        total -= worst.value;
        total_err -= worst.err;
        let mid = 0.5 * (worst.lo + worst.hi);
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let child = eval_cell(f, a, b, lo, hi, worst.depth + 1, spec)?;
            total += child.value;
            total_err += child.err;
            // Cells the bisection can no longer improve park in `saturated`.
            if child.depth >= spec.max_depth {
                saturated.push(child);
            } else {
                heap.push(child);
            }
        }
        since_resum += 1;
    }
}

/// Fixed tanh-sinh grid on `[a, b]` at the given level: nodes and weights of
/// the double-exponential trapezoid rule with step `2^{-level}`, endpoint
/// distances computed stably, nodes whose parameter has rounded onto an
/// endpoint dropped. The flag marks nodes shared with the level below
/// (even multiples of the step), which gives a free embedded error estimate.
/// Deterministic and reusable; the workhorse behind the kernel-limit curves
/// where each node evaluation is itself expensive.
pub fn tanh_sinh_grid(a: f64, b: f64, level: u32, u_max: f64) -> Vec<(TPoint, f64, bool)> {
    let r = 0.5 * (b - a);
    let h = 0.5f64.powi(level as i32);
    let mut out = Vec::new();
    let mut push = |u: f64, on_coarse: bool| -> bool {
        let w_arg = std::f64::consts::FRAC_PI_2 * u.sinh();
        let e2 = (-2.0 * w_arg.abs()).exp();
        let dist = r * 2.0 * e2 / (1.0 + e2);
        if dist <= 0.0 {
            return false;
        }
        let sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
        let weight = std::f64::consts::FRAC_PI_2 * u.cosh() * sech2 * h * r;
        if weight == 0.0 {
            return false;
        }
        let tp = if u >= 0.0 {
            TPoint {
                t: b - dist,
                from_left: (b - a) - dist,
                from_right: dist,
            }
        } else {
            TPoint {
                t: a + dist,
                from_left: dist,
                from_right: (b - a) - dist,
            }
        };
        if !(tp.t > a && tp.t < b) {
            return false;
        }
        out.push((tp, weight, on_coarse));
        true
    };
    push(0.0, true);
    for side in [1.0f64, -1.0] {
        let mut j = 1u64;
        loop {
            let u = side * j as f64 * h;
            if u.abs() > u_max || !push(u, j.is_multiple_of(2)) {
                break;
            }
            j += 1;
        }
    }
    out
}

/// Level-doubling tanh-sinh rule: `x = m + r·tanh((π/2)·sinh(u))` turns
/// integrable endpoint singularities into double-exponentially decaying tails
/// in `u`. Endpoint distances are computed in the cancellation-free form
/// `r·2e^{-2w}/(1+e^{-2w})`, so nodes squeeze toward the endpoints well below
/// the spacing of `f64` around them.
fn tanh_sinh(
    f: &impl Fn(&TPoint) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    let r = 0.5 * (b - a);
    let max_level = spec.max_depth.min(12);
    let mut evals = 0usize;

    // Contribution of the node at parameter u (one side), or None once the
    // node has collapsed onto an endpoint or blown up there.
    let node_term = |u: f64, evals: &mut usize| -> Option<Complex64> {
        let w_arg = std::f64::consts::FRAC_PI_2 * u.sinh();
        let e2 = (-2.0 * w_arg.abs()).exp();
        let dist = r * 2.0 * e2 / (1.0 + e2); // distance to the near endpoint
        if dist <= 0.0 {
            return None;
        }
        let sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
        let weight = std::f64::consts::FRAC_PI_2 * u.cosh() * sech2;
        if weight == 0.0 {
            return None;
        }
        let tp = if u >= 0.0 {
            TPoint {
                t: b - dist,
                from_left: (b - a) - dist,
                from_right: dist,
            }
        } else {
            TPoint {
                t: a + dist,
                from_left: dist,
                from_right: (b - a) - dist,
            }
        };
        *evals += 1;
        let v = f(&tp);
        if !v.re.is_finite() || !v.im.is_finite() {
            // Underflow-adjacent blow-up at a declared singular endpoint:
            // contributes below the representable scale, so truncate.
            return None;
        }
        Some(weight * v)
    };

    let mut h = 1.0f64;
    let center = node_term(0.0, &mut evals).unwrap_or(Complex64::new(0.0, 0.0));
    let mut sum = center;
    // March outward at level 0 (integer u).
    for side in [1.0, -1.0] {
        let mut consecutive_tiny = 0;
        let mut j = 1u32;
        while let Some(term) = node_term(side * j as f64, &mut evals) {
            sum += term;
            if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
                consecutive_tiny += 1;
                if consecutive_tiny >= 2 {
                    break;
                }
            } else {
                consecutive_tiny = 0;
            }
            j += 1;
            if j > 60 {
                break;
            }
        }
    }

    let mut value = r * h * sum;
    let mut prev_value = value;
    let mut err = f64::INFINITY;
    let mut converged = false;

    for _level in 1..=max_level {
        h *= 0.5;
        // New nodes at odd multiples of the refined step.
        for side in [1.0, -1.0] {
            let mut consecutive_tiny = 0;
            let mut j = 1u64;
            while let Some(term) = node_term(side * (j as f64) * h, &mut evals) {
                sum += term;
                if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
                    consecutive_tiny += 1;
                    if consecutive_tiny >= 2 {
                        break;
                    }
                } else {
                    consecutive_tiny = 0;
                }
                j += 2;
                if (j as f64) * h > 60.0 {
                    break;
                }
            }
        }
        value = r * h * sum;
        err = (value - prev_value).norm();
        let tol = spec.tolerance_for(value.norm());
        if err <= tol {
            converged = true;
            break;
        }
        prev_value = value;
    }

    Ok(IntegrationResult {
        value,
        error_estimate: err.min(f64::MAX),
        cells_used: evals,
        converged,
    })
}
