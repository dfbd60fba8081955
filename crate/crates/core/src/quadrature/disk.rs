//! Adaptive integration over the unit disk against the normalized weighted
//! measure `dA_α = (1+α)(1−|z|²)^α dA`, `∫_D dA = 1`.
//!
//! Polar tensor-product Gauss-Legendre cells with embedded error estimation
//! (order n against 2n per axis) and anisotropic adaptive bisection. The
//! radial variable is graded toward the boundary by `r = 1 − σ^γ` and the
//! angular variable is graded toward declared singular directions, so that
//! boundary layers far below the spacing of `f64` around the singularity
//! remain resolvable. Nodes carry cancellation-free distances for integrands
//! that know how to use them.

use super::rules::cached_rule;
use super::{IntegrationResult, QuadratureSpec};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// At most this many singular boundary directions may be declared per
/// integral; the built-in kernels use one or two.
pub const MAX_SINGULAR_DIRECTIONS: usize = 4;

/// Below this distance from the boundary, a non-finite integrand sample next
/// to a declared singular direction is treated as zero: the layer is beyond
/// what pointwise `f64` evaluation can represent, and its mass is exactly
/// what the surviving graded cells approximate.
const TRUNCATION_DELTA: f64 = 1e-13;

/// A disk quadrature node. `one_minus_r` is exact even where `|z|` rounds to
/// 1, and angular offsets to declared singular directions stay exact down to
/// the graded resolution.
#[derive(Debug, Clone, Copy)]
pub struct DiskNode {
    pub z: Complex64,
    /// Distance to the boundary, `1 − |z|`.
    pub one_minus_r: f64,
    /// Absolute angle of the node.
    pub theta: f64,
    sing: [(f64, f64); MAX_SINGULAR_DIRECTIONS],
    n_sing: u8,
}

impl DiskNode {
    /// Signed angular offset `θ − θ_ξ` to the declared singular direction at
    /// `angle`, exact near that direction; falls back to a plain wrapped
    /// difference for undeclared angles.
    pub fn angular_offset(&self, angle: f64) -> f64 {
        let target = wrap_angle(angle);
        for k in 0..self.n_sing as usize {
            let (a, off) = self.sing[k];
            if (a - target).abs() < 1e-12 {
                return off;
            }
        }
        wrap_angle(self.theta - target)
    }

    /// `|e^{i·angle} − z|²` without cancellation.
    pub fn boundary_dist_sq(&self, angle: f64) -> f64 {
        let dt = self.angular_offset(angle);
        let d = self.one_minus_r;
        let s = (0.5 * dt).sin();
        d * d + 4.0 * (1.0 - d) * s * s
    }

    /// `1 − conj(ξ)·z` for `ξ = e^{i·angle}`, stable near ξ. Its real part is
    /// positive on the open disk, so principal powers of it are unambiguous.
    pub fn one_minus_conj_z(&self, angle: f64) -> Complex64 {
        let dt = self.angular_offset(angle);
        let d = self.one_minus_r;
        let s = (0.5 * dt).sin();
        Complex64::new(d + 2.0 * (1.0 - d) * s * s, -(1.0 - d) * dt.sin())
    }
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = a % two_pi;
    if x > std::f64::consts::PI {
        x -= two_pi;
    } else if x <= -std::f64::consts::PI {
        x += two_pi;
    }
    x
}

/// Integrates `f` over the unit disk against `dA_α`.
///
/// A singular boundary point declared in the spec seeds and grades the
/// angular subdivision around it. A non-finite sample away from the boundary
/// truncation layer is a hard error naming the sample point.
pub fn integrate_disk(
    f: impl Fn(Complex64) -> Complex64 + Sync,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    let angles: Vec<f64> = spec
        .singular_point
        .iter()
        .map(|xi| xi.arg())
        .collect();
    integrate_disk_nodes(|node: &DiskNode| f(node.z), alpha, &angles, spec)
}

/// Node-aware variant of [`integrate_disk`] supporting several declared
/// singular directions; integrands receive stable boundary distances.
pub fn integrate_disk_nodes(
    f: impl Fn(&DiskNode) -> Complex64 + Sync,
    alpha: f64,
    singular_angles: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    integrate_disk_nodes_truncated(f, alpha, singular_angles, spec, 0.0)
}

/// Integration over the truncated disk `{1 − |z| ≥ delta_min}`. The cut runs
/// along a radial seed boundary, so no cell straddles it; ratio-normalized
/// computations use one cut for numerator and denominator, cancelling the
/// boundary layer that pointwise `f64` evaluation cannot resolve anyway.
pub fn integrate_disk_nodes_truncated(
    f: impl Fn(&DiskNode) -> Complex64 + Sync,
    alpha: f64,
    singular_angles: &[f64],
    spec: &QuadratureSpec,
    delta_min: f64,
) -> Result<IntegrationResult> {
    spec.validate()?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    if singular_angles.len() > MAX_SINGULAR_DIRECTIONS {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_SINGULAR_DIRECTIONS} singular directions supported, got {}",
            singular_angles.len()
        )));
    }
    let mut angles: Vec<f64> = singular_angles.iter().map(|&a| wrap_angle(a)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    if !(0.0..0.5).contains(&delta_min) {
        return Err(Error::InvalidParameter(format!(
            "delta_min must lie in [0, 0.5), got {delta_min}"
        )));
    }
    let arcs = build_arcs(&angles);
    let integrator = DiskIntegrator {
        f: &f,
        alpha,
        arcs,
        angles,
        spec,
        sigma_min: if delta_min > 0.0 {
            delta_min.powf(1.0 / spec.grading_exponent)
        } else {
            0.0
        },
    };
    integrator.run()
}

/// An angular arc anchored at `anchor`; `θ(u) = anchor + dir·span·w(u)` with
/// `w(u) = u^q` when graded (the anchor is then a singular direction) and
/// `w(u) = u` otherwise. Grading only ever sits at `u = 0`, where the cell
/// coordinate itself is exact.
#[derive(Debug, Clone, Copy)]
struct ArcSpec {
    anchor: f64,
    dir: f64,
    span: f64,
    graded: bool,
}

fn build_arcs(angles: &[f64]) -> Vec<ArcSpec> {
    if angles.is_empty() {
        return (0..4)
            .map(|k| ArcSpec {
                anchor: -std::f64::consts::PI + k as f64 * std::f64::consts::FRAC_PI_2,
                dir: 1.0,
                span: std::f64::consts::FRAC_PI_2,
                graded: false,
            })
            .collect();
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = angles.len();
    let mut arcs = Vec::with_capacity(2 * k);
    for i in 0..k {
        let a = angles[i];
        let b = if i + 1 < k {
            angles[i + 1]
        } else {
            angles[0] + two_pi
        };
        let half = 0.5 * (b - a);
        // Two half-arcs marching away from each singular endpoint.
        arcs.push(ArcSpec {
            anchor: a,
            dir: 1.0,
            span: half,
            graded: true,
        });
        arcs.push(ArcSpec {
            anchor: b,
            dir: -1.0,
            span: half,
            graded: true,
        });
    }
    arcs
}

struct RowData {
    delta: f64,
    r: f64,
    total_weight: f64, // GL weight × radial measure factor
}

struct ColData {
    theta: f64,
    cos_t: f64,
    sin_t: f64,
    total_weight: f64, // GL weight × angular measure factor
    sing: [(f64, f64); MAX_SINGULAR_DIRECTIONS],
    n_sing: u8,
}

struct DiskCell {
    arc: usize,
    u0: f64,
    u1: f64,
    s0: f64,
    s1: f64,
    depth_u: u32,
    depth_s: u32,
    value: Complex64,
    err: f64,
    err_s: f64,
    err_u: f64,
}

impl PartialEq for DiskCell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for DiskCell {}
impl PartialOrd for DiskCell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for DiskCell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

struct DiskIntegrator<'a, F: Fn(&DiskNode) -> Complex64 + Sync> {
    f: &'a F,
    alpha: f64,
    arcs: Vec<ArcSpec>,
    angles: Vec<f64>,
    spec: &'a QuadratureSpec,
    sigma_min: f64,
}

impl<F: Fn(&DiskNode) -> Complex64 + Sync> DiskIntegrator<'_, F> {
    fn radial_rows(&self, s0: f64, s1: f64, order: usize) -> Result<(Vec<RowData>, f64)> {
        let rule = cached_rule(order)?;
        let gamma = self.spec.grading_exponent;
        let mid = 0.5 * (s0 + s1);
        let half = 0.5 * (s1 - s0);
        let rows = rule
            .0
            .iter()
            .zip(&rule.1)
            .map(|(&x, &w)| {
                let sigma = mid + half * x;
                let delta = sigma.powf(gamma);
                let r = 1.0 - delta;
                // (1+α)(1−r²)^α · r · γσ^{γ−1}, with 1−r² = δ(2−δ).
                let weight_alpha = if self.alpha == 0.0 {
                    1.0
                } else {
                    (1.0 + self.alpha) * (delta * (2.0 - delta)).powf(self.alpha)
                };
                let measure = weight_alpha * r * gamma * sigma.powf(gamma - 1.0);
                RowData {
                    delta,
                    r,
                    total_weight: w * measure,
                }
            })
            .collect();
        Ok((rows, half))
    }

    fn angular_cols(&self, arc: &ArcSpec, u0: f64, u1: f64, order: usize) -> Result<(Vec<ColData>, f64)> {
        let rule = cached_rule(order)?;
        let q = self.spec.grading_exponent;
        let mid = 0.5 * (u0 + u1);
        let half = 0.5 * (u1 - u0);
        let cols = rule
            .0
            .iter()
            .zip(&rule.1)
            .map(|(&x, &w)| {
                let u = mid + half * x;
                let (wmap, wprime) = if arc.graded {
                    (u.powf(q), q * u.powf(q - 1.0))
                } else {
                    (u, 1.0)
                };
                let offset_anchor = arc.dir * arc.span * wmap;
                let theta = arc.anchor + offset_anchor;
                let measure = arc.span * wprime / std::f64::consts::PI;
                let mut sing = [(0.0, 0.0); MAX_SINGULAR_DIRECTIONS];
                for (k, &a) in self.angles.iter().enumerate() {
                    let off = if (a - wrap_angle(arc.anchor)).abs() < 1e-12 {
                        offset_anchor
                    } else {
                        wrap_angle(theta - a)
                    };
                    sing[k] = (a, off);
                }
                ColData {
                    theta,
                    cos_t: theta.cos(),
                    sin_t: theta.sin(),
                    total_weight: w * measure,
                    sing,
                    n_sing: self.angles.len() as u8,
                }
            })
            .collect();
        Ok((cols, half))
    }

    fn grid_sum(&self, rows: &[RowData], cols: &[ColData]) -> Result<Complex64> {
        let row_sums: Result<Vec<Complex64>> = if rayon::current_num_threads() > 1 && rows.len() >= 8
        {
            rows.par_iter().map(|row| self.row_sum(row, cols)).collect()
        } else {
            rows.iter().map(|row| self.row_sum(row, cols)).collect()
        };
        Ok(row_sums?.into_iter().sum())
    }

    fn row_sum(&self, row: &RowData, cols: &[ColData]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for col in cols {
            let node = DiskNode {
                z: Complex64::new(row.r * col.cos_t, row.r * col.sin_t),
                one_minus_r: row.delta,
                theta: col.theta,
                sing: col.sing,
                n_sing: col.n_sing,
            };
            let mut v = (self.f)(&node);
            if !v.re.is_finite() || !v.im.is_finite() {
                if row.delta < TRUNCATION_DELTA {
                    v = Complex64::new(0.0, 0.0);
                } else {
                    return Err(Error::NonFiniteSample(node.z));
                }
            }
            acc += v * (row.total_weight * col.total_weight);
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn eval_cell(
        &self,
        arc_idx: usize,
        u0: f64,
        u1: f64,
        s0: f64,
        s1: f64,
        depth_u: u32,
        depth_s: u32,
    ) -> Result<DiskCell> {
        let arc = &self.arcs[arc_idx];
        let n = self.spec.base_order;
        let (rows_fine, half_s) = self.radial_rows(s0, s1, 2 * n)?;
        let (rows_coarse, _) = self.radial_rows(s0, s1, n)?;
        let (cols_fine, half_u) = self.angular_cols(arc, u0, u1, 2 * n)?;
        let (cols_coarse, _) = self.angular_cols(arc, u0, u1, n)?;
        let scale = half_s * half_u;
        let i_ff = self.grid_sum(&rows_fine, &cols_fine)? * scale;
        let i_cf = self.grid_sum(&rows_coarse, &cols_fine)? * scale;
        let i_fc = self.grid_sum(&rows_fine, &cols_coarse)? * scale;
        let err_s = (i_ff - i_cf).norm();
        let err_u = (i_ff - i_fc).norm();
        Ok(DiskCell {
            arc: arc_idx,
            u0,
            u1,
            s0,
            s1,
            depth_u,
            depth_s,
            value: i_ff,
            err: err_s + err_u,
            err_s,
            err_u,
        })
    }

    fn run(&self) -> Result<IntegrationResult> {
        const MAX_CELLS: usize = 30_000;
        let max_depth = self.spec.max_depth;
        let mut heap: BinaryHeap<DiskCell> = BinaryHeap::new();
        let mut saturated: Vec<DiskCell> = Vec::new();
        let mut saturated_err = 0.0f64;
        let mut total = Complex64::new(0.0, 0.0);
        let mut total_err = 0.0f64;

        let s_lo = self.sigma_min;
        for arc_idx in 0..self.arcs.len() {
            for (u0, u1) in [(0.0, 0.5), (0.5, 1.0)] {
                for (s0, s1) in [(s_lo, 0.5), (0.5, 1.0)] {
                    let cell = self.eval_cell(arc_idx, u0, u1, s0, s1, 0, 0)?;
                    total += cell.value;
                    total_err += cell.err;
                    heap.push(cell);
                }
            }
        }

        let mut since_resum = 0usize;
        loop {
            if since_resum >= 512 {
                total = heap.iter().map(|c| c.value).sum::<Complex64>()
                    + saturated.iter().map(|c| c.value).sum::<Complex64>();
                total_err = heap.iter().map(|c| c.err).sum::<f64>()
                    + saturated.iter().map(|c| c.err).sum::<f64>();
                since_resum = 0;
            }
            let tol = self.spec.tolerance_for(total.norm());
            let cells = heap.len() + saturated.len();
            // Depth-saturated cells can no longer improve; once their error
            // alone blocks the tolerance, further refinement is pointless.
            let stalled = saturated_err > tol;
            if total_err <= tol || stalled || heap.is_empty() || cells >= MAX_CELLS {
                let value = heap.iter().map(|c| c.value).sum::<Complex64>()
                    + saturated.iter().map(|c| c.value).sum::<Complex64>();
                let err = heap.iter().map(|c| c.err).sum::<f64>()
                    + saturated.iter().map(|c| c.err).sum::<f64>();
                return Ok(IntegrationResult {
                    value,
                    error_estimate: err,
                    cells_used: cells,
                    converged: err <= self.spec.tolerance_for(value.norm()),
                });
            }

            let worst = heap.pop().expect("checked non-empty");
            total -= worst.value;
            total_err -= worst.err;

            let can_split_s = worst.depth_s < max_depth && (worst.s1 - worst.s0) > 1e-12;
            let can_split_u = worst.depth_u < max_depth && (worst.u1 - worst.u0) > 1e-12;
            let split_s = match (can_split_s, can_split_u) {
                (true, true) => worst.err_s >= worst.err_u,
                (true, false) => true,
                (false, true) => false,
                (false, false) => {
                    total += worst.value;
                    total_err += worst.err;
                    saturated_err += worst.err;
                    saturated.push(worst);
                    since_resum += 1;
                    continue;
                }
            };

            let children = if split_s {
                let mid = 0.5 * (worst.s0 + worst.s1);
                [
                    (worst.u0, worst.u1, worst.s0, mid, worst.depth_u, worst.depth_s + 1),
                    (worst.u0, worst.u1, mid, worst.s1, worst.depth_u, worst.depth_s + 1),
                ]
            } else {
                let mid = 0.5 * (worst.u0 + worst.u1);
                [
                    (worst.u0, mid, worst.s0, worst.s1, worst.depth_u + 1, worst.depth_s),
                    (mid, worst.u1, worst.s0, worst.s1, worst.depth_u + 1, worst.depth_s),
                ]
            };
            for (u0, u1, s0, s1, du, ds) in children {
                let cell = self.eval_cell(worst.arc, u0, u1, s0, s1, du, ds)?;
                total += cell.value;
                total_err += cell.err;
                heap.push(cell);
            }
            since_resum += 1;
        }
    }
}
