//! Sampled numerical verification of the direction conditions (a)–(e) and of
//! the integrability/continuity condition on the weights, producing
//! pass/fail/inconclusive evidence per condition.
//!
//! Sampling can certify failure (a witness) but can only support, never
//! prove, the universally quantified conditions; statuses are therefore
//! pass (= supported), fail (= witnessed) or inconclusive, and every report
//! carries that caveat verbatim.

use crate::bergman::{bergman_norm_full, make_power_kernel, ComplexFunction, TestKernel};
use crate::essnorm::chebyshev_grid;
use crate::operators::{AngularDerivative, SymbolFamily};
use crate::quadrature::{
    integrate_interval_nodes, EndpointSingularities, QuadratureSpec, TPoint,
};
use crate::special::{disk_moment, SpaceParams};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

pub const SAMPLING_SEMANTICS: &str = "pass means supported by sampling, fail means witnessed by \
a concrete sample, inconclusive means the grids could not decide; finite sampling cannot prove \
the universally quantified conditions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Status of one condition together with its worst sample.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub status: ConditionStatus,
    pub evidence: String,
    pub worst_t: Option<f64>,
    pub worst_value: f64,
}

impl ConditionReport {
    fn pass(evidence: impl Into<String>, worst_t: Option<f64>, worst_value: f64) -> Self {
        Self {
            status: ConditionStatus::Pass,
            evidence: evidence.into(),
            worst_t,
            worst_value,
        }
    }

    fn fail(evidence: impl Into<String>, worst_t: Option<f64>, worst_value: f64) -> Self {
        Self {
            status: ConditionStatus::Fail,
            evidence: evidence.into(),
            worst_t,
            worst_value,
        }
    }

    fn inconclusive(evidence: impl Into<String>, worst_t: Option<f64>, worst_value: f64) -> Self {
        Self {
            status: ConditionStatus::Inconclusive,
            evidence: evidence.into(),
            worst_t,
            worst_value,
        }
    }
}

/// Sampling controls for the direction and weight checks.
#[derive(Debug, Clone, Serialize)]
pub struct ZGridSpec {
    /// Radii 1 − 2^{-k} for the boundary ladders.
    pub ladder_min_level: i32,
    pub ladder_max_level: i32,
    /// Ball radii for condition (c), largest to smallest.
    pub epsilon_ladder: Vec<f64>,
    /// Angular sample count off the direction.
    pub angular_count: usize,
    /// Horocycle radii for condition (d).
    pub horocycle_radii: Vec<f64>,
    /// Probe points per horocycle.
    pub horocycle_points: usize,
}

impl Default for ZGridSpec {
    fn default() -> Self {
        Self {
            ladder_min_level: 3,
            ladder_max_level: 12,
            epsilon_ladder: vec![0.4, 0.2, 0.1],
            angular_count: 24,
            horocycle_radii: vec![0.05, 0.1],
            horocycle_points: 32,
        }
    }
}

/// Default t-grid: 17 Chebyshev-spaced points in (0.02, 0.98).
pub fn default_t_grid() -> Vec<f64> {
    chebyshev_grid(17)
}

/// Per-condition evidence for the direction conditions of one family.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub family: String,
    pub direction: Complex64,
    pub phi_prime_continuity: ConditionReport,
    pub fixed_point: ConditionReport,
    pub no_other_contact: ConditionReport,
    pub contact_by_epsilon: Vec<(f64, ConditionStatus)>,
    pub horocycle: ConditionReport,
    pub weight_continuity: ConditionReport,
    pub t_grid: Vec<f64>,
    pub semantics: &'static str,
}

impl AdmissibilityReport {
    pub fn all(&self) -> [&ConditionReport; 5] {
        [
            &self.phi_prime_continuity,
            &self.fixed_point,
            &self.no_other_contact,
            &self.horocycle,
            &self.weight_continuity,
        ]
    }
}

fn richardson_real(values: &[f64]) -> f64 {
    let first: Vec<f64> = values.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let second: Vec<f64> = first.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    let third: Vec<f64> = second.windows(2).map(|w| (8.0 * w[1] - w[0]) / 7.0).collect();
    *third
        .last()
        .or(second.last())
        .or(first.last())
        .unwrap_or(&values[values.len() - 1])
}

fn worse(a: ConditionStatus, b: ConditionStatus) -> ConditionStatus {
    use ConditionStatus::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Pass,
    }
}

/// Conditions (a)–(e) for one direction, sampled on the given grids.
pub fn check_direction(
    family: &SymbolFamily,
    xi: Complex64,
    t_grid: &[f64],
    z_spec: &ZGridSpec,
) -> Result<AdmissibilityReport> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty t-grid".into()));
    }
    let ladder: Vec<f64> = (z_spec.ladder_min_level..=z_spec.ladder_max_level)
        .map(|k| 1.0 - 2f64.powi(-k))
        .collect();

    let mut fixed_point =
        ConditionReport::pass("radial limits of phi at the direction", None, 0.0);
    let mut contact_overall =
        ConditionReport::pass("extrapolated |phi| off the direction", None, 0.0);
    let mut contact_by_eps: Vec<(f64, ConditionStatus)> = z_spec
        .epsilon_ladder
        .iter()
        .map(|&e| (e, ConditionStatus::Pass))
        .collect();
    let mut horocycle =
        ConditionReport::pass("horocycle probes attained by Newton inversion", None, 0.0);
    let mut phi_prime_cont =
        ConditionReport::pass("oscillation of phi' on shrinking balls", None, 0.0);
    let mut weight_cont = ConditionReport::pass("oscillation of u on shrinking balls", None, 0.0);

    for &t in t_grid {
        let pair = family.at(t);
        let compact = matches!(
            family.boundary_data(
                &TPoint {
                    t,
                    from_left: t,
                    from_right: 1.0 - t
                },
                xi
            ),
            Ok(data) if matches!(data.phi_prime, AngularDerivative::Infinite)
        );
        if compact {
            continue;
        }

        // (b) φ_t(ξ) = ξ via radial limits.
        let dists: Vec<f64> = ladder
            .iter()
            .map(|&r| (pair.phi().evaluate(r * xi) - xi).norm())
            .collect();
        let limit = richardson_real(&dists).abs();
        if limit > 1e-4 {
            if limit > fixed_point.worst_value || fixed_point.status != ConditionStatus::Fail {
                fixed_point = ConditionReport::fail(
                    format!("radial limit of |phi-xi| stays at {limit:.3e}"),
                    Some(t),
                    limit,
                );
            }
        } else if limit > 1e-6 && fixed_point.status == ConditionStatus::Pass {
            fixed_point = ConditionReport::inconclusive(
                format!("radial limit of |phi-xi| only reaches {limit:.3e}"),
                Some(t),
                limit,
            );
        } else if fixed_point.status == ConditionStatus::Pass && limit > fixed_point.worst_value {
            fixed_point.worst_t = Some(t);
            fixed_point.worst_value = limit;
        }

        // (c) closure of φ(D∖B(ξ,ε)) stays off the circle, per ε rung.
        for (eps_idx, &eps) in z_spec.epsilon_ladder.iter().enumerate() {
            let mut sup_limit: f64 = 0.0;
            let mut witness_angle = 0.0;
            for j in 0..z_spec.angular_count {
                let theta = xi.arg()
                    + 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / z_spec.angular_count as f64;
                let dir = Complex64::from_polar(1.0, theta);
                if (dir - xi).norm() <= eps {
                    continue;
                }
                let values: Vec<f64> = ladder
                    .iter()
                    .map(|&r| pair.phi().evaluate(r * dir).norm())
                    .collect();
                let limit = richardson_real(&values).min(1.0);
                if limit > sup_limit {
                    sup_limit = limit;
                    witness_angle = theta;
                }
            }
            let status = if sup_limit >= 1.0 - 1e-9 {
                ConditionStatus::Fail
            } else if sup_limit > 1.0 - 1e-6 {
                ConditionStatus::Inconclusive
            } else {
                ConditionStatus::Pass
            };
            contact_by_eps[eps_idx].1 = worse(contact_by_eps[eps_idx].1, status);
            if status != ConditionStatus::Pass && sup_limit > contact_overall.worst_value {
                let msg = format!(
                    "extrapolated |phi| reaches {sup_limit:.9} at angle {witness_angle:.4} (eps = {eps})"
                );
                contact_overall = match status {
                    ConditionStatus::Fail => ConditionReport::fail(msg, Some(t), sup_limit),
                    _ => ConditionReport::inconclusive(msg, Some(t), sup_limit),
                };
            } else if status == ConditionStatus::Pass
                && contact_overall.status == ConditionStatus::Pass
                && sup_limit > contact_overall.worst_value
            {
                contact_overall.worst_t = Some(t);
                contact_overall.worst_value = sup_limit;
            }
        }

        // (d) horocycle probes by damped Newton inversion near ξ. The probe
        // radii scale with the member's image size (|ξ − φ(0)| as a proxy):
        // a member hugging the boundary only contains correspondingly thin
        // horocycles.
        let image_scale = (xi - pair.phi().evaluate(Complex64::new(0.0, 0.0)))
            .norm()
            .clamp(1e-6, 1.0);
        for &base_radius in &z_spec.horocycle_radii {
            let radius = base_radius * image_scale;
            for j in 1..z_spec.horocycle_points {
                let psi = 2.0 * std::f64::consts::PI * j as f64 / z_spec.horocycle_points as f64;
                let w = (1.0 - radius) * xi + radius * xi * Complex64::from_polar(1.0, psi);
                if w.norm() >= 1.0 - 1e-9 {
                    continue;
                }
                match newton_invert(&pair, w) {
                    Some(z) if z.norm() < 1.0 && (z - xi).norm() < 0.45 => {
                        let dist = (z - xi).norm();
                        if horocycle.status == ConditionStatus::Pass
                            && dist > horocycle.worst_value
                        {
                            horocycle.worst_t = Some(t);
                            horocycle.worst_value = dist;
                        }
                    }
                    _ => {
                        if horocycle.status == ConditionStatus::Pass {
                            horocycle = ConditionReport::inconclusive(
                                format!(
                                    "Newton stalled for the probe at radius {radius}, angle {psi:.3}"
                                ),
                                Some(t),
                                radius,
                            );
                        }
                    }
                }
            }
        }

        // (a) and (e): oscillation of φ' and u on shrinking boundary balls.
        for which in 0..2u8 {
            let report = if which == 0 {
                &mut phi_prime_cont
            } else {
                &mut weight_cont
            };
            let mut oscillations = Vec::new();
            let mut bad_sample = None;
            for k in 0..5 {
                let eps = 0.2 * 0.5f64.powi(k);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let mut any = false;
                for &r in &ladder {
                    for m in -2..=2i32 {
                        let ang = xi.arg() + m as f64 * eps * 0.45;
                        let z = Complex64::from_polar(r, ang);
                        if (z - xi).norm() > eps {
                            continue;
                        }
                        let v = if which == 0 {
                            pair.phi().derivative_at(z)
                        } else {
                            Some(pair.u().evaluate(z))
                        };
                        match v {
                            Some(v) if v.re.is_finite() && v.im.is_finite() => {
                                any = true;
                                lo = lo.min(v.norm());
                                hi = hi.max(v.norm());
                            }
                            _ => bad_sample = Some(z),
                        }
                    }
                }
                if any {
                    oscillations.push(hi - lo);
                }
            }
            if let Some(z) = bad_sample {
                *report = ConditionReport::fail(
                    format!("non-finite sample at {z}"),
                    Some(t),
                    f64::INFINITY,
                );
            } else if let (Some(&first), Some(&last)) = (oscillations.first(), oscillations.last())
            {
                let ok = last <= 0.5 * first + 1e-9 || last < 1e-6;
                if !ok && report.status == ConditionStatus::Pass {
                    *report = ConditionReport::inconclusive(
                        format!("oscillation does not shrink: {first:.3e} -> {last:.3e}"),
                        Some(t),
                        last,
                    );
                } else if ok && report.status == ConditionStatus::Pass && last > report.worst_value
                {
                    report.worst_t = Some(t);
                    report.worst_value = last;
                }
            }
        }
    }

    Ok(AdmissibilityReport {
        family: family.label().to_string(),
        direction: xi,
        phi_prime_continuity: phi_prime_cont,
        fixed_point,
        no_other_contact: contact_overall,
        contact_by_epsilon: contact_by_eps,
        horocycle,
        weight_continuity: weight_cont,
        t_grid: t_grid.to_vec(),
        semantics: SAMPLING_SEMANTICS,
    })
}

fn newton_invert(pair: &crate::operators::SymbolPair, w: Complex64) -> Option<Complex64> {
    let mut z = w;
    let mut residual = (pair.phi().evaluate(z) - w).norm();
    for _ in 0..60 {
        if residual < 1e-11 {
            return Some(z);
        }
        let dphi = pair.phi().derivative_at(z)?;
        if dphi.norm() < 1e-14 {
            return None;
        }
        let full_step = (pair.phi().evaluate(z) - w) / dphi;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = z - scale * full_step;
            if candidate.norm() < 1.0 {
                let r = (pair.phi().evaluate(candidate) - w).norm();
                if r < residual {
                    z = candidate;
                    residual = r;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if residual < 1e-11 {
        Some(z)
    } else {
        None
    }
}

/// A norm probe: a unit-sphere test function used to bound `‖S_t‖` from
/// below.
#[derive(Clone)]
pub enum Probe {
    Kernel(TestKernel),
    Custom {
        function: ComplexFunction,
        label: String,
        /// Marks the probe as a declared divergence witness: sampled
        /// non-integrable growth along it is reported as a failure.
        divergence_witness: bool,
    },
}

impl Probe {
    fn label(&self) -> String {
        match self {
            Probe::Kernel(k) => format!("power kernel (c = {})", k.c),
            Probe::Custom { label, .. } => label.clone(),
        }
    }

    fn is_witness(&self) -> bool {
        matches!(
            self,
            Probe::Custom {
                divergence_witness: true,
                ..
            }
        )
    }
}

/// Monomial probes `z^k/‖z^k‖` for k ∈ {0, 1, 4} plus the power kernel at
/// `c = c*/2`.
pub fn default_probes(space: &SpaceParams, xi: Complex64) -> Result<Vec<Probe>> {
    let mut probes = Vec::new();
    for k in [0u32, 1, 4] {
        let norm = disk_moment(k as f64 * space.p() / 2.0, space.alpha())?.powf(1.0 / space.p());
        probes.push(Probe::Custom {
            function: ComplexFunction::new(move |z| z.powu(k) / norm),
            label: format!("monomial z^{k}"),
            divergence_witness: false,
        });
    }
    probes.push(Probe::Kernel(make_power_kernel(
        0.5 * space.critical_exponent(),
        xi,
        space,
    )?));
    Ok(probes)
}

/// The weight-condition report: integrability of `‖S_t‖` and the local
/// continuity/boundedness conditions near the direction.
#[derive(Debug, Clone, Serialize)]
pub struct WReport {
    pub family: String,
    pub direction: Complex64,
    pub integrability: ConditionReport,
    pub phi_continuity: ConditionReport,
    pub u_continuity: ConditionReport,
    pub u_bound: ConditionReport,
    pub phi_prime_bound: ConditionReport,
    /// Sampled probe lower bounds for `‖S_t‖`.
    pub probe_curve: Vec<(f64, f64)>,
    pub probe_labels: Vec<String>,
    pub t_grid: Vec<f64>,
    pub semantics: &'static str,
}

impl WReport {
    pub fn all(&self) -> [&ConditionReport; 5] {
        [
            &self.integrability,
            &self.phi_continuity,
            &self.u_continuity,
            &self.u_bound,
            &self.phi_prime_bound,
        ]
    }
}

fn probe_norm_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-6,
        abs_tol: 1e-10,
        base_order: 8,
        max_depth: 12,
        grading_exponent: 4.0,
        ..QuadratureSpec::default()
    }
}

/// Lower bound for `‖S_t‖` at one parameter: the best probe response.
fn probe_lower_bound(
    family: &SymbolFamily,
    t: f64,
    probes: &[(Probe, f64)],
    space: &SpaceParams,
) -> Result<f64> {
    let pair = family.at(t);
    let mut best = 0.0f64;
    for (probe, probe_norm) in probes {
        let f = match probe {
            Probe::Kernel(k) => k.function().clone(),
            Probe::Custom { function, .. } => function.clone(),
        };
        let u = pair.u().clone();
        let phi = pair.phi().clone();
        let composed = ComplexFunction::new(move |z| {
            let w = phi.evaluate(z);
            if !(w.norm() < 1.0) {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            u.evaluate(z) * f.evaluate(w)
        })
        .with_singularities(family.directions().to_vec());
        let n = bergman_norm_full(&composed, space, &probe_norm_spec())?;
        best = best.max(n.value / probe_norm);
    }
    Ok(best)
}

/// The weight condition: integrability of `‖S_t‖` judged on the probe lower
/// bounds plus a declared bound when available, and the local t-continuity
/// and boundedness conditions near the direction. Compact members are exempt
/// from the local conditions apart from the uniform continuity of the
/// symbols.
pub fn check_w(
    family: &SymbolFamily,
    xi: Complex64,
    t_grid: &[f64],
    z_spec: &ZGridSpec,
    extra_probes: &[Probe],
    space: &SpaceParams,
) -> Result<WReport> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty t-grid".into()));
    }
    let mut probes: Vec<(Probe, f64)> = Vec::new();
    for probe in default_probes(space, xi)?
        .into_iter()
        .chain(extra_probes.iter().cloned())
    {
        let norm = match &probe {
            Probe::Kernel(_) => 1.0,
            Probe::Custom { function, .. } => {
                bergman_norm_full(function, space, &probe_norm_spec())?.value
            }
        };
        probes.push((probe, norm));
    }
    let probe_labels: Vec<String> = probes.iter().map(|(p, _)| p.label()).collect();
    let has_witness = probes.iter().any(|(p, _)| p.is_witness());

    let mut probe_curve = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        probe_curve.push((t, probe_lower_bound(family, t, &probes, space)?));
    }

    // Integrability: a supplied integrable bound passes; a declared witness
    // probe with sampled non-integrable growth fails; the lower bounds alone
    // can at most leave the question open.
    let bound_at: Vec<Option<f64>> = t_grid.iter().map(|&t| family.norm_bound(t, space)).collect();
    let integrability = if bound_at.iter().all(|b| b.is_some()) {
        let bound_ok = probe_curve
            .iter()
            .zip(&bound_at)
            .all(|((_, lb), b)| *lb <= b.unwrap() * (1.0 + 1e-6));
        if !bound_ok {
            ConditionReport::inconclusive(
                "a probe lower bound exceeds the declared norm bound; the bound is not trusted",
                None,
                0.0,
            )
        } else {
            let integral = integrate_interval_nodes(
                |tp: &TPoint| {
                    Complex64::new(family.norm_bound(tp.t, space).unwrap_or(f64::NAN), 0.0)
                },
                0.0,
                1.0,
                EndpointSingularities::both(),
                &QuadratureSpec::default(),
            )?;
            if integral.converged && integral.value.re.is_finite() {
                ConditionReport::pass(
                    format!(
                        "declared norm bound integrates to {:.6} and dominates the probe curve",
                        integral.value.re
                    ),
                    None,
                    integral.value.re,
                )
            } else {
                ConditionReport::inconclusive(
                    "declared norm bound did not integrate",
                    None,
                    f64::INFINITY,
                )
            }
        }
    } else if has_witness {
        // Growth of the witness curve toward t = 1: each decade of 1−t must
        // scale the lower bound like a non-integrable power.
        let witness_grid = [0.9, 0.99, 0.999];
        let witness_probes: Vec<(Probe, f64)> = probes
            .iter()
            .filter(|(p, _)| p.is_witness())
            .cloned()
            .collect();
        let mut values = Vec::new();
        for &t in &witness_grid {
            values.push(probe_lower_bound(family, t, &witness_probes, space)?);
        }
        let slope = (values[2] / values[0]).ln()
            / ((1.0 - witness_grid[0]) / (1.0 - witness_grid[2])).ln();
        let factors = [values[1] / values[0], values[2] / values[1]];
        // A declared witness carries a non-integrable law (possibly with a
        // logarithmic factor that depresses the raw power fit); the sampled
        // curve corroborates it when every decade of 1−t at least doubles
        // the bound and the fitted exponent is near 1.
        if factors.iter().all(|f| *f > 2.0) && slope >= 0.75 {
            ConditionReport::fail(
                format!(
                    "witness probe lower bounds {:.4e}, {:.4e}, {:.4e} at t = 0.9, 0.99, 0.999:                      decade factors {:.2} and {:.2}, fitted exponent {slope:.3}",
                    values[0], values[1], values[2], factors[0], factors[1]
                ),
                Some(0.999),
                slope,
            )
        } else {
            ConditionReport::inconclusive(
                format!(
                    "witness probe growth (decade factors {:.2}, {:.2}; exponent {slope:.3}) does not corroborate non-integrability",
                    factors[0], factors[1]
                ),
                Some(0.999),
                slope,
            )
        }
    } else {
        ConditionReport::inconclusive(
            "no declared norm bound; probe lower bounds alone cannot certify integrability",
            None,
            probe_curve.iter().map(|(_, v)| *v).fold(0.0, f64::max),
        )
    };

    // Uniform t-continuity of φ (and of u away from ξ): adjacent-pair moduli
    // must shrink under midpoint refinement.
    let interior: Vec<Complex64> = {
        let mut pts = Vec::new();
        for i in 0..6 {
            let r = 0.15 * (i as f64 + 0.5);
            for j in 0..16 {
                let a = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
                pts.push(Complex64::from_polar(r, a));
            }
        }
        pts.push(Complex64::from_polar(0.97, 0.3));
        pts.push(Complex64::from_polar(0.97, 2.7));
        pts
    };
    let sup_diff = |t1: f64, t2: f64, weight: bool| -> f64 {
        let p1 = family.at(t1);
        let p2 = family.at(t2);
        interior
            .iter()
            .map(|&z| {
                if weight {
                    (p1.u().evaluate(z) - p2.u().evaluate(z)).norm()
                } else {
                    (p1.phi().evaluate(z) - p2.phi().evaluate(z)).norm()
                }
            })
            .fold(0.0, f64::max)
    };
    let continuity_check = |weight: bool| -> ConditionReport {
        let mut worst_ratio: f64 = 0.0;
        let mut worst_modulus: f64 = 0.0;
        let mut worst_t = None;
        for w in t_grid.windows(2) {
            let (t1, t2) = (w[0].min(w[1]), w[0].max(w[1]));
            let m = sup_diff(t1, t2, weight);
            let mid = 0.5 * (t1 + t2);
            let m_half = sup_diff(t1, mid, weight).max(sup_diff(mid, t2, weight));
            if m > worst_modulus {
                worst_modulus = m;
                worst_t = Some(mid);
            }
            if m > 1e-12 {
                worst_ratio = worst_ratio.max(m_half / m);
            }
        }
        if worst_modulus <= 1e-12 {
            ConditionReport::pass("zero modulus of continuity on the grid", None, 0.0)
        } else if worst_ratio <= 0.85 {
            ConditionReport::pass(
                format!(
                    "moduli shrink under refinement (worst ratio {worst_ratio:.3}, worst modulus {worst_modulus:.3e})"
                ),
                worst_t,
                worst_modulus,
            )
        } else {
            ConditionReport::inconclusive(
                format!("moduli do not clearly shrink (ratio {worst_ratio:.3})"),
                worst_t,
                worst_modulus,
            )
        }
    };
    let phi_continuity = continuity_check(false);

    // Local conditions near ξ; compact members are exempt.
    let ladder: Vec<f64> = (z_spec.ladder_min_level..=z_spec.ladder_max_level)
        .map(|k| 1.0 - 2f64.powi(-k))
        .collect();
    let mut u_bound = ConditionReport::pass("sup |u| near the direction", None, 0.0);
    let mut dphi_bound =
        ConditionReport::pass("inf |phi'| near the direction", None, f64::INFINITY);
    let mut all_compact = true;
    for &t in t_grid {
        let tp = TPoint {
            t,
            from_left: t,
            from_right: 1.0 - t,
        };
        let compact = matches!(
            family.boundary_data(&tp, xi),
            Ok(data) if matches!(data.phi_prime, AngularDerivative::Infinite)
        );
        if compact {
            continue;
        }
        all_compact = false;
        let pair = family.at(t);
        for &r in &ladder {
            for m in -2..=2i32 {
                let z = Complex64::from_polar(r, xi.arg() + m as f64 * 0.05);
                if (z - xi).norm() > 0.2 {
                    continue;
                }
                let uv = pair.u().evaluate(z).norm();
                if !uv.is_finite() {
                    u_bound = ConditionReport::fail(
                        format!("non-finite |u| at {z}"),
                        Some(t),
                        f64::INFINITY,
                    );
                } else if uv > u_bound.worst_value && u_bound.status == ConditionStatus::Pass {
                    u_bound.worst_t = Some(t);
                    u_bound.worst_value = uv;
                }
                if let Some(d) = pair.phi().derivative_at(z) {
                    let dn = d.norm();
                    if dn < 1e-12 {
                        dphi_bound = ConditionReport::fail(
                            format!("|phi'| collapses to {dn:.3e} at {z}"),
                            Some(t),
                            dn,
                        );
                    } else if dn < dphi_bound.worst_value
                        && dphi_bound.status == ConditionStatus::Pass
                    {
                        dphi_bound.worst_t = Some(t);
                        dphi_bound.worst_value = dn;
                    }
                }
            }
        }
    }
    let u_continuity = if all_compact {
        ConditionReport::pass("all sampled members compact; local conditions vacuous", None, 0.0)
    } else {
        continuity_check(true)
    };
    if all_compact {
        u_bound = ConditionReport::pass(
            "all sampled members compact; local conditions vacuous",
            None,
            0.0,
        );
        dphi_bound = ConditionReport::pass(
            "all sampled members compact; local conditions vacuous",
            None,
            0.0,
        );
    }

    Ok(WReport {
        family: family.label().to_string(),
        direction: xi,
        integrability,
        phi_continuity,
        u_continuity,
        u_bound,
        phi_prime_bound: dphi_bound,
        probe_curve,
        probe_labels,
        t_grid: t_grid.to_vec(),
        semantics: SAMPLING_SEMANTICS,
    })
}

/// The log-weighted boundary probe used as the divergence witness for the
/// evaluation-type family: `((1−z)^{2/p} ln(e/(1−z)))^{-1}`.
pub fn log_witness_probe(space: &SpaceParams) -> Probe {
    let two_over_p = 2.0 / space.p();
    Probe::Custom {
        function: ComplexFunction::new(move |z| {
            let one_minus = Complex64::new(1.0, 0.0) - z;
            let log_term = (std::f64::consts::E / one_minus.norm()).ln();
            (one_minus.powf(two_over_p) * log_term).finv()
        })
        .with_singularities(vec![Complex64::new(1.0, 0.0)]),
        label: "log-weighted boundary probe".into(),
        divergence_witness: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::ComplexFunction;
    use crate::operators::{
        evaluation_family, hilbert_family, DirectionData, SymbolFamily, SymbolPair,
    };

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn small_grid() -> Vec<f64> {
        vec![0.2, 0.5, 0.8]
    }

    fn plain_family(
        label: &str,
        phi: impl Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static,
        dphi: impl Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static,
    ) -> SymbolFamily {
        let descriptor = crate::operators::FamilyDescriptor {
            label: label.to_string(),
            kind: "test".into(),
            parameters: Default::default(),
            expressions: Default::default(),
        };
        let phi2 = phi.clone();
        let dphi2 = dphi.clone();
        SymbolFamily::new(
            label.to_string(),
            vec![one()],
            move |_t| {
                SymbolPair::new_unchecked(
                    ComplexFunction::constant(one()),
                    ComplexFunction::new(phi2.clone()).with_derivative(dphi2.clone()),
                    vec![(
                        one(),
                        DirectionData {
                            u_value: one(),
                            phi_prime: AngularDerivative::Finite(one()),
                            numerical: false,
                        },
                    )],
                )
            },
            move |_tp, xi| {
                if (xi - one()).norm() < 1e-9 {
                    Some(DirectionData {
                        u_value: one(),
                        phi_prime: AngularDerivative::Finite(one()),
                        numerical: false,
                    })
                } else {
                    None
                }
            },
            descriptor,
        )
    }

    #[test]
    fn hilbert_direction_conditions_pass() {
        let fam = hilbert_family(1.0).unwrap();
        let report =
            check_direction(&fam, one(), &default_t_grid(), &ZGridSpec::default()).unwrap();
        for cond in report.all() {
            assert_eq!(
                cond.status,
                ConditionStatus::Pass,
                "condition failed: {}",
                cond.evidence
            );
        }
    }

    #[test]
    fn sign_flip_family_fails_fixed_point() {
        let fam = plain_family("negation", |z| -z, |_| Complex64::new(-1.0, 0.0));
        let report = check_direction(&fam, one(), &small_grid(), &ZGridSpec::default()).unwrap();
        assert_eq!(report.fixed_point.status, ConditionStatus::Fail);
        assert!(
            report.fixed_point.worst_value > 1.9,
            "{:?}",
            report.fixed_point
        );
    }

    #[test]
    fn identity_family_fails_contact() {
        let fam = plain_family("identity", |z| z, |_| one());
        let report = check_direction(&fam, one(), &small_grid(), &ZGridSpec::default()).unwrap();
        assert_eq!(report.no_other_contact.status, ConditionStatus::Fail);
    }

    /// A pass at a small ε implies a pass at every larger rung.
    #[test]
    fn contact_ladder_monotone() {
        let fam = hilbert_family(1.0).unwrap();
        let report = check_direction(&fam, one(), &small_grid(), &ZGridSpec::default()).unwrap();
        let mut seen_nonpass = false;
        for (_, status) in report.contact_by_epsilon.iter().rev() {
            if *status != ConditionStatus::Pass {
                seen_nonpass = true;
            } else {
                assert!(
                    !seen_nonpass,
                    "pass at a larger eps after failing a smaller one"
                );
            }
        }
    }

    #[test]
    fn constant_family_zero_moduli() {
        let fam = hilbert_family(1.0).unwrap();
        let frozen = SymbolFamily::constant("frozen", fam.at(0.5));
        let sp = SpaceParams::new(5.0, 0.0).unwrap();
        let report = check_w(
            &frozen,
            one(),
            &small_grid(),
            &ZGridSpec::default(),
            &[],
            &sp,
        )
        .unwrap();
        assert_eq!(report.phi_continuity.status, ConditionStatus::Pass);
        assert_eq!(report.u_continuity.status, ConditionStatus::Pass);
        assert!(report.phi_continuity.evidence.contains("zero modulus"));
    }

    #[test]
    fn hilbert_w_integrability_passes_with_bound() {
        let fam = hilbert_family(1.0).unwrap();
        let sp = SpaceParams::new(5.0, 0.0).unwrap();
        let report =
            check_w(&fam, one(), &small_grid(), &ZGridSpec::default(), &[], &sp).unwrap();
        assert_eq!(
            report.integrability.status,
            ConditionStatus::Pass,
            "{}",
            report.integrability.evidence
        );
        for cond in report.all() {
            assert_ne!(cond.status, ConditionStatus::Fail, "{}", cond.evidence);
        }
        for (t, lb) in &report.probe_curve {
            let bound = fam.norm_bound(*t, &sp).unwrap();
            assert!(lb <= &(bound * (1.0 + 1e-6)), "t={t}: {lb} vs {bound}");
        }
    }

    #[test]
    fn evaluation_family_integrability_flagged() {
        let fam = evaluation_family();
        let sp = SpaceParams::new(4.0, 0.0).unwrap();
        let report =
            check_w(&fam, one(), &small_grid(), &ZGridSpec::default(), &[], &sp).unwrap();
        assert_eq!(report.integrability.status, ConditionStatus::Inconclusive);
        let report = check_w(
            &fam,
            one(),
            &small_grid(),
            &ZGridSpec::default(),
            &[log_witness_probe(&sp)],
            &sp,
        )
        .unwrap();
        assert_eq!(
            report.integrability.status,
            ConditionStatus::Fail,
            "{}",
            report.integrability.evidence
        );
        assert_eq!(report.u_bound.status, ConditionStatus::Pass);
        assert!(report.u_bound.evidence.contains("compact"));
    }

    #[test]
    fn reports_are_deterministic() {
        let fam = hilbert_family(1.0).unwrap();
        let a = check_direction(&fam, one(), &small_grid(), &ZGridSpec::default()).unwrap();
        let b = check_direction(&fam, one(), &small_grid(), &ZGridSpec::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
