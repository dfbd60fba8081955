//! Bergman-space norms and the three boundary test-kernel families,
//! normalized to the unit sphere of `A^p_α`.

use crate::quadrature::{
    integrate_disk_nodes, integrate_disk_nodes_truncated, DiskNode, IntegrationResult,
    QuadratureSpec,
};
use crate::special::{power_kernel_norm_oracle, SpaceParams};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type NodeFn = Arc<dyn Fn(&DiskNode) -> Complex64 + Send + Sync>;

/// An evaluable analytic map on the open disk with an optional derivative and
/// declared boundary blow-up points.
///
/// The optional node evaluator computes the same values from the stable
/// boundary coordinates of a quadrature node; kernels provide it so their
/// norms stay accurate deep inside the boundary layer where `z` itself has
/// rounded.
#[derive(Clone)]
pub struct ComplexFunction {
    eval: EvalFn,
    derivative: Option<EvalFn>,
    singularities: Vec<Complex64>,
    node_eval: Option<NodeFn>,
}

impl std::fmt::Debug for ComplexFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexFunction")
            .field("singularities", &self.singularities)
            .field("has_derivative", &self.derivative.is_some())
            .field("has_node_eval", &self.node_eval.is_some())
            .finish()
    }
}

impl ComplexFunction {
    pub fn new(eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            derivative: None,
            singularities: Vec::new(),
            node_eval: None,
        }
    }

    pub fn constant(value: Complex64) -> Self {
        Self::new(move |_| value)
    }

    pub fn identity() -> Self {
        Self::new(|z| z).with_derivative(|_| Complex64::new(1.0, 0.0))
    }

    pub fn with_derivative(
        mut self,
        d: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_singularities(mut self, sing: Vec<Complex64>) -> Self {
        self.singularities = sing;
        self
    }

    pub fn with_node_eval(
        mut self,
        ne: impl Fn(&DiskNode) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.node_eval = Some(Arc::new(ne));
        self
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn derivative_at(&self, z: Complex64) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(z))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn singularities(&self) -> &[Complex64] {
        &self.singularities
    }

    /// Evaluate at a quadrature node, using the stable path when available.
    pub fn eval_node(&self, node: &DiskNode) -> Complex64 {
        match &self.node_eval {
            Some(ne) => ne(node),
            None => (self.eval)(node.z),
        }
    }

    /// Pointwise product; singularities accumulate and the stable node
    /// evaluators compose factorwise.
    pub fn product(&self, other: &ComplexFunction) -> ComplexFunction {
        let a = self.clone();
        let b = other.clone();
        let mut sing = self.singularities.clone();
        for s in &other.singularities {
            if !sing.iter().any(|t| (t - s).norm() < 1e-12) {
                sing.push(*s);
            }
        }
        let an = self.clone();
        let bn = other.clone();
        ComplexFunction::new(move |z| a.evaluate(z) * b.evaluate(z))
            .with_node_eval(move |node| an.eval_node(node) * bn.eval_node(node))
            .with_singularities(sing)
    }

    /// Drop the stable node evaluator, forcing evaluation from the rounded
    /// node position. Ratio-normalized computations use this so numerator and
    /// denominator truncate the unresolvable boundary layer consistently.
    pub fn without_node_eval(&self) -> ComplexFunction {
        let mut out = self.clone();
        out.node_eval = None;
        out
    }

    /// Scale by a constant.
    pub fn scaled(&self, factor: Complex64) -> ComplexFunction {
        let a = self.clone();
        let an = self.clone();
        let mut out = ComplexFunction::new(move |z| factor * a.evaluate(z))
            .with_node_eval(move |node| factor * an.eval_node(node))
            .with_singularities(self.singularities.clone());
        if let Some(d) = self.derivative.clone() {
            out = out.with_derivative(move |z| factor * d(z));
        }
        out
    }
}

/// Norm value together with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct NormResult {
    pub value: f64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub converged: bool,
}

/// `(∫_D |f|^p dA_α)^{1/p}` through the adaptive disk rule, with singular
/// directions seeded from the declared singularities of `f`. Non-convergence
/// propagates in the result; non-finite interior samples are hard errors.
pub fn bergman_norm_full(
    f: &ComplexFunction,
    space: &SpaceParams,
    spec: &QuadratureSpec,
) -> Result<NormResult> {
    let mut spec = spec.clone();
    if spec.singular_point.is_none() {
        spec.singular_point = f.singularities().first().copied();
    }
    let angles: Vec<f64> = f
        .singularities()
        .iter()
        .map(|s| s.arg())
        .chain(spec.singular_point.iter().map(|s| s.arg()))
        .collect();
    let p = space.p();
    let raw = integrate_disk_nodes(
        |node: &DiskNode| {
            let v = f.eval_node(node);
            Complex64::new(v.norm_sqr().powf(0.5 * p), 0.0)
        },
        space.alpha(),
        &angles,
        &spec,
    )?;
    Ok(norm_from_integral(raw, p))
}

pub(crate) fn norm_from_integral(raw: IntegrationResult, p: f64) -> NormResult {
    let power = raw.value.re.max(0.0);
    let value = power.powf(1.0 / p);
    // d(I^{1/p}) = I^{1/p−1}/p · dI
    let error_estimate = if power > 0.0 {
        value / power / p * raw.error_estimate
    } else {
        raw.error_estimate
    };
    NormResult {
        value,
        error_estimate,
        cells_used: raw.cells_used,
        converged: raw.converged,
    }
}

/// Norm over the truncated disk `{1 − |z| ≥ delta_min}`: the building block
/// of ratio-normalized quantities whose common boundary layer is meant to
/// cancel rather than be resolved.
pub fn bergman_norm_truncated(
    f: &ComplexFunction,
    space: &SpaceParams,
    spec: &QuadratureSpec,
    delta_min: f64,
) -> Result<NormResult> {
    let mut spec = spec.clone();
    if spec.singular_point.is_none() {
        spec.singular_point = f.singularities().first().copied();
    }
    let angles: Vec<f64> = f
        .singularities()
        .iter()
        .map(|s| s.arg())
        .chain(spec.singular_point.iter().map(|s| s.arg()))
        .collect();
    let p = space.p();
    let raw = integrate_disk_nodes_truncated(
        |node: &DiskNode| {
            let v = f.eval_node(node);
            Complex64::new(v.norm_sqr().powf(0.5 * p), 0.0)
        },
        space.alpha(),
        &angles,
        &spec,
        delta_min,
    )?;
    Ok(norm_from_integral(raw, p))
}

/// Convenience wrapper returning the norm value; quadrature non-convergence
/// becomes an error here (callers that want the flag use
/// [`bergman_norm_full`]).
pub fn bergman_norm(
    f: &ComplexFunction,
    space: &SpaceParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let r = bergman_norm_full(f, space, spec)?;
    if !r.converged {
        return Err(Error::NotConverged(format!(
            "bergman_norm: error estimate {} after {} cells",
            r.error_estimate, r.cells_used
        )));
    }
    Ok(r.value)
}

/// The unnormalized power function `z ↦ (ξ−z)^{-c}` with the principal branch
/// taken through `1 − conj(ξ)·z` (positive real part on the disk) and the
/// principal argument of ξ.
pub fn power_function(c: f64, xi: Complex64) -> ComplexFunction {
    let theta_xi = xi.arg();
    let xi_pow = Complex64::from_polar(1.0, -c * theta_xi); // ξ^{-c}
    let eval = move |z: Complex64| {
        let w = Complex64::new(1.0, 0.0) - xi.conj() * z;
        xi_pow * w.powc(Complex64::new(-c, 0.0))
    };
    let node = move |node: &DiskNode| {
        let w = node.one_minus_conj_z(theta_xi);
        xi_pow * w.powc(Complex64::new(-c, 0.0))
    };
    ComplexFunction::new(eval)
        .with_node_eval(node)
        .with_singularities(vec![xi])
        .with_derivative(move |z| {
            // d/dz (ξ−z)^{-c} = c (ξ−z)^{-c-1}
            let w = Complex64::new(1.0, 0.0) - xi.conj() * z;
            let pref = Complex64::from_polar(1.0, -(c + 1.0) * theta_xi);
            c * pref * w.powc(Complex64::new(-(c + 1.0), 0.0))
        })
}

/// Which of the three boundary families a kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Power,
    TwoPoint,
    BoundaryPeak,
}

/// A normalized element of the `A^p_α` unit sphere from one of the families
/// `f_{c,ξ}`, `g_{c,θ}`, `h_{n,ξ}`.
#[derive(Debug, Clone)]
pub struct TestKernel {
    pub kind: KernelKind,
    pub xi: Complex64,
    pub c: f64,
    pub theta: f64,
    pub n: u32,
    /// Norm of the unnormalized kernel; division by it is the normalization.
    pub normalization: f64,
    pub space: SpaceParams,
    function: ComplexFunction,
    unnormalized: ComplexFunction,
}

impl TestKernel {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.function.evaluate(z)
    }

    pub fn eval_node(&self, node: &DiskNode) -> Complex64 {
        self.function.eval_node(node)
    }

    /// The normalized kernel as a function object.
    pub fn function(&self) -> &ComplexFunction {
        &self.function
    }

    /// The kernel before normalization.
    pub fn unnormalized(&self) -> &ComplexFunction {
        &self.unnormalized
    }
}

fn kernel_norm_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-14,
        grading_exponent: 8.0,
        max_depth: 18,
        ..QuadratureSpec::default()
    }
}

/// `f_{c,ξ} = (ξ−z)^{-c} / ‖(ξ−z)^{-c}‖`, normalized through the series
/// oracle.
pub fn make_power_kernel(c: f64, xi: Complex64, space: &SpaceParams) -> Result<TestKernel> {
    if (xi.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "direction must be unimodular, got |xi| = {}",
            xi.norm()
        )));
    }
    if !(c > 0.0) || c >= space.critical_exponent() {
        return Err(Error::InvalidParameter(format!(
            "power kernel order must lie in (0, c*) = (0, {}), got {c}",
            space.critical_exponent()
        )));
    }
    let normalization = power_kernel_norm_oracle(c, space)?.powf(1.0 / space.p());
    let unnormalized = power_function(c, xi);
    let function = unnormalized.scaled(Complex64::new(1.0 / normalization, 0.0));
    Ok(TestKernel {
        kind: KernelKind::Power,
        xi,
        c,
        theta: 0.0,
        n: 0,
        normalization,
        space: *space,
        function,
        unnormalized,
    })
}

/// The unnormalized two-point kernel `ĝ_{c,θ} = θ(1+z)^{-c} + (1−θ)(1−z)^{-c}`.
pub fn two_point_function(c: f64, theta: f64) -> ComplexFunction {
    let eval = move |z: Complex64| {
        let one_plus = Complex64::new(1.0, 0.0) + z;
        let one_minus = Complex64::new(1.0, 0.0) - z;
        theta * one_plus.powc(Complex64::new(-c, 0.0))
            + (1.0 - theta) * one_minus.powc(Complex64::new(-c, 0.0))
    };
    let node = move |node: &DiskNode| {
        // 1 − conj(−1)·z = 1 + z and 1 − conj(1)·z = 1 − z, both stable.
        let one_plus = node.one_minus_conj_z(std::f64::consts::PI);
        let one_minus = node.one_minus_conj_z(0.0);
        theta * one_plus.powc(Complex64::new(-c, 0.0))
            + (1.0 - theta) * one_minus.powc(Complex64::new(-c, 0.0))
    };
    ComplexFunction::new(eval)
        .with_node_eval(node)
        .with_singularities(vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)])
        .with_derivative(move |z| {
            let one_plus = Complex64::new(1.0, 0.0) + z;
            let one_minus = Complex64::new(1.0, 0.0) - z;
            -theta * c * one_plus.powc(Complex64::new(-c - 1.0, 0.0))
                + (1.0 - theta) * c * one_minus.powc(Complex64::new(-c - 1.0, 0.0))
        })
}

/// `g_{c,θ} = ĝ_{c,θ}/‖ĝ_{c,θ}‖`; the normalization is computed by quadrature
/// with both ±1 declared singular (the cross term has no simple closed form).
pub fn make_two_point_kernel(c: f64, theta: f64, space: &SpaceParams) -> Result<TestKernel> {
    if !(c > 0.0) || c >= space.critical_exponent() {
        return Err(Error::InvalidParameter(format!(
            "two-point kernel order must lie in (0, c*), got {c}"
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "mixing weight must lie in [0,1], got {theta}"
        )));
    }
    let unnormalized = two_point_function(c, theta);
    let norm = bergman_norm(&unnormalized, space, &kernel_norm_spec())?;
    let function = unnormalized.scaled(Complex64::new(1.0 / norm, 0.0));
    Ok(TestKernel {
        kind: KernelKind::TwoPoint,
        xi: Complex64::new(1.0, 0.0),
        c,
        theta,
        n: 0,
        normalization: norm,
        space: *space,
        function,
        unnormalized,
    })
}

/// `h_{n,ξ} = ((ξ+z)/2)^n / ‖·‖`: the boundary-peak (tangential) family.
pub fn make_boundary_peak(n: u32, xi: Complex64, space: &SpaceParams) -> Result<TestKernel> {
    if (xi.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "direction must be unimodular, got |xi| = {}",
            xi.norm()
        )));
    }
    let unnormalized = ComplexFunction::new(move |z| ((xi + z) * 0.5).powu(n)).with_derivative(
        move |z| {
            if n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                0.5 * n as f64 * ((xi + z) * 0.5).powu(n - 1)
            }
        },
    );
    // Peaked but bounded: seed the quadrature at ξ so the mass concentration
    // for large n is met by the graded cells.
    let mut spec = kernel_norm_spec();
    spec.singular_point = Some(xi);
    let norm = bergman_norm(&unnormalized, space, &spec)?;
    let function = unnormalized.scaled(Complex64::new(1.0 / norm, 0.0));
    Ok(TestKernel {
        kind: KernelKind::BoundaryPeak,
        xi,
        c: 0.0,
        theta: 0.0,
        n,
        normalization: norm,
        space: *space,
        function,
        unnormalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::disk_moment;

    fn quad() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn norm_of_one_is_one() {
        let one = ComplexFunction::constant(Complex64::new(1.0, 0.0));
        for (p, alpha) in [(2.0, 0.0), (4.0, 0.0), (5.0, 1.0), (3.0, 2.5)] {
            let sp = SpaceParams::new(p, alpha).unwrap();
            let n = bergman_norm(&one, &sp, &quad()).unwrap();
            assert!((n - 1.0).abs() < 1e-10, "(p,α)=({p},{alpha}): {n}");
        }
    }

    /// ‖z‖ in A²₀ is the square root of the Beta moment (1+α)B(2,1) = 1/2.
    #[test]
    fn norm_of_identity_p2() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let n = bergman_norm(&ComplexFunction::identity(), &sp, &quad()).unwrap();
        assert!((n - 0.5f64.sqrt()).abs() < 1e-10, "{n}");
    }

    #[test]
    fn power_norm_matches_series_oracle() {
        for (p, alpha) in [(2.0, 0.0), (4.0, 0.0), (5.0, 1.0)] {
            let sp = SpaceParams::new(p, alpha).unwrap();
            let c = 0.5 * sp.critical_exponent();
            let f = power_function(c, Complex64::new(1.0, 0.0));
            let quad_norm = bergman_norm(&f, &sp, &quad()).unwrap();
            let oracle = power_kernel_norm_oracle(c, &sp).unwrap().powf(1.0 / p);
            assert!(
                ((quad_norm - oracle) / oracle).abs() < 1e-6,
                "(p,α)=({p},{alpha}): {quad_norm} vs {oracle}"
            );
        }
    }

    #[test]
    fn power_kernel_value_at_zero() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let k = make_power_kernel(0.3, Complex64::new(1.0, 0.0), &sp).unwrap();
        let expected = 1.0 / power_kernel_norm_oracle(0.3, &sp).unwrap().powf(0.5);
        let got = k.evaluate(Complex64::new(0.0, 0.0));
        assert!((got.re - expected).abs() < 1e-12 && got.im.abs() < 1e-14);
    }

    #[test]
    fn power_kernel_unit_norm() {
        let sp = SpaceParams::new(4.0, 0.0).unwrap();
        let cs = sp.critical_exponent();
        for frac in [0.1, 0.5, 0.9] {
            let k = make_power_kernel(frac * cs, Complex64::new(1.0, 0.0), &sp).unwrap();
            let n = bergman_norm(k.function(), &sp, &kernel_norm_spec()).unwrap();
            assert!((n - 1.0).abs() < 1e-6, "c = {} gives {n}", frac * cs);
        }
    }

    #[test]
    fn power_kernel_monotone_on_radius() {
        let sp = SpaceParams::new(4.0, 0.0).unwrap();
        let k = make_power_kernel(0.3, Complex64::new(1.0, 0.0), &sp).unwrap();
        let mut prev = 0.0;
        for i in 0..20 {
            let x = i as f64 / 20.0;
            let m = k.evaluate(Complex64::new(x, 0.0)).norm();
            assert!(m > prev, "not increasing at x = {x}");
            prev = m;
        }
    }

    #[test]
    fn power_kernel_rejects_out_of_range_order() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        assert!(make_power_kernel(1.0, Complex64::new(1.0, 0.0), &sp).is_err());
        assert!(make_power_kernel(0.0, Complex64::new(1.0, 0.0), &sp).is_err());
    }

    #[test]
    fn two_point_theta_one_is_rotated_power() {
        // θ=1: only the (1+z)^{-c} term survives; against f_{c,-1} the
        // pointwise ratio is a constant unimodular factor.
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let g = make_two_point_kernel(0.4, 1.0, &sp).unwrap();
        let f = make_power_kernel(0.4, Complex64::new(-1.0, 0.0), &sp).unwrap();
        let zs = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.2),
            Complex64::new(-0.7, 0.1),
        ];
        let r0 = g.evaluate(zs[0]) / f.evaluate(zs[0]);
        assert!((r0.norm() - 1.0).abs() < 1e-6, "|ratio| = {}", r0.norm());
        for &z in &zs[1..] {
            let r = g.evaluate(z) / f.evaluate(z);
            assert!((r - r0).norm() < 1e-6, "ratio drifts: {r} vs {r0}");
        }
    }

    #[test]
    fn two_point_theta_zero_is_plus_one_power() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let g = make_two_point_kernel(0.4, 0.0, &sp).unwrap();
        let f = make_power_kernel(0.4, Complex64::new(1.0, 0.0), &sp).unwrap();
        for z in [Complex64::new(0.3, 0.1), Complex64::new(-0.2, -0.6)] {
            let r = g.evaluate(z) / f.evaluate(z);
            assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-6, "ratio {r}");
        }
    }

    #[test]
    fn two_point_unit_norm() {
        let sp = SpaceParams::new(3.0, 1.0).unwrap();
        let g = make_two_point_kernel(0.5 * sp.critical_exponent(), 0.5, &sp).unwrap();
        let n = bergman_norm(g.function(), &sp, &kernel_norm_spec()).unwrap();
        assert!((n - 1.0).abs() < 1e-6, "{n}");
    }

    #[test]
    fn boundary_peak_zero_is_constant_one() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let h = make_boundary_peak(0, Complex64::new(1.0, 0.0), &sp).unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.4)] {
            assert!((h.evaluate(z) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    /// For p = 2 the squared norm of ĥ_{n,1} has the independent series value
    /// 4^{-n} Σ_k C(n,k)² m_k with m_k the Beta moments.
    #[test]
    fn boundary_peak_norm_against_p2_series() {
        for alpha in [0.0, 1.0] {
            let sp = SpaceParams::new(2.0, alpha).unwrap();
            let n = 8u32;
            let h = make_boundary_peak(n, Complex64::new(1.0, 0.0), &sp).unwrap();
            let mut series = 0.0;
            let mut binom = 1.0f64;
            for k in 0..=n {
                if k > 0 {
                    binom *= (n - k + 1) as f64 / k as f64;
                }
                series += binom * binom * disk_moment(k as f64, alpha).unwrap();
            }
            let expected = (series / 4f64.powi(n as i32)).sqrt();
            assert!(
                ((h.normalization - expected) / expected).abs() < 1e-8,
                "alpha={alpha}: {} vs {expected}",
                h.normalization
            );
        }
    }

    #[test]
    fn boundary_peak_unit_norms() {
        let sp = SpaceParams::new(4.0, 0.0).unwrap();
        for n in [1u32, 8, 64] {
            let h = make_boundary_peak(n, Complex64::new(1.0, 0.0), &sp).unwrap();
            let mut spec = kernel_norm_spec();
            spec.singular_point = Some(Complex64::new(1.0, 0.0));
            let norm = bergman_norm(h.function(), &sp, &spec).unwrap();
            assert!((norm - 1.0).abs() < 1e-6, "n={n}: {norm}");
        }
    }

    /// Multiplying by g(z) = 1−z (tangential limit 0 at ξ=1) sends the peak
    /// products to zero as n grows.
    #[test]
    fn boundary_peak_tangential_decay() {
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let g = ComplexFunction::new(|z| Complex64::new(1.0, 0.0) - z);
        let mut prev = f64::INFINITY;
        for n in [16u32, 64, 256] {
            let h = make_boundary_peak(n, Complex64::new(1.0, 0.0), &sp).unwrap();
            let prod = h.function().product(&g);
            let mut spec = kernel_norm_spec();
            spec.singular_point = Some(Complex64::new(1.0, 0.0));
            let norm = bergman_norm(&prod, &sp, &spec).unwrap();
            assert!(norm < prev, "n={n}: {norm} not below {prev}");
            prev = norm;
        }
        assert!(prev < 0.25, "decay too slow: {prev}");
    }

    /// Rotation covariance: ‖f_{c,ξ}·(g∘ρ)‖ with ρ(z) = conj(ξ)z equals
    /// ‖f_{c,1}·g‖, reducing every ξ-test to ξ = 1.
    #[test]
    fn rotation_covariance() {
        let sp = SpaceParams::new(4.0, 1.0).unwrap();
        let c = 0.5 * sp.critical_exponent();
        let xi = Complex64::from_polar(1.0, 1.234);
        let g = ComplexFunction::new(|z| (z - Complex64::new(1.0, 0.0)).exp());
        let g_rot = ComplexFunction::new(move |z| ((xi.conj() * z) - Complex64::new(1.0, 0.0)).exp());
        let f1 = make_power_kernel(c, Complex64::new(1.0, 0.0), &sp).unwrap();
        let fxi = make_power_kernel(c, xi, &sp).unwrap();
        let n1 = bergman_norm(&f1.function().product(&g), &sp, &quad()).unwrap();
        let nxi = bergman_norm(&fxi.function().product(&g_rot), &sp, &quad()).unwrap();
        assert!((n1 - nxi).abs() < 1e-7, "{n1} vs {nxi}");
    }

    /// The defining property of approximate evaluation maps: off any ball
    /// around the direction, the kernels vanish as c approaches c*.
    #[test]
    fn power_kernel_vanishes_off_direction() {
        let sp = SpaceParams::new(4.0, 0.0).unwrap();
        let cs = sp.critical_exponent();
        let one = Complex64::new(1.0, 0.0);
        let grid: Vec<Complex64> = (0..200)
            .map(|i| {
                let r = 0.995 * ((i / 20) as f64 + 1.0) / 10.0;
                let t = 2.0 * std::f64::consts::PI * ((i % 20) as f64 + 0.5) / 20.0;
                Complex64::from_polar(r, t)
            })
            .filter(|z| (z - one).norm() > 0.3)
            .collect();
        let mut prev = f64::INFINITY;
        // The sup decays only through the normalization blow-up, which is
        // logarithmic in c* − c, so the last sample sits very close to c*.
        for c in [0.7 * cs, 0.9 * cs, 0.99 * cs, cs - 1e-6] {
            let k = make_power_kernel(c, one, &sp).unwrap();
            let sup = grid
                .iter()
                .map(|&z| k.evaluate(z).norm())
                .fold(0.0f64, f64::max);
            assert!(sup < prev, "sup not decreasing at c = {c}");
            prev = sup;
        }
        assert!(prev < 0.15, "sup off the direction should be small: {prev}");
    }

    #[test]
    fn power_kernel_norm_cp_one_value() {
        // ‖(1−z)^{-1/2}‖_{A²₀}² = ∫|1−z|^{-1} dA = 4/π.
        let sp = SpaceParams::new(2.0, 0.0).unwrap();
        let f = power_function(0.5, Complex64::new(1.0, 0.0));
        let n = bergman_norm(&f, &sp, &quad()).unwrap();
        let expected = (4.0 / std::f64::consts::PI).sqrt();
        assert!((n - expected).abs() < 1e-7, "{n} vs {expected}");
    }
}
