//! Weighted composition operators `S_t = u_t C_{φ_t}`, their t-integrated
//! means, the built-in families and a small expression DSL for user-defined
//! symbols.

mod expr;
mod families;

pub use expr::{parse_expression, parse_symbol_expression, Expr};
pub use families::{
    cubic_two_direction_family, evaluation_family, family_from_expressions, hilbert_family,
    phase_family, square_family, volterra_family, SymbolWeight,
};

use crate::bergman::ComplexFunction;
use crate::quadrature::{
    integrate_interval_nodes, EndpointSingularities, QuadratureSpec, TPoint,
};
use crate::special::SpaceParams;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Angular derivative of a composition symbol at a boundary direction. For
/// members whose image closure stays inside the disk (compact operators) the
/// angular derivative is taken as infinite and the essential-norm integrand
/// as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularDerivative {
    Finite(Complex64),
    Infinite,
}

impl AngularDerivative {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            AngularDerivative::Finite(v) => Some(*v),
            AngularDerivative::Infinite => None,
        }
    }
}

/// Boundary data of a symbol pair at one direction.
#[derive(Debug, Clone, Copy)]
pub struct DirectionData {
    pub u_value: Complex64,
    pub phi_prime: AngularDerivative,
    /// True when the data was extracted by radial limits rather than
    /// supplied in closed form.
    pub numerical: bool,
}

/// The pair `(u_t, φ_t)` at a fixed `t`, with boundary data at the declared
/// directions.
#[derive(Debug, Clone)]
pub struct SymbolPair {
    u: ComplexFunction,
    phi: ComplexFunction,
    boundary: Vec<(Complex64, DirectionData)>,
}

impl SymbolPair {
    /// Validated constructor: requires a derivative on `φ` and checks the
    /// self-map property on a coarse interior grid.
    pub fn new(
        u: ComplexFunction,
        phi: ComplexFunction,
        boundary: Vec<(Complex64, DirectionData)>,
    ) -> Result<Self> {
        if !phi.has_derivative() {
            return Err(Error::InvalidParameter(
                "composition symbol needs a derivative".into(),
            ));
        }
        let pair = Self::new_unchecked(u, phi, boundary);
        pair.check_self_map(9)?;
        Ok(pair)
    }

    pub(crate) fn new_unchecked(
        u: ComplexFunction,
        phi: ComplexFunction,
        boundary: Vec<(Complex64, DirectionData)>,
    ) -> Self {
        Self { u, phi, boundary }
    }

    pub fn u(&self) -> &ComplexFunction {
        &self.u
    }

    pub fn phi(&self) -> &ComplexFunction {
        &self.phi
    }

    pub fn boundary_at(&self, xi: Complex64) -> Option<&DirectionData> {
        self.boundary
            .iter()
            .find(|(d, _)| (d - xi).norm() < 1e-9)
            .map(|(_, data)| data)
    }

    pub fn boundary(&self) -> &[(Complex64, DirectionData)] {
        &self.boundary
    }

    /// `|φ(z)| < 1` sampled on a polar grid of the open disk.
    pub fn check_self_map(&self, n: usize) -> Result<()> {
        for i in 0..n {
            let r = (i as f64 + 0.5) / n as f64;
            for j in 0..(4 * n) {
                let t = 2.0 * std::f64::consts::PI * j as f64 / (4 * n) as f64;
                let z = Complex64::from_polar(r, t);
                let w = self.phi.evaluate(z);
                if !(w.norm() < 1.0 + 1e-12) {
                    return Err(Error::NotSelfMap {
                        z,
                        modulus: w.norm(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Serializable description of a family: `{label, kind, parameters,
/// expressions}`.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyDescriptor {
    pub label: String,
    pub kind: String,
    pub parameters: BTreeMap<String, f64>,
    pub expressions: BTreeMap<String, String>,
}

type SymbolAtFn = Arc<dyn Fn(f64) -> SymbolPair + Send + Sync>;
type BoundaryFn = Arc<dyn Fn(&TPoint, Complex64) -> Option<DirectionData> + Send + Sync>;
type NormBoundFn = Arc<dyn Fn(f64, &SpaceParams) -> Option<f64> + Send + Sync>;

/// The map `t ↦ (u_t, φ_t, φ_t')` with boundary data at the declared
/// directions; the operator family `S_t = u_t C_{φ_t}`.
#[derive(Clone)]
pub struct SymbolFamily {
    label: String,
    directions: Vec<Complex64>,
    symbol_at: SymbolAtFn,
    boundary_at: BoundaryFn,
    norm_bound: NormBoundFn,
    descriptor: FamilyDescriptor,
}

impl std::fmt::Debug for SymbolFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolFamily")
            .field("label", &self.label)
            .field("directions", &self.directions)
            .finish()
    }
}

impl SymbolFamily {
    pub fn new(
        label: impl Into<String>,
        directions: Vec<Complex64>,
        symbol_at: impl Fn(f64) -> SymbolPair + Send + Sync + 'static,
        boundary_at: impl Fn(&TPoint, Complex64) -> Option<DirectionData> + Send + Sync + 'static,
        descriptor: FamilyDescriptor,
    ) -> Self {
        Self {
            label: label.into(),
            directions,
            symbol_at: Arc::new(symbol_at),
            boundary_at: Arc::new(boundary_at),
            norm_bound: Arc::new(|_, _| None),
            descriptor,
        }
    }

    pub fn with_norm_bound(
        mut self,
        bound: impl Fn(f64, &SpaceParams) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        self.norm_bound = Arc::new(bound);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn directions(&self) -> &[Complex64] {
        &self.directions
    }

    pub fn descriptor(&self) -> &FamilyDescriptor {
        &self.descriptor
    }

    /// The symbol pair at an interior parameter value.
    pub fn at(&self, t: f64) -> SymbolPair {
        (self.symbol_at)(t)
    }

    /// Boundary data `(u_t(ξ), φ_t'(ξ))` evaluated from the stable endpoint
    /// distances of the `t`-node.
    pub fn boundary_data(&self, tp: &TPoint, xi: Complex64) -> Result<DirectionData> {
        (self.boundary_at)(tp, xi).ok_or_else(|| {
            Error::Domain(format!(
                "family '{}' has no boundary data at direction {xi}",
                self.label
            ))
        })
    }

    /// Declared integrable upper bound for `‖S_t‖`, when the constructor
    /// supplied one valid for the given space.
    pub fn norm_bound(&self, t: f64, space: &SpaceParams) -> Option<f64> {
        (self.norm_bound)(t, space)
    }

    /// A degenerate family frozen at a single symbol pair (`S_t ≡ S`).
    pub fn constant(label: impl Into<String>, pair: SymbolPair) -> Self {
        let label = label.into();
        let directions: Vec<Complex64> = pair.boundary().iter().map(|(d, _)| *d).collect();
        let pair_at = pair.clone();
        let pair_bd = pair;
        let descriptor = FamilyDescriptor {
            label: label.clone(),
            kind: "constant".into(),
            parameters: BTreeMap::new(),
            expressions: BTreeMap::new(),
        };
        SymbolFamily::new(
            label,
            directions,
            move |_t| pair_at.clone(),
            move |_tp, xi| pair_bd.boundary_at(xi).copied(),
            descriptor,
        )
    }
}

/// `f ↦ u·(f∘φ)` for one symbol pair. The symbol is re-checked to be a
/// self-map on a coarse grid; the result declares its blow-up points at the
/// directions where `φ` touches the boundary.
pub fn apply_weighted_composition(
    sym: &SymbolPair,
    f: &ComplexFunction,
) -> Result<ComplexFunction> {
    sym.check_self_map(9)?;
    let u = sym.u.clone();
    let phi = sym.phi.clone();
    let f = f.clone();
    let singularities: Vec<Complex64> = sym
        .boundary
        .iter()
        .filter(|(_, data)| matches!(data.phi_prime, AngularDerivative::Finite(_)))
        .map(|(d, _)| *d)
        .collect();
    Ok(ComplexFunction::new(move |z| {
        let w = phi.evaluate(z);
        u.evaluate(z) * f.evaluate(w)
    })
    .with_singularities(singularities))
}

/// Pointwise mean `z ↦ ∫₀¹ u_t(z)·f(φ_t(z)) dt` with the endpoint
/// substitution applied (families live on the open interval). Per-point
/// non-convergence beyond a mild floor surfaces as a non-finite value, which
/// downstream quadratures turn into a hard error naming the point.
pub fn apply_integral_operator(
    family: &SymbolFamily,
    f: &ComplexFunction,
    t_spec: &QuadratureSpec,
) -> Result<ComplexFunction> {
    t_spec.validate()?;
    let family = family.clone();
    let f = f.clone();
    let spec = t_spec.clone();
    let singularities = family.directions.clone();
    Ok(ComplexFunction::new(move |z| {
        let r = integrate_interval_nodes(
            |tp: &TPoint| {
                let pair = family.at(tp.t);
                let w = pair.phi.evaluate(z);
                if !(w.norm() < 1.0 + 1e-12) {
                    return Complex64::new(f64::NAN, f64::NAN);
                }
                pair.u.evaluate(z) * f.evaluate(w)
            },
            0.0,
            1.0,
            EndpointSingularities::both(),
            &spec,
        );
        match r {
            Ok(res) => {
                if res.converged
                    || res.error_estimate <= 1e-3 * (res.value.norm() + spec.abs_tol)
                {
                    res.value
                } else {
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    })
    .with_singularities(singularities))
}

/// The Volterra operator `V_g(f)(z) = ∫₀^z f(w) g'(w) dw` along the radial
/// segment from 0 to z.
pub fn volterra_direct(g_prime: &ComplexFunction, f: &ComplexFunction) -> ComplexFunction {
    let g_prime = g_prime.clone();
    let f = f.clone();
    ComplexFunction::new(move |z| {
        let r = integrate_interval_nodes(
            |tp: &TPoint| {
                let w = tp.t * z;
                f.evaluate(w) * g_prime.evaluate(w) * z
            },
            0.0,
            1.0,
            EndpointSingularities::default(),
            &QuadratureSpec {
                rel_tol: 1e-10,
                abs_tol: 1e-14,
                ..QuadratureSpec::default()
            },
        );
        match r {
            Ok(res) => res.value,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    })
}

/// The generalized Hilbert matrix operator in its direct integral form
/// `H_λ(f)(z) = ∫₀¹ f(t) t^{λ-1}/(1−tz) dt`; the family route must agree
/// with this representation.
pub fn hilbert_direct(lambda: f64, f: &ComplexFunction) -> ComplexFunction {
    let f = f.clone();
    ComplexFunction::new(move |z| {
        let r = integrate_interval_nodes(
            |tp: &TPoint| {
                let t = tp.t;
                let tc = Complex64::new(t, 0.0);
                f.evaluate(tc) * t.powf(lambda - 1.0) / (Complex64::new(1.0, 0.0) - t * z)
            },
            0.0,
            1.0,
            EndpointSingularities {
                left: lambda < 1.0,
                right: false,
            },
            &QuadratureSpec {
                rel_tol: 1e-10,
                abs_tol: 1e-14,
                ..QuadratureSpec::default()
            },
        );
        match r {
            Ok(res) => res.value,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    })
    .with_singularities(vec![Complex64::new(1.0, 0.0)])
}
