//! Built-in symbol families: the Volterra and generalized Hilbert matrix
//! representations, the non-univalent square map, a two-direction cubic, the
//! rank-one evaluation family, phase modulation, and user-defined families
//! from DSL expressions.

use super::expr::parse_expression;
use super::{
    AngularDerivative, DirectionData, FamilyDescriptor, SymbolFamily, SymbolPair,
};
use crate::bergman::ComplexFunction;
use crate::quadrature::TPoint;
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `u_t(z) = t^{λ-1}/(1−(1−t)z)^λ`, `φ_t(z) = t/(1−(1−t)z)`: the weighted
/// composition representation of the generalized Hilbert matrix operator,
/// with direction 1 and boundary data `u_t(1) = 1/t`, `φ_t'(1) = (1−t)/t`.
pub fn hilbert_family(lambda: f64) -> Result<SymbolFamily> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "hilbert family requires lambda > 0, got {lambda}"
        )));
    }
    let direction = one();
    let symbol_at = move |t: f64| {
        let u = ComplexFunction::new(move |z| {
            let denom = one() - (1.0 - t) * z;
            t.powf(lambda - 1.0) * denom.powf(-lambda)
        });
        let phi = ComplexFunction::new(move |z| t / (one() - (1.0 - t) * z)).with_derivative(
            move |z| {
                let d = one() - (1.0 - t) * z;
                t * (1.0 - t) / (d * d)
            },
        );
        let boundary = vec![(
            direction,
            DirectionData {
                u_value: Complex64::new(1.0 / t, 0.0),
                phi_prime: AngularDerivative::Finite(Complex64::new((1.0 - t) / t, 0.0)),
                numerical: false,
            },
        )];
        SymbolPair::new_unchecked(u, phi, boundary)
    };
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        if (xi - one()).norm() > 1e-9 {
            return None;
        }
        // u_t(1) = t^{λ-1}/t^λ = 1/t for every λ; φ_t'(1) = (1−t)/t. The
        // endpoint distances keep 1−t exact near t = 1.
        Some(DirectionData {
            u_value: Complex64::new(1.0 / tp.t.max(tp.from_left), 0.0),
            phi_prime: AngularDerivative::Finite(Complex64::new(
                tp.from_right / tp.t.max(tp.from_left),
                0.0,
            )),
            numerical: false,
        })
    };
    let descriptor = FamilyDescriptor {
        label: format!("hilbert(lambda={lambda})"),
        kind: "hilbert".into(),
        parameters: BTreeMap::from([("lambda".to_string(), lambda)]),
        expressions: BTreeMap::from([
            (
                "u".to_string(),
                format!("t^({lambda}-1)/(1-(1-t)*z)^({lambda})"),
            ),
            ("phi".to_string(), "t/(1-(1-t)*z)".to_string()),
        ]),
    };
    let family = SymbolFamily::new(
        format!("hilbert(lambda={lambda})"),
        vec![direction],
        symbol_at,
        boundary_at,
        descriptor,
    );
    // Change-of-variables bound ‖S_t‖ ≤ t^{2/p−1}(1−t)^{-2/p}, valid for
    // λ = 1 on the unweighted spaces with p ≥ 4.
    Ok(if (lambda - 1.0).abs() < 1e-12 {
        family.with_norm_bound(|t, space| {
            if space.alpha() == 0.0 && space.p() >= 4.0 {
                let p = space.p();
                Some(t.powf(2.0 / p - 1.0) * (1.0 - t).powf(-2.0 / p))
            } else {
                None
            }
        })
    } else {
        family
    })
}

/// The Volterra representation: `φ_t(z) = zt/(1−(1−t)z)` and
/// `u_t(z) = τ·(φ_t(z)/t)(1−φ_t(z))·g'(φ_t(z))`, with τ unimodular chosen so
/// that `τ·(1−z)g'(z)` has nonnegative limit at 1. The caller supplies the
/// nontangential limit of `(1−z)g'(z)` at 1.
///
/// At the direction, `φ_t(1) = 1` makes the factor `φ_t(1)/t = 1/t`, so the
/// boundary weight is `u_t(1) = τ·limit/t` (direct substitution; the same
/// value falls out of the exact identity
/// `u_t(z) = z(1−z)(1−(1−t)z)^{-2} g'(φ_t(z))`).
pub fn volterra_family(
    g_prime: ComplexFunction,
    boundary_limit: Complex64,
) -> Result<SymbolFamily> {
    if !boundary_limit.re.is_finite() || !boundary_limit.im.is_finite() {
        return Err(Error::InvalidParameter(
            "volterra family needs a finite boundary limit for (1-z)g'(z)".into(),
        ));
    }
    let tau = if boundary_limit.norm() > 0.0 {
        boundary_limit.conj() / boundary_limit.norm()
    } else {
        one()
    };
    let direction = one();
    let g_for_at = g_prime.clone();
    let symbol_at = move |t: f64| {
        let g = g_for_at.clone();
        let u = ComplexFunction::new(move |z| {
            let denom = one() - (1.0 - t) * z;
            let phi_over_t = z / denom; // φ_t(z)/t, finite as t → 0
            let phi = t * phi_over_t;
            tau * phi_over_t * (one() - phi) * g.evaluate(phi)
        });
        let phi = ComplexFunction::new(move |z| z * t / (one() - (1.0 - t) * z))
            .with_derivative(move |z| {
                let d = one() - (1.0 - t) * z;
                t / (d * d)
            });
        let boundary = vec![(
            direction,
            DirectionData {
                u_value: tau * boundary_limit / t,
                phi_prime: AngularDerivative::Finite(Complex64::new(1.0 / t, 0.0)),
                numerical: false,
            },
        )];
        SymbolPair::new_unchecked(u, phi, boundary)
    };
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        if (xi - one()).norm() > 1e-9 {
            return None;
        }
        let t = tp.t.max(tp.from_left);
        Some(DirectionData {
            u_value: tau * boundary_limit / t,
            phi_prime: AngularDerivative::Finite(Complex64::new(1.0 / t, 0.0)),
            numerical: false,
        })
    };
    let descriptor = FamilyDescriptor {
        label: "volterra".into(),
        kind: "volterra".into(),
        parameters: BTreeMap::from([
            ("boundary_limit_re".to_string(), boundary_limit.re),
            ("boundary_limit_im".to_string(), boundary_limit.im),
        ]),
        expressions: BTreeMap::from([("phi".to_string(), "z*t/(1-(1-t)*z)".to_string())]),
    };
    Ok(SymbolFamily::new(
        "volterra",
        vec![direction],
        symbol_at,
        boundary_at,
        descriptor,
    ))
}

/// The non-univalent example: `φ_t(z) = ((1+(1+t)z)/(2+t))²` with
/// `u_t(z) = U(t)·φ_t'(z)^{2/p}`; generic interior points have two
/// preimages. Constructed for a fixed space because the weight depends on p.
pub fn square_family(
    u_profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    space: &crate::special::SpaceParams,
) -> SymbolFamily {
    let u_profile = Arc::new(u_profile);
    let two_over_p = 2.0 / space.p();
    let direction = one();
    let profile_at = u_profile.clone();
    let symbol_at = move |t: f64| {
        let cap_u = profile_at(t);
        let phi = ComplexFunction::new(move |z| {
            let w = (one() + (1.0 + t) * z) / (2.0 + t);
            w * w
        })
        .with_derivative(move |z| {
            2.0 * (1.0 + t) * (one() + (1.0 + t) * z) / ((2.0 + t) * (2.0 + t))
        });
        let u = ComplexFunction::new(move |z| {
            let dphi = 2.0 * (1.0 + t) * (one() + (1.0 + t) * z) / ((2.0 + t) * (2.0 + t));
            cap_u * dphi.powf(two_over_p)
        });
        let phi_prime_1 = 2.0 * (1.0 + t) / (2.0 + t);
        let boundary = vec![(
            direction,
            DirectionData {
                u_value: Complex64::new(cap_u * phi_prime_1.powf(two_over_p), 0.0),
                phi_prime: AngularDerivative::Finite(Complex64::new(phi_prime_1, 0.0)),
                numerical: false,
            },
        )];
        SymbolPair::new_unchecked(u, phi, boundary)
    };
    let profile_bd = u_profile.clone();
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        if (xi - one()).norm() > 1e-9 {
            return None;
        }
        let t = tp.t;
        let phi_prime_1 = 2.0 * (1.0 + t) / (2.0 + t);
        Some(DirectionData {
            u_value: Complex64::new(profile_bd(t) * phi_prime_1.powf(two_over_p), 0.0),
            phi_prime: AngularDerivative::Finite(Complex64::new(phi_prime_1, 0.0)),
            numerical: false,
        })
    };
    let descriptor = FamilyDescriptor {
        label: "square".into(),
        kind: "square".into(),
        parameters: BTreeMap::from([
            ("p".to_string(), space.p()),
            ("alpha".to_string(), space.alpha()),
        ]),
        expressions: BTreeMap::from([(
            "phi".to_string(),
            "((1+(1+t)*z)/(2+t))^2".to_string(),
        )]),
    };
    let constructed_space = *space;
    let profile_nb = u_profile;
    SymbolFamily::new("square", vec![direction], symbol_at, boundary_at, descriptor)
        // Splitting the disk into the two univalence half-disks gives
        // ‖S_t‖ ≤ U(t)·2^{(1+α)/p}.
        .with_norm_bound(move |t, space| {
            if (space.p() - constructed_space.p()).abs() < 1e-12
                && (space.alpha() - constructed_space.alpha()).abs() < 1e-12
            {
                Some(profile_nb(t).abs() * 2f64.powf((1.0 + space.alpha()) / space.p()))
            } else {
                None
            }
        })
}

/// Weight description for one member of a user-built family: the function,
/// its boundary values at ±1, and an optional sup bound on the disk.
#[derive(Clone)]
pub struct SymbolWeight {
    pub function: ComplexFunction,
    pub at_plus: Complex64,
    pub at_minus: Complex64,
    pub sup_abs: Option<f64>,
}

impl SymbolWeight {
    pub fn constant(value: Complex64) -> Self {
        Self {
            function: ComplexFunction::constant(value),
            at_plus: value,
            at_minus: value,
            sup_abs: Some(value.norm()),
        }
    }
}

/// A two-direction family built on `φ_t(z) = z(c(t) + (1−c(t))z²)`, which
/// fixes ±1 and touches the circle only there; `φ_t'(±1) = 3−2c(t)`.
pub fn cubic_two_direction_family(
    c_of_t: impl Fn(f64) -> f64 + Send + Sync + 'static,
    u_spec: impl Fn(f64) -> SymbolWeight + Send + Sync + 'static,
) -> Result<SymbolFamily> {
    let c_of_t = Arc::new(c_of_t);
    let u_spec = Arc::new(u_spec);
    for k in 0..17 {
        let t = 0.5 + 0.48 * (std::f64::consts::PI * (2.0 * k as f64 + 1.0) / 34.0).cos();
        let c = c_of_t(t);
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cubic family requires c(t) in (0,1); c({t}) = {c}"
            )));
        }
    }
    let plus = one();
    let minus = -one();
    let c_at = c_of_t.clone();
    let u_at = u_spec.clone();
    let symbol_at = move |t: f64| {
        let c = c_at(t);
        assert!(
            c > 0.0 && c < 1.0,
            "cubic family: c({t}) = {c} escapes (0,1)"
        );
        let weight = u_at(t);
        let phi = ComplexFunction::new(move |z| z * (c + (1.0 - c) * z * z))
            .with_derivative(move |z| Complex64::new(c, 0.0) + 3.0 * (1.0 - c) * z * z);
        let dphi = Complex64::new(3.0 - 2.0 * c, 0.0);
        let boundary = vec![
            (
                plus,
                DirectionData {
                    u_value: weight.at_plus,
                    phi_prime: AngularDerivative::Finite(dphi),
                    numerical: false,
                },
            ),
            (
                minus,
                DirectionData {
                    u_value: weight.at_minus,
                    phi_prime: AngularDerivative::Finite(dphi),
                    numerical: false,
                },
            ),
        ];
        SymbolPair::new_unchecked(weight.function, phi, boundary)
    };
    let c_bd = c_of_t;
    let u_bd = u_spec.clone();
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        let c = c_bd(tp.t);
        let dphi = AngularDerivative::Finite(Complex64::new(3.0 - 2.0 * c, 0.0));
        let weight = u_bd(tp.t);
        if (xi - plus).norm() < 1e-9 {
            Some(DirectionData {
                u_value: weight.at_plus,
                phi_prime: dphi,
                numerical: false,
            })
        } else if (xi - minus).norm() < 1e-9 {
            Some(DirectionData {
                u_value: weight.at_minus,
                phi_prime: dphi,
                numerical: false,
            })
        } else {
            None
        }
    };
    let descriptor = FamilyDescriptor {
        label: "cubic-two-direction".into(),
        kind: "cubic".into(),
        parameters: BTreeMap::new(),
        expressions: BTreeMap::from([("phi".to_string(), "z*(c+(1-c)*z^2)".to_string())]),
    };
    let u_nb = u_spec;
    Ok(SymbolFamily::new(
        "cubic-two-direction",
        vec![plus, minus],
        symbol_at,
        boundary_at,
        descriptor,
    )
    // φ_t(0) = 0, so ‖C_{φ_t}‖ = 1 by subordination and ‖S_t‖ ≤ sup|u_t|.
    .with_norm_bound(move |t, _| u_nb(t).sup_abs))
}

/// The divergence example behind the strict inequality: `S_t: f ↦
/// [z ↦ f(t)/(1−tz)]`, i.e. `u_t(z) = 1/(1−tz)` with the constant symbol
/// `φ_t ≡ t`. Every member is compact (rank one), yet `∫₀¹ S_t dt` is the
/// Hilbert matrix operator.
pub fn evaluation_family() -> SymbolFamily {
    let direction = one();
    let symbol_at = move |t: f64| {
        let u = ComplexFunction::new(move |z| (one() - t * z).finv());
        let phi = ComplexFunction::new(move |_| Complex64::new(t, 0.0))
            .with_derivative(|_| Complex64::new(0.0, 0.0));
        let boundary = vec![(
            direction,
            DirectionData {
                u_value: Complex64::new(1.0 / (1.0 - t), 0.0),
                phi_prime: AngularDerivative::Infinite,
                numerical: false,
            },
        )];
        SymbolPair::new_unchecked(u, phi, boundary)
    };
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        if (xi - one()).norm() > 1e-9 {
            return None;
        }
        Some(DirectionData {
            u_value: Complex64::new(1.0 / tp.from_right, 0.0),
            phi_prime: AngularDerivative::Infinite,
            numerical: false,
        })
    };
    let descriptor = FamilyDescriptor {
        label: "evaluation".into(),
        kind: "evaluation".into(),
        parameters: BTreeMap::new(),
        expressions: BTreeMap::from([
            ("u".to_string(), "1/(1-t*z)".to_string()),
            ("phi".to_string(), "t".to_string()),
        ]),
    };
    SymbolFamily::new("evaluation", vec![direction], symbol_at, boundary_at, descriptor)
}

/// Multiplies the weights of a family by the unimodular factor
/// `e^{i·phase(t)}`, leaving `φ_t` and all moduli unchanged. Used to violate
/// the constant-argument hypothesis of the interchange identity.
pub fn phase_family(
    base: &SymbolFamily,
    phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> SymbolFamily {
    let phase = Arc::new(phase);
    let base_at = base.clone();
    let phase_at = phase.clone();
    let symbol_at = move |t: f64| {
        let pair = base_at.at(t);
        let rot = Complex64::from_polar(1.0, phase_at(t));
        let u = pair.u().scaled(rot);
        let boundary = pair
            .boundary()
            .iter()
            .map(|(d, data)| {
                (
                    *d,
                    DirectionData {
                        u_value: rot * data.u_value,
                        ..*data
                    },
                )
            })
            .collect();
        SymbolPair::new_unchecked(u, pair.phi().clone(), boundary)
    };
    let base_bd = base.clone();
    let phase_bd = phase;
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        let data = base_bd.boundary_data(tp, xi).ok()?;
        let rot = Complex64::from_polar(1.0, phase_bd(tp.t));
        Some(DirectionData {
            u_value: rot * data.u_value,
            ..data
        })
    };
    let mut descriptor = base.descriptor().clone();
    descriptor.kind = format!("phase({})", descriptor.kind);
    descriptor.label = format!("phase({})", base.label());
    let base_nb = base.clone();
    SymbolFamily::new(
        format!("phase({})", base.label()),
        base.directions().to_vec(),
        symbol_at,
        boundary_at,
        descriptor,
    )
    .with_norm_bound(move |t, space| base_nb.norm_bound(t, space))
}

/// A family from DSL expressions for `u` and `φ` over the variables `z` and
/// `t`. Boundary data at the declared directions is extracted by radial
/// limits with Richardson extrapolation and flagged as numerical.
pub fn family_from_expressions(
    label: impl Into<String>,
    u_text: &str,
    phi_text: &str,
    directions: Vec<Complex64>,
) -> Result<SymbolFamily> {
    let u_expr = parse_expression(u_text)?;
    let phi_expr = parse_expression(phi_text)?;
    phi_expr.diff_z().map_err(|e| {
        Error::Domain(format!("phi expression must be analytic in z: {e}"))
    })?;
    let mut label = label.into();
    for w in u_expr.warnings().into_iter().chain(phi_expr.warnings()) {
        label.push_str(&format!(" [warning: {w}]"));
    }
    let dirs = directions.clone();
    let u_at = u_expr.clone();
    let phi_at = phi_expr.clone();
    let symbol_at = move |t: f64| {
        let u = u_at.bind_t(t);
        let phi = phi_at.bind_t(t);
        let boundary = dirs
            .iter()
            .map(|&xi| (xi, radial_boundary_data(&u, &phi, xi)))
            .collect();
        SymbolPair::new_unchecked(u, phi, boundary)
    };
    let u_bd = u_expr.clone();
    let phi_bd = phi_expr.clone();
    let dirs_bd = directions.clone();
    let boundary_at = move |tp: &TPoint, xi: Complex64| {
        if !dirs_bd.iter().any(|d| (d - xi).norm() < 1e-9) {
            return None;
        }
        let u = u_bd.bind_t(tp.t);
        let phi = phi_bd.bind_t(tp.t);
        Some(radial_boundary_data(&u, &phi, xi))
    };
    let descriptor = FamilyDescriptor {
        label: label.clone(),
        kind: "expression".into(),
        parameters: BTreeMap::new(),
        expressions: BTreeMap::from([
            ("u".to_string(), u_text.to_string()),
            ("phi".to_string(), phi_text.to_string()),
        ]),
    };
    Ok(SymbolFamily::new(
        label,
        directions,
        symbol_at,
        boundary_at,
        descriptor,
    ))
}

/// Radial limits at `ρ_k = 1 − 2^{-k}`, k = 6..12, Richardson-extrapolated.
/// A symbol whose radial image stays away from the circle marks the angular
/// derivative infinite (compact member).
fn radial_boundary_data(
    u: &ComplexFunction,
    phi: &ComplexFunction,
    xi: Complex64,
) -> DirectionData {
    let ladder: Vec<f64> = (6..=12).map(|k| 1.0 - 2f64.powi(-k)).collect();
    let u_values: Vec<Complex64> = ladder.iter().map(|&r| u.evaluate(r * xi)).collect();
    let phi_values: Vec<Complex64> = ladder.iter().map(|&r| phi.evaluate(r * xi)).collect();
    let dphi_values: Vec<Complex64> = ladder
        .iter()
        .map(|&r| phi.derivative_at(r * xi).unwrap_or(Complex64::new(f64::NAN, 0.0)))
        .collect();
    let phi_limit = richardson(&phi_values);
    let phi_prime = if phi_limit.norm() < 1.0 - 1e-6 {
        AngularDerivative::Infinite
    } else {
        AngularDerivative::Finite(richardson(&dphi_values))
    };
    DirectionData {
        u_value: richardson(&u_values),
        phi_prime,
        numerical: true,
    }
}

/// Two elimination passes against the `2^{-k}` ladder: removes the `2^{-k}`
/// and `4^{-k}` error terms of the radial-limit sequence.
fn richardson(values: &[Complex64]) -> Complex64 {
    let first: Vec<Complex64> = values
        .windows(2)
        .map(|w| 2.0 * w[1] - w[0])
        .collect();
    let second: Vec<Complex64> = first
        .windows(2)
        .map(|w| (4.0 * w[1] - w[0]) / 3.0)
        .collect();
    *second.last().or(first.last()).unwrap_or(&values[values.len() - 1])
}
