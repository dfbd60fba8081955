//! Command implementations: build the requested objects from the validated
//! config, run the library, and emit JSON or CSV reports with stable field
//! order (byte-identical across runs apart from the timestamp).

use crate::config::{OutputFormat, RunConfig};
use crate::{Axis, Preset};
use num_complex::Complex64;
use opmean::admissibility::{check_direction, check_w, default_t_grid, ConditionStatus, ZGridSpec};
use opmean::bergman::{
    bergman_norm_full, make_boundary_peak, make_power_kernel, make_two_point_kernel,
    ComplexFunction, TestKernel,
};
use opmean::essnorm::{
    default_c_schedule, formula_absolute_full, interchange_report, two_direction_quantities,
    CurveOptions, Verdict,
};
use opmean::operators::{
    apply_integral_operator, apply_weighted_composition, cubic_two_direction_family,
    evaluation_family, family_from_expressions, hilbert_family, parse_symbol_expression,
    phase_family, square_family, volterra_family, SymbolFamily, SymbolWeight,
};
use opmean::quadrature::{EndpointSingularities, QuadratureSpec, TPoint};
use opmean::special::beta;
use serde::Serialize;
use serde_json::json;
use std::time::{SystemTime, UNIX_EPOCH};

pub enum CliError {
    Config(String),
    Quadrature(String),
    Io(std::io::Error),
}

impl From<opmean::Error> for CliError {
    fn from(e: opmean::Error) -> Self {
        match e {
            opmean::Error::NotConverged(m) => CliError::Quadrature(m),
            opmean::Error::NonFiniteSample(z) => {
                CliError::Quadrature(format!("non-finite sample at {z}"))
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<u8, CliError>;

#[derive(Serialize)]
struct CsvRow {
    axis: String,
    quantity: f64,
    error: f64,
    converged: bool,
}

fn quad_spec(config: &RunConfig) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: config.tol.unwrap_or(1e-7),
        ..QuadratureSpec::default()
    }
}

fn curve_options(config: &RunConfig) -> CurveOptions {
    let mut opts = CurveOptions::default();
    if let Some(tol) = config.tol {
        opts.norm_spec.rel_tol = tol.max(1e-7);
    }
    opts
}

fn parse_constant(text: &str) -> Result<Complex64, CliError> {
    let f = parse_symbol_expression(text)
        .map_err(|e| CliError::Config(format!("bad constant expression '{text}': {e}")))?;
    Ok(f.evaluate(Complex64::new(0.0, 0.0)))
}

fn build_family(config: &RunConfig) -> Result<SymbolFamily, CliError> {
    Ok(match config.family.as_str() {
        "hilbert" => hilbert_family(config.lambda)?,
        // The bounded-symbol Volterra fixture: g'(w) = 1/(1−w), for which
        // (1−z)g'(z) ≡ 1.
        "volterra" => volterra_family(
            ComplexFunction::new(|w| (Complex64::new(1.0, 0.0) - w).finv()),
            Complex64::new(1.0, 0.0),
        )?,
        "square" => square_family(|_| 1.0, &config.space),
        "cubic" => cubic_two_direction_family(
            |_| 0.5,
            |_| SymbolWeight::constant(Complex64::new(1.0, 0.0)),
        )?,
        "evaluation" => evaluation_family(),
        "expression" => family_from_expressions(
            "expression",
            config.u_expr.as_deref().expect("validated"),
            config.phi_expr.as_deref().expect("validated"),
            vec![Complex64::new(1.0, 0.0)],
        )?,
        other => return Err(CliError::Config(format!("unknown family '{other}'"))),
    })
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit(
    config: &RunConfig,
    command: &str,
    payload: serde_json::Value,
    csv_rows: Option<Vec<CsvRow>>,
) -> Result<(), CliError> {
    let text = match (config.format, csv_rows) {
        (OutputFormat::Csv, Some(rows)) => {
            let mut out = String::from("axis,quantity,error,converged\n");
            for row in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    row.axis, row.quantity, row.error, row.converged
                ));
            }
            out
        }
        _ => {
            let envelope = json!({
                "timestamp_unix": timestamp(),
                "command": command,
                "config": config,
                "report": payload,
            });
            let mut text = serde_json::to_string_pretty(&envelope)
                .map_err(|e| CliError::Config(e.to_string()))?;
            text.push('\n');
            text
        }
    };
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_norm(config: &RunConfig, expr: &str, singular: Option<&str>) -> CliResult {
    let mut f = parse_symbol_expression(expr).map_err(CliError::from)?;
    let mut spec = quad_spec(config);
    if let Some(s) = singular {
        let xi = parse_constant(s)?;
        if (xi.norm() - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "singular point must be unimodular, got |{xi}| = {}",
                xi.norm()
            )));
        }
        f = f.with_singularities(vec![xi]);
        spec.singular_point = Some(xi);
    }
    let result = bergman_norm_full(&f, &config.space, &spec)?;
    let payload = json!({
        "expression": expr,
        "value": result.value,
        "error_estimate": result.error_estimate,
        "cells_used": result.cells_used,
        "converged": result.converged,
    });
    let rows = vec![CsvRow {
        axis: "norm".into(),
        quantity: result.value,
        error: result.error_estimate,
        converged: result.converged,
    }];
    emit(config, "norm", payload, Some(rows))?;
    Ok(if result.converged { 0 } else { 1 })
}

pub fn cmd_kernel(
    config: &RunConfig,
    kind: &str,
    c: Option<f64>,
    n: u32,
    xi_text: &str,
) -> CliResult {
    let xi = parse_constant(xi_text)?;
    let space = &config.space;
    let c = c.unwrap_or(0.5 * space.critical_exponent());
    let kernel: TestKernel = match kind {
        "power" => make_power_kernel(c, xi, space)?,
        "two_point" => make_two_point_kernel(c, config.theta, space)?,
        "boundary_peak" => make_boundary_peak(n, xi, space)?,
        other => return Err(CliError::Config(format!("unknown kernel kind '{other}'"))),
    };
    let norm_check = bergman_norm_full(kernel.function(), space, &quad_spec(config))?;
    let samples: Vec<_> = [0.0, 0.5, 0.9]
        .iter()
        .map(|&x| {
            let z = Complex64::new(x, 0.0);
            let v = kernel.evaluate(z);
            json!({"z": [z.re, z.im], "value": [v.re, v.im]})
        })
        .collect();
    let payload = json!({
        "kind": kind,
        "c": kernel.c,
        "theta": kernel.theta,
        "n": kernel.n,
        "xi": [kernel.xi.re, kernel.xi.im],
        "normalization": kernel.normalization,
        "unit_norm_check": norm_check.value,
        "unit_norm_error": norm_check.error_estimate,
        "samples": samples,
    });
    let rows = vec![CsvRow {
        axis: "unit_norm_check".into(),
        quantity: norm_check.value,
        error: norm_check.error_estimate,
        converged: norm_check.converged,
    }];
    emit(config, "kernel", payload, Some(rows))?;
    Ok(0)
}

pub fn cmd_apply(config: &RunConfig, t: Option<f64>, f_expr: &str, points: &str) -> CliResult {
    let family = build_family(config)?;
    let f = parse_symbol_expression(f_expr).map_err(CliError::from)?;
    let target = match t {
        Some(t) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!(
                    "member parameter must lie in (0,1), got {t}"
                )));
            }
            apply_weighted_composition(&family.at(t), &f)?
        }
        None => apply_integral_operator(&family, &f, &quad_spec(config))?,
    };
    let mut values = Vec::new();
    let mut all_finite = true;
    for text in points.split(';') {
        let z = parse_constant(text.trim())?;
        if z.norm() >= 1.0 {
            return Err(CliError::Config(format!(
                "evaluation point {z} is not in the open disk"
            )));
        }
        let v = target.evaluate(z);
        all_finite &= v.re.is_finite() && v.im.is_finite();
        values.push(json!({"z": [z.re, z.im], "value": [v.re, v.im]}));
    }
    let payload = json!({
        "family": family.label(),
        "t": t,
        "f": f_expr,
        "values": values,
    });
    emit(config, "apply", payload, None)?;
    Ok(if all_finite { 0 } else { 1 })
}

pub fn cmd_essnorm(config: &RunConfig) -> CliResult {
    let family = build_family(config)?;
    let xi = family
        .directions()
        .first()
        .copied()
        .ok_or_else(|| CliError::Config("family has no direction".into()))?;
    let schedule = config
        .c_schedule
        .clone()
        .unwrap_or_else(|| default_c_schedule(&config.space));
    let report = interchange_report(
        &family,
        xi,
        &config.space,
        &schedule,
        &curve_options(config),
        None,
    )?;
    let code = match report.verdict {
        Verdict::InterchangeEquality | Verdict::StrictInequality => 0,
        Verdict::Inconclusive => 3,
    };
    let rows = report
        .c_samples
        .iter()
        .map(|s| CsvRow {
            axis: format!("{}", s.c),
            quantity: s.rhs,
            error: s.rhs_error,
            converged: !s.poisoned,
        })
        .collect();
    emit(
        config,
        "essnorm",
        serde_json::to_value(&report).map_err(|e| CliError::Config(e.to_string()))?,
        Some(rows),
    )?;
    Ok(code)
}

pub fn cmd_admissible(config: &RunConfig) -> CliResult {
    let family = build_family(config)?;
    let grid = default_t_grid();
    let z_spec = ZGridSpec::default();
    let mut payloads = Vec::new();
    let mut statuses: Vec<ConditionStatus> = Vec::new();
    for &xi in family.directions() {
        let direction_report = check_direction(&family, xi, &grid, &z_spec)?;
        let w_report = check_w(&family, xi, &grid, &z_spec, &[], &config.space)?;
        statuses.extend(direction_report.all().iter().map(|c| c.status));
        statuses.extend(w_report.all().iter().map(|c| c.status));
        payloads.push(json!({
            "direction": [xi.re, xi.im],
            "conditions": direction_report,
            "weight_conditions": w_report,
        }));
    }
    let code = if statuses.contains(&ConditionStatus::Fail) {
        4
    } else if statuses.contains(&ConditionStatus::Inconclusive) {
        3
    } else {
        0
    };
    emit(config, "admissible", json!({ "reports": payloads }), None)?;
    Ok(code)
}

fn within(computed: f64, target: f64, rel: f64) -> bool {
    (computed - target).abs() <= rel * target.abs().max(1e-12)
}

pub fn cmd_reproduce(config: &RunConfig, preset: Preset) -> CliResult {
    let space = config.space;
    let opts = curve_options(config);
    match preset {
        Preset::Hilbert => {
            let c_star = space.critical_exponent();
            if c_star >= 1.0 {
                return Err(CliError::Config(format!(
                    "the generalized Hilbert matrix is bounded only for p > 2+alpha; c* = {c_star}"
                )));
            }
            let family = hilbert_family(config.lambda)?;
            // Boundary data u_t(1) = 1/t, φ_t'(1) = (1−t)/t integrate to the
            // Beta value B(c*, 1−c*) = π/sin(πc*).
            let closed = beta(c_star, 1.0 - c_star).map_err(CliError::from)?;
            let schedule = config
                .c_schedule
                .clone()
                .unwrap_or_else(|| default_c_schedule(&space));
            let report = interchange_report(
                &family,
                Complex64::new(1.0, 0.0),
                &space,
                &schedule,
                &opts,
                Some(closed),
            )?;
            let ok = report.verdict == Verdict::InterchangeEquality
                && within(report.formula_absolute, closed, 0.02)
                && within(report.lhs_limit.estimate, closed, 0.02)
                && within(report.rhs_limit.estimate, closed, 0.02);
            let payload = json!({
                "preset": "hilbert",
                "closed_form": closed,
                "report": report,
                "matches_closed_form": ok,
            });
            emit(config, "reproduce", payload, None)?;
            Ok(if ok {
                0
            } else if report.verdict == Verdict::Inconclusive {
                3
            } else {
                1
            })
        }
        Preset::Volterra => {
            let g = ComplexFunction::new(|w| (Complex64::new(1.0, 0.0) - w).finv());
            let family = volterra_family(g.clone(), Complex64::new(1.0, 0.0))?;
            let c_star = space.critical_exponent();
            // Boundary data u_t(1) = 1/t, φ_t'(1) = 1/t integrate to
            // ∫ t^{c*−1} dt = 1/c*.
            let closed = 1.0 / c_star;
            let schedule = config
                .c_schedule
                .clone()
                .unwrap_or_else(|| default_c_schedule(&space));
            let report = interchange_report(
                &family,
                Complex64::new(1.0, 0.0),
                &space,
                &schedule,
                &opts,
                Some(closed),
            )?;
            // Representation identity at three sample points.
            let f = ComplexFunction::constant(Complex64::new(1.0, 0.0));
            let mean = apply_integral_operator(&family, &f, &quad_spec(config))?;
            let direct = opmean::operators::volterra_direct(&g, &f);
            let mut representation_gap = 0.0f64;
            for z in [
                Complex64::new(0.2, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.3),
            ] {
                representation_gap =
                    representation_gap.max((mean.evaluate(z) - direct.evaluate(z)).norm());
            }
            let ok = report.verdict == Verdict::InterchangeEquality
                && within(report.formula_absolute, closed, 0.02)
                && within(report.lhs_limit.estimate, closed, 0.02)
                && within(report.rhs_limit.estimate, closed, 0.02)
                && representation_gap < 1e-6;
            let payload = json!({
                "preset": "volterra",
                "closed_form": closed,
                "representation_gap": representation_gap,
                "report": report,
                "matches_closed_form": ok,
            });
            emit(config, "reproduce", payload, None)?;
            Ok(if ok {
                0
            } else if report.verdict == Verdict::Inconclusive {
                3
            } else {
                1
            })
        }
        Preset::Square => {
            let family = square_family(|_| 1.0, &space);
            // ∫₀¹ ((2+t)/(2(1+t)))^{α/p} dt, which is 1 when α = 0.
            let exponent = space.alpha() / space.p();
            let closed = opmean::quadrature::integrate_interval(
                |t: f64| {
                    Complex64::new(
                        ((2.0 + t) / (2.0 * (1.0 + t))).powf(exponent),
                        0.0,
                    )
                },
                0.0,
                1.0,
                EndpointSingularities::default(),
                &QuadratureSpec::default(),
            )?
            .value
            .re;
            let schedule = config
                .c_schedule
                .clone()
                .unwrap_or_else(|| default_c_schedule(&space));
            let report = interchange_report(
                &family,
                Complex64::new(1.0, 0.0),
                &space,
                &schedule,
                &opts,
                Some(closed),
            )?;
            let ok = report.verdict == Verdict::InterchangeEquality
                && within(report.formula_absolute, closed, 0.02)
                && within(report.lhs_limit.estimate, closed, 0.02)
                && within(report.rhs_limit.estimate, closed, 0.02);
            let payload = json!({
                "preset": "square",
                "closed_form": closed,
                "report": report,
                "matches_closed_form": ok,
            });
            emit(config, "reproduce", payload, None)?;
            Ok(if ok {
                0
            } else if report.verdict == Verdict::Inconclusive {
                3
            } else {
                1
            })
        }
        Preset::Phase => {
            let base = hilbert_family(config.lambda)?;
            let family = phase_family(&base, |t| std::f64::consts::PI * t);
            let schedule = config
                .c_schedule
                .clone()
                .unwrap_or_else(|| default_c_schedule(&space));
            let report = interchange_report(
                &family,
                Complex64::new(1.0, 0.0),
                &space,
                &schedule,
                &opts,
                None,
            )?;
            // The ratio signed/absolute must reproduce the direct quadrature
            // of |∫ e^{iπt} w(t) dt| / ∫ w(t) dt with the family's own
            // boundary integrand w.
            let c_star = space.critical_exponent();
            let spec = QuadratureSpec {
                rel_tol: 1e-11,
                ..QuadratureSpec::default()
            };
            let weighted = opmean::quadrature::integrate_interval_nodes(
                |tp: &TPoint| {
                    let w = tp.from_left.powf(c_star - 1.0) * tp.from_right.powf(-c_star);
                    Complex64::from_polar(1.0, std::f64::consts::PI * tp.t) * w
                },
                0.0,
                1.0,
                EndpointSingularities::both(),
                &spec,
            )?
            .value
            .norm();
            let plain = beta(c_star, 1.0 - c_star).map_err(CliError::from)?;
            let expected_ratio = weighted / plain;
            let ratio = report.formula_signed / report.formula_absolute;
            let ok = report.verdict == Verdict::StrictInequality
                && within(ratio, expected_ratio, 1e-6);
            let payload = json!({
                "preset": "phase",
                "expected_signed_to_absolute_ratio": expected_ratio,
                "computed_ratio": ratio,
                "report": report,
                "matches": ok,
            });
            emit(config, "reproduce", payload, None)?;
            Ok(if ok {
                0
            } else if report.verdict == Verdict::Inconclusive {
                3
            } else {
                1
            })
        }
        Preset::TwodirCollinear | Preset::TwodirPhase => {
            let phase = preset == Preset::TwodirPhase;
            let family = if phase {
                cubic_two_direction_family(
                    |_| 0.5,
                    |t| {
                        SymbolWeight::constant(Complex64::from_polar(
                            1.0,
                            std::f64::consts::PI * t,
                        ))
                    },
                )?
            } else {
                cubic_two_direction_family(
                    |_| 0.5,
                    |_| SymbolWeight::constant(Complex64::new(1.0, 0.0)),
                )?
            };
            let schedule = config
                .c_schedule
                .clone()
                .unwrap_or_else(|| default_c_schedule(&space));
            let report =
                two_direction_quantities(&family, config.theta, &space, &schedule, &opts)?;
            let ok = if phase {
                let expected_gap_ratio = 2.0 / std::f64::consts::PI;
                let closed_ratio = report.closed_integrated / report.closed_pointwise;
                let numeric_ratio =
                    report.numeric_integrated.estimate / report.numeric_pointwise.estimate;
                within(closed_ratio, expected_gap_ratio, 1e-9)
                    && within(numeric_ratio, expected_gap_ratio, 0.03)
                    && report.collinearity_paper_exponent
                        == opmean::essnorm::CollinearityVerdict::StrictInequalityExpected
            } else {
                report.gap.abs() <= 0.02 * report.closed_pointwise.abs().max(1e-12)
                    && report.collinearity_paper_exponent
                        == opmean::essnorm::CollinearityVerdict::EqualityExpected
            };
            let payload = json!({
                "preset": if phase { "twodir-phase" } else { "twodir-collinear" },
                "report": report,
                "matches": ok,
            });
            emit(config, "reproduce", payload, None)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

pub fn cmd_sweep(config: &RunConfig, axis: Axis, values: Option<&str>) -> CliResult {
    let parse_values = |text: &str| -> Result<Vec<f64>, CliError> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad axis value '{s}'")))
            })
            .collect()
    };
    let space = config.space;
    let mut rows: Vec<CsvRow> = Vec::new();
    let quantity_name;
    match axis {
        Axis::C => {
            quantity_name = "rhs_curve";
            let family = build_family(config)?;
            let xi = family
                .directions()
                .first()
                .copied()
                .ok_or_else(|| CliError::Config("family has no direction".into()))?;
            let schedule = match values {
                Some(v) => parse_values(v)?,
                None => config
                    .c_schedule
                    .clone()
                    .unwrap_or_else(|| default_c_schedule(&space)),
            };
            let samples = opmean::essnorm::kernel_limit_curves(
                &family,
                xi,
                &space,
                &schedule,
                &curve_options(config),
            )?;
            for s in samples {
                rows.push(CsvRow {
                    axis: format!("{}", s.c),
                    quantity: s.rhs,
                    error: s.rhs_error,
                    converged: !s.poisoned,
                });
            }
        }
        Axis::Theta => {
            quantity_name = "weight_plus";
            let vals = match values {
                Some(v) => parse_values(v)?,
                None => (0..=10).map(|k| k as f64 / 10.0).collect(),
            };
            let p = space.p();
            for theta in vals {
                let w_plus = theta.powf(p) / (theta.powf(p) + (1.0 - theta).powf(p));
                rows.push(CsvRow {
                    axis: format!("{theta}"),
                    quantity: w_plus,
                    error: 0.0,
                    converged: true,
                });
            }
        }
        Axis::Lambda => {
            quantity_name = "formula_absolute";
            let vals = match values {
                Some(v) => parse_values(v)?,
                None => vec![1.0, 2.0, 3.0],
            };
            for lambda in vals {
                let family = hilbert_family(lambda)?;
                let r = formula_absolute_full(
                    &family,
                    Complex64::new(1.0, 0.0),
                    &space,
                    &quad_spec(config),
                )?;
                rows.push(CsvRow {
                    axis: format!("{lambda}"),
                    quantity: r.value.re,
                    error: r.error_estimate,
                    converged: r.converged,
                });
            }
        }
        Axis::P | Axis::Alpha => {
            quantity_name = "formula_absolute";
            let vals = match values {
                Some(v) => parse_values(v)?,
                None => {
                    if axis == Axis::P {
                        vec![3.0, 4.0, 5.0, 6.0]
                    } else {
                        vec![0.0, 0.5, 1.0]
                    }
                }
            };
            for v in vals {
                let sp = if axis == Axis::P {
                    opmean::special::SpaceParams::new(v, space.alpha())
                } else {
                    opmean::special::SpaceParams::new(space.p(), v)
                }
                .map_err(CliError::from)?;
                let family = build_family(&RunConfig {
                    space: sp,
                    ..config.clone()
                })?;
                let xi = family
                    .directions()
                    .first()
                    .copied()
                    .ok_or_else(|| CliError::Config("family has no direction".into()))?;
                let r = formula_absolute_full(&family, xi, &sp, &quad_spec(config))?;
                rows.push(CsvRow {
                    axis: format!("{v}"),
                    quantity: r.value.re,
                    error: r.error_estimate,
                    converged: r.converged,
                });
            }
        }
        Axis::T => {
            quantity_name = "formula_integrand";
            let family = build_family(config)?;
            let xi = family
                .directions()
                .first()
                .copied()
                .ok_or_else(|| CliError::Config("family has no direction".into()))?;
            let c_star = space.critical_exponent();
            let vals = match values {
                Some(v) => parse_values(v)?,
                None => default_t_grid(),
            };
            for t in vals {
                if !(t > 0.0 && t < 1.0) {
                    return Err(CliError::Config(format!("t = {t} outside (0,1)")));
                }
                let tp = TPoint {
                    t,
                    from_left: t,
                    from_right: 1.0 - t,
                };
                let data = family.boundary_data(&tp, xi)?;
                let value = match data.phi_prime {
                    opmean::operators::AngularDerivative::Infinite => 0.0,
                    opmean::operators::AngularDerivative::Finite(d) => {
                        data.u_value.norm() / d.norm().powf(c_star)
                    }
                };
                rows.push(CsvRow {
                    axis: format!("{t}"),
                    quantity: value,
                    error: 0.0,
                    converged: true,
                });
            }
        }
    }
    let all_converged = rows.iter().all(|r| r.converged);
    let payload = json!({
        "axis": axis_label(axis),
        "quantity": quantity_name,
        "rows": rows.iter().map(|r| json!({
            "axis": r.axis,
            "quantity": r.quantity,
            "error": r.error,
            "converged": r.converged,
        })).collect::<Vec<_>>(),
    });
    emit(config, "sweep", payload, Some(rows))?;
    Ok(if all_converged { 0 } else { 1 })
}

fn axis_label(axis: Axis) -> &'static str {
    match axis {
        Axis::C => "c",
        Axis::T => "t",
        Axis::P => "p",
        Axis::Alpha => "alpha",
        Axis::Lambda => "lambda",
        Axis::Theta => "theta",
    }
}
