//! Acceptance suite: one pass/fail line per criterion, asserted at the end.
//!
//! Criteria run sequentially; the curve samples they produce feed the
//! property checks at the end (Minkowski direction, phase invariance,
//! determinism).

use num_complex::Complex64;
use opmean::admissibility::{check_w, default_t_grid, log_witness_probe, ConditionStatus, ZGridSpec};
use opmean::bergman::{bergman_norm_full, power_function, ComplexFunction};
use opmean::essnorm::{
    default_c_schedule, extrapolate_limit, formula_absolute, formula_signed, interchange_report,
    single_operator_kernel_limit, two_direction_quantities, CSample, CollinearityVerdict,
    CurveOptions, Verdict,
};
use opmean::operators::{
    apply_integral_operator, cubic_two_direction_family, evaluation_family, hilbert_family,
    phase_family, square_family, volterra_direct, volterra_family, SymbolWeight,
};
use opmean::quadrature::{integrate_disk, QuadratureSpec};
use opmean::special::{beta, disk_moment, power_kernel_norm_oracle, SpaceParams};

const PI: f64 = std::f64::consts::PI;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn rel_err(computed: f64, target: f64) -> f64 {
    (computed - target).abs() / target.abs().max(1e-12)
}

/// Samples stashed by the experiment criteria for the property checks.
#[derive(Default)]
struct Stash {
    curves: Vec<(String, Vec<CSample>)>,
}

type Criterion = fn(&mut Stash) -> Result<String, String>;

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 10] = [
        ("1 measure sanity", criterion_1),
        ("2 kernel normalization", criterion_2),
        ("3 approximate evaluation limits", criterion_3),
        ("4 generalized Hilbert matrix", criterion_4),
        ("5 Volterra operator", criterion_5),
        ("6 non-univalent square map", criterion_6),
        ("7 preimage sum equality", criterion_7),
        ("8 two-direction necessity", criterion_8),
        ("9 divergent evaluation family", criterion_9),
        ("10 property suites", criterion_10),
    ];
    let mut stash = Stash::default();
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let started = std::time::Instant::now();
        match run(&mut stash) {
            Ok(detail) => {
                println!("PASS {name} [{:.1?}]: {detail}", started.elapsed());
            }
            Err(reason) => {
                println!("FAIL {name} [{:.1?}]: {reason}", started.elapsed());
                failures.push(name);
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance criteria failed: {failures:?}"
    );
}

/// ‖1‖ = 1 to 1e−10 on the space grid and the disk moments match
/// (1+α)B(k+1, α+1) to 1e−10 for k ≤ 8.
fn criterion_1(_: &mut Stash) -> Result<String, String> {
    let spec = QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-13,
        ..QuadratureSpec::default()
    };
    let mut worst: f64 = 0.0;
    for (p, alpha) in [(2.0, 0.0), (4.0, 0.0), (5.0, 1.0), (3.0, 2.5)] {
        let sp = SpaceParams::new(p, alpha).map_err(|e| e.to_string())?;
        let one_fn = ComplexFunction::constant(one());
        let n = bergman_norm_full(&one_fn, &sp, &spec).map_err(|e| e.to_string())?;
        let err = (n.value - 1.0).abs();
        worst = worst.max(err);
        if err > 1e-10 {
            return Err(format!("unit norm off by {err:.2e} at (p,α)=({p},{alpha})"));
        }
    }
    for alpha in [0.0, 1.0, 2.5] {
        for k in 0..=8i32 {
            let target = disk_moment(k as f64, alpha).map_err(|e| e.to_string())?;
            let got = integrate_disk(
                move |z| Complex64::new(z.norm_sqr().powi(k), 0.0),
                alpha,
                &spec,
            )
            .map_err(|e| e.to_string())?;
            let err = (got.value.re - target).abs();
            worst = worst.max(err);
            if err > 1e-10 {
                return Err(format!("moment k={k}, α={alpha} off by {err:.2e}"));
            }
        }
    }
    Ok(format!("worst deviation {worst:.2e} (tolerance 1e-10)"))
}

/// Quadrature norm of (1−z)^{-c} matches the series oracle to 1e−6 relative
/// for c ∈ {0.1c*, 0.5c*, 0.9c*, c*−0.05} across the space grid.
fn criterion_2(_: &mut Stash) -> Result<String, String> {
    let spec = QuadratureSpec {
        rel_tol: 1e-8,
        abs_tol: 1e-14,
        base_order: 16,
        max_depth: 18,
        grading_exponent: 12.0,
        singular_point: None,
    };
    let mut worst: f64 = 0.0;
    for (p, alpha) in [(2.0, 0.0), (4.0, 0.0), (5.0, 1.0), (3.0, 2.5)] {
        let sp = SpaceParams::new(p, alpha).map_err(|e| e.to_string())?;
        let cs = sp.critical_exponent();
        for c in [0.1 * cs, 0.5 * cs, 0.9 * cs, cs - 0.05] {
            let f = power_function(c, one());
            let quad = bergman_norm_full(&f, &sp, &spec).map_err(|e| e.to_string())?;
            let oracle = power_kernel_norm_oracle(c, &sp)
                .map_err(|e| e.to_string())?
                .powf(1.0 / p);
            let rel = rel_err(quad.value, oracle);
            worst = worst.max(rel);
            if rel > 1e-6 {
                return Err(format!(
                    "(p,α)=({p},{alpha}), c={c:.4}: quadrature {} vs oracle {oracle} (rel {rel:.2e})",
                    quad.value
                ));
            }
        }
    }
    Ok(format!("worst relative disagreement {worst:.2e} (tolerance 1e-6)"))
}

/// Extrapolated lim_c ‖f_{c,1}·g‖ equals |g(1)| within 2% for the four test
/// multipliers at (p,α) = (4,0).
fn criterion_3(_: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(4.0, 0.0).map_err(|e| e.to_string())?;
    // The products with a zero tangential limit decay like the fourth root
    // of the gap, so the schedule runs two rungs deeper than the default.
    let cs = sp.critical_exponent();
    let schedule: Vec<f64> = (0..=7).map(|k| cs * (1.0 - 0.4 * 0.5f64.powi(k))).collect();
    let spec = QuadratureSpec {
        rel_tol: 1e-7,
        abs_tol: 1e-13,
        base_order: 12,
        max_depth: 16,
        grading_exponent: 8.0,
        singular_point: None,
    };
    let cases: [(&str, ComplexFunction, f64); 4] = [
        ("z", ComplexFunction::identity(), 1.0),
        (
            "(1+z)/2",
            ComplexFunction::new(|z| (one() + z) * 0.5),
            1.0,
        ),
        ("1-z", ComplexFunction::new(|z| one() - z), 0.0),
        (
            "exp(z-1)",
            ComplexFunction::new(|z| (z - one()).exp()),
            1.0,
        ),
    ];
    let mut details = Vec::new();
    for (label, g, target) in cases {
        let mut samples = Vec::new();
        for &c in &schedule {
            let kernel = opmean::bergman::make_power_kernel(c, one(), &sp)
                .map_err(|e| e.to_string())?;
            let prod = kernel.function().product(&g);
            let norm = bergman_norm_full(&prod, &sp, &spec).map_err(|e| e.to_string())?;
            samples.push((c, norm.value));
        }
        let lim = extrapolate_limit(&samples, sp.critical_exponent())
            .map_err(|e| e.to_string())?;
        let err = (lim.estimate - target).abs();
        if err > 0.02 {
            return Err(format!(
                "g = {label}: extrapolated {:.5} vs |g(1)| = {target} (err {err:.4})",
                lim.estimate
            ));
        }
        details.push(format!("{label}: {:.4}", lim.estimate));
    }
    Ok(format!("limits {{{}}} within 2% of |g(1)|", details.join(", ")))
}

/// interchange_report(hilbert(1), p=5, α=0) must return the equality verdict
/// with all four quantities within 2% of 0.4π/sin(0.4π); repeated at
/// (p,α) = (6,1) against 0.5π/sin(0.5π) = π/2.
fn criterion_4(stash: &mut Stash) -> Result<String, String> {
    let mut notes = Vec::new();
    for (p, alpha, stated_target) in [
        (5.0, 0.0, 0.4 * PI / (0.4 * PI).sin()),
        (6.0, 1.0, 0.5 * PI / (0.5 * PI).sin()),
    ] {
        let sp = SpaceParams::new(p, alpha).map_err(|e| e.to_string())?;
        let c_star = sp.critical_exponent();
        let family = hilbert_family(1.0).map_err(|e| e.to_string())?;
        let schedule = default_c_schedule(&sp);
        let report = interchange_report(
            &family,
            one(),
            &sp,
            &schedule,
            &CurveOptions::default(),
            Some(stated_target),
        )
        .map_err(|e| e.to_string())?;
        stash
            .curves
            .push((format!("hilbert(p={p},α={alpha})"), report.c_samples.clone()));

        let boundary_beta = beta(c_star, 1.0 - c_star).map_err(|e| e.to_string())?;
        let quantities = [
            ("formula_absolute", report.formula_absolute),
            ("formula_signed", report.formula_signed),
            ("lhs_limit", report.lhs_limit.estimate),
            ("rhs_limit", report.rhs_limit.estimate),
        ];
        if report.verdict != Verdict::InterchangeEquality {
            return Err(format!(
                "(p,α)=({p},{alpha}): verdict {:?}, expected the equality verdict",
                report.verdict
            ));
        }
        for (name, value) in quantities {
            if rel_err(value, stated_target) > 0.02 {
                return Err(format!(
                    "(p,α)=({p},{alpha}): {name} = {value:.6} is not within 2% of the stated \
                     target {stated_target:.6}; the four quantities mutually agree and match the \
                     boundary-data Beta integral B(c*,1-c*) = {boundary_beta:.6} \
                     (relative gap {:.2e})",
                    rel_err(value, boundary_beta)
                ));
            }
        }
        notes.push(format!(
            "(p,α)=({p},{alpha}): common value {:.6}",
            report.formula_absolute
        ));
    }
    Ok(notes.join("; "))
}

/// Volterra with g'(w) = 1/(1−w) on (4,0): common value 2/3 within 2% and
/// the family-vs-direct representation identity to 1e−6.
fn criterion_5(stash: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(4.0, 0.0).map_err(|e| e.to_string())?;
    let g = ComplexFunction::new(|w| (one() - w).finv());
    let family = volterra_family(g.clone(), one()).map_err(|e| e.to_string())?;
    let schedule = default_c_schedule(&sp);
    let target = 2.0 / 3.0;
    let report = interchange_report(
        &family,
        one(),
        &sp,
        &schedule,
        &CurveOptions::default(),
        Some(target),
    )
    .map_err(|e| e.to_string())?;
    stash.curves.push(("volterra".into(), report.c_samples.clone()));
    if report.verdict != Verdict::InterchangeEquality {
        return Err(format!("verdict {:?}", report.verdict));
    }
    let c_star = sp.critical_exponent();
    let derived = 1.0 / c_star; // ∫ t^{c*−1} dt with u_t(1) = 1/t
    for (name, value) in [
        ("formula_absolute", report.formula_absolute),
        ("formula_signed", report.formula_signed),
        ("lhs_limit", report.lhs_limit.estimate),
        ("rhs_limit", report.rhs_limit.estimate),
    ] {
        if rel_err(value, target) > 0.02 {
            return Err(format!(
                "{name} = {value:.6} is not within 2% of the stated target 2/3; the four \
                 quantities mutually agree and match the boundary-data integral \
                 ∫ t^{{c*-1}} dt = 1/c* = {derived} (relative gap {:.2e})",
                rel_err(value, derived)
            ));
        }
    }
    // Representation identity at three sample points.
    let f = ComplexFunction::constant(one());
    let mean = apply_integral_operator(&family, &f, &QuadratureSpec::default())
        .map_err(|e| e.to_string())?;
    let direct = volterra_direct(&g, &f);
    let mut gap: f64 = 0.0;
    for z in [
        Complex64::new(0.2, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.5, 0.3),
    ] {
        gap = gap.max((mean.evaluate(z) - direct.evaluate(z)).norm());
    }
    if gap > 1e-6 {
        return Err(format!("representation identity gap {gap:.2e} > 1e-6"));
    }
    Ok(format!(
        "common value {:.6} (target 2/3), representation gap {gap:.1e}",
        report.formula_absolute
    ))
}

/// Square family: U ≡ 1, α = 0 gives 1 within 2%; at (p,α) = (4,1) the
/// formula integral matches a million-panel trapezoid reference to 1e−4.
fn criterion_6(stash: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(3.0, 0.0).map_err(|e| e.to_string())?;
    let family = square_family(|_| 1.0, &sp);
    let schedule = default_c_schedule(&sp);
    let report = interchange_report(
        &family,
        one(),
        &sp,
        &schedule,
        &CurveOptions::default(),
        Some(1.0),
    )
    .map_err(|e| e.to_string())?;
    stash.curves.push(("square(α=0)".into(), report.c_samples.clone()));
    if report.verdict != Verdict::InterchangeEquality {
        return Err(format!("verdict {:?} at α = 0", report.verdict));
    }
    for (name, value) in [
        ("formula_absolute", report.formula_absolute),
        ("lhs_limit", report.lhs_limit.estimate),
        ("rhs_limit", report.rhs_limit.estimate),
    ] {
        if rel_err(value, 1.0) > 0.02 {
            return Err(format!("{name} = {value:.6} vs 1"));
        }
    }

    // α = 1, p = 4: trapezoid oracle for ∫₀¹ ((2+t)/(2(1+t)))^{1/4} dt.
    let sp2 = SpaceParams::new(4.0, 1.0).map_err(|e| e.to_string())?;
    let family2 = square_family(|_| 1.0, &sp2);
    let quarter = |t: f64| ((2.0 + t) / (2.0 * (1.0 + t))).powf(0.25);
    let panels = 1_000_000usize;
    let h = 1.0 / panels as f64;
    let mut trapezoid = 0.5 * (quarter(0.0) + quarter(1.0));
    for i in 1..panels {
        trapezoid += quarter(i as f64 * h);
    }
    trapezoid *= h;
    let formula = formula_absolute(&family2, one(), &sp2).map_err(|e| e.to_string())?;
    let gap = (formula - trapezoid).abs();
    if gap > 1e-4 {
        return Err(format!(
            "formula {formula:.8} vs trapezoid reference {trapezoid:.8} (gap {gap:.2e})"
        ));
    }
    Ok(format!(
        "α=0 value {:.5}; α=1 formula {formula:.8} vs trapezoid {trapezoid:.8} (gap {gap:.1e})",
        report.formula_absolute
    ))
}

/// φ(z) = (1+z²)/2 with u ≡ 1 on (2,0): the extrapolated kernel limit of
/// ‖f_{c,1}∘φ‖² equals the preimage sum 2 within 2%; the single-preimage
/// fixture at t = 1/2 of the Hilbert family reproduces 32.
fn criterion_7(_: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(2.0, 0.0).map_err(|e| e.to_string())?;
    let phi = ComplexFunction::new(move |z| (one() + z * z) * 0.5).with_derivative(|z| z);
    let pair = opmean::operators::SymbolPair::new(ComplexFunction::constant(one()), phi, vec![])
        .map_err(|e| e.to_string())?;
    let spec = QuadratureSpec {
        rel_tol: 1e-6,
        abs_tol: 1e-12,
        base_order: 10,
        max_depth: 13,
        grading_exponent: 5.0,
        singular_point: None,
    };
    let preimages = [one(), -one()];
    let sum = opmean::essnorm::preimage_sum(&pair, one(), &preimages, &sp)
        .map_err(|e| e.to_string())?;
    let lim = single_operator_kernel_limit(
        &pair,
        one(),
        &preimages,
        &sp,
        &default_c_schedule(&sp),
        &spec,
    )
    .map_err(|e| e.to_string())?;
    if (sum - 2.0).abs() > 1e-12 {
        return Err(format!("preimage sum {sum} differs from 2"));
    }
    if rel_err(lim.estimate, sum) > 0.02 {
        return Err(format!(
            "extrapolated limit {:.5} vs preimage sum {sum} (rel {:.2e})",
            lim.estimate,
            rel_err(lim.estimate, sum)
        ));
    }

    // Single-operator fixture: hilbert(1) at t = 1/2 on (5,0) gives 2⁵ = 32.
    let sp5 = SpaceParams::new(5.0, 0.0).map_err(|e| e.to_string())?;
    let family = hilbert_family(1.0).map_err(|e| e.to_string())?;
    let pair5 = family.at(0.5);
    let sum5 = opmean::essnorm::preimage_sum(&pair5, one(), &[one()], &sp5)
        .map_err(|e| e.to_string())?;
    let lim5 = single_operator_kernel_limit(
        &pair5,
        one(),
        &[one()],
        &sp5,
        &default_c_schedule(&sp5),
        &spec,
    )
    .map_err(|e| e.to_string())?;
    if (sum5 - 32.0).abs() > 1e-9 || rel_err(lim5.estimate, 32.0) > 0.02 {
        return Err(format!(
            "hilbert fixture: preimage sum {sum5}, extrapolated {:.4} (target 32)",
            lim5.estimate
        ));
    }
    Ok(format!(
        "square-root fixture {:.4} vs 2; hilbert fixture {:.3} vs 32",
        lim.estimate, lim5.estimate
    ))
}

/// Two-direction necessity on the cubic family: the phase preset reports the
/// closed-form gap ratio 2/π with numerical curves consistent within 3%, the
/// collinear preset reports zero gap, and the collinearity verdicts classify
/// both.
fn criterion_8(stash: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(2.0, 0.0).map_err(|e| e.to_string())?;
    let schedule = default_c_schedule(&sp);
    let opts = CurveOptions::default();

    let collinear = cubic_two_direction_family(|_| 0.5, |_| SymbolWeight::constant(one()))
        .map_err(|e| e.to_string())?;
    let report = two_direction_quantities(&collinear, 0.5, &sp, &schedule, &opts)
        .map_err(|e| e.to_string())?;
    stash
        .curves
        .push(("twodir-collinear".into(), report.c_samples.clone()));
    if report.gap.abs() > 0.02 * report.closed_pointwise.max(1e-12) {
        return Err(format!(
            "collinear preset gap {:.3e} vs pointwise value {:.5}",
            report.gap, report.closed_pointwise
        ));
    }
    if report.collinearity_paper_exponent != CollinearityVerdict::EqualityExpected {
        return Err(format!(
            "collinear preset misclassified: {:?}",
            report.collinearity_paper_exponent
        ));
    }
    let collinear_gap = report.gap;

    let phased = cubic_two_direction_family(
        |_| 0.5,
        |t| SymbolWeight::constant(Complex64::from_polar(1.0, PI * t)),
    )
    .map_err(|e| e.to_string())?;
    let report = two_direction_quantities(&phased, 0.5, &sp, &schedule, &opts)
        .map_err(|e| e.to_string())?;
    stash
        .curves
        .push(("twodir-phase".into(), report.c_samples.clone()));
    let target_ratio = 2.0 / PI;
    let closed_ratio = report.closed_integrated / report.closed_pointwise;
    if rel_err(closed_ratio, target_ratio) > 1e-9 {
        return Err(format!(
            "closed-form gap ratio {closed_ratio:.8} vs 2/π = {target_ratio:.8}"
        ));
    }
    let numeric_ratio = report.numeric_integrated.estimate / report.numeric_pointwise.estimate;
    if rel_err(numeric_ratio, target_ratio) > 0.03 {
        return Err(format!(
            "numerical gap ratio {numeric_ratio:.5} vs 2/π = {target_ratio:.5} (beyond 3%)"
        ));
    }
    if report.collinearity_paper_exponent != CollinearityVerdict::StrictInequalityExpected {
        return Err(format!(
            "phase preset misclassified: {:?}",
            report.collinearity_paper_exponent
        ));
    }
    Ok(format!(
        "collinear gap {collinear_gap:.1e}; phase ratio closed {closed_ratio:.6}, numeric {numeric_ratio:.4} (target 2/π ≈ {target_ratio:.4})"
    ))
}

/// The rank-one evaluation family: the witness probe's lower-bound curve for
/// ‖S_t‖ more than doubles per decade of 1−t, and the weight-condition
/// report flags integrability as not supported.
fn criterion_9(_: &mut Stash) -> Result<String, String> {
    let sp = SpaceParams::new(4.0, 0.0).map_err(|e| e.to_string())?;
    let family = evaluation_family();
    let witness = log_witness_probe(&sp);

    // Lower bounds along the witness at the three decades.
    let probe_fn = match &witness {
        opmean::admissibility::Probe::Custom { function, .. } => function.clone(),
        _ => unreachable!(),
    };
    let spec = QuadratureSpec {
        rel_tol: 1e-7,
        abs_tol: 1e-11,
        base_order: 10,
        grading_exponent: 5.0,
        ..QuadratureSpec::default()
    };
    let probe_norm = bergman_norm_full(&probe_fn, &sp, &spec)
        .map_err(|e| e.to_string())?
        .value;
    let mut bounds = Vec::new();
    for t in [0.9, 0.99, 0.999] {
        let pair = family.at(t);
        let u = pair.u().clone();
        let value_at_t = probe_fn.evaluate(Complex64::new(t, 0.0));
        // S_t f = f(t)·u_t, so ‖S_t f‖ = |f(t)|·‖u_t‖.
        let u_norm = bergman_norm_full(&u, &sp, &spec).map_err(|e| e.to_string())?.value;
        bounds.push(value_at_t.norm() * u_norm / probe_norm);
    }
    let factors = [bounds[1] / bounds[0], bounds[2] / bounds[1]];
    if factors.iter().any(|f| *f <= 2.0) {
        return Err(format!(
            "decade growth factors {:.2}, {:.2} not both above 2 (bounds {:?})",
            factors[0], factors[1], bounds
        ));
    }

    let report = check_w(
        &family,
        one(),
        &default_t_grid(),
        &ZGridSpec::default(),
        &[witness],
        &sp,
    )
    .map_err(|e| e.to_string())?;
    if report.integrability.status != ConditionStatus::Fail {
        return Err(format!(
            "integrability reported {:?}, expected the witnessed failure: {}",
            report.integrability.status, report.integrability.evidence
        ));
    }
    Ok(format!(
        "lower bounds {:.3}, {:.2}, {:.1} (decade factors {:.2}, {:.2}); integrability flagged as witnessed failure",
        bounds[0], bounds[1], bounds[2], factors[0], factors[1]
    ))
}

/// Property suites: the Minkowski direction on every stashed sample, phase
/// invariance of the absolute formula, global phase invariance of the signed
/// formula, formula consistency for constant-argument families, and
/// determinism of reports.
fn criterion_10(stash: &mut Stash) -> Result<String, String> {
    // Minkowski direction on all collected curve samples.
    let mut checked = 0usize;
    for (label, samples) in &stash.curves {
        for s in samples {
            let slack = s.lhs_error + s.rhs_error + 5e-4 * s.rhs.abs().max(1e-12);
            if s.lhs > s.rhs + slack {
                return Err(format!(
                    "{label}: lhs({c}) = {lhs:.6} exceeds rhs({c}) = {rhs:.6} + slack",
                    c = s.c,
                    lhs = s.lhs,
                    rhs = s.rhs
                ));
            }
            checked += 1;
        }
    }
    if checked == 0 {
        return Err("no curve samples were stashed".into());
    }

    // Phase invariance of formula_absolute to 1e−12.
    let sp = SpaceParams::new(5.0, 0.0).map_err(|e| e.to_string())?;
    let base = hilbert_family(1.0).map_err(|e| e.to_string())?;
    let phased = phase_family(&base, |t| PI * t * t + 0.3 * t);
    let fa_base = formula_absolute(&base, one(), &sp).map_err(|e| e.to_string())?;
    let fa_phased = formula_absolute(&phased, one(), &sp).map_err(|e| e.to_string())?;
    if (fa_base - fa_phased).abs() > 1e-12 * (1.0 + fa_base.abs()) {
        return Err(format!(
            "formula_absolute moved under a t-dependent phase: {fa_base} vs {fa_phased}"
        ));
    }

    // Global (t-independent) phase invariance of formula_signed.
    let rotated = phase_family(&base, |_| 0.7);
    let fs_base = formula_signed(&base, one(), &sp).map_err(|e| e.to_string())?;
    let fs_rot = formula_signed(&rotated, one(), &sp).map_err(|e| e.to_string())?;
    if (fs_base - fs_rot).abs() > 1e-12 * (1.0 + fs_base.abs()) {
        return Err(format!(
            "formula_signed moved under a constant phase: {fs_base} vs {fs_rot}"
        ));
    }

    // Constant-argument consistency: signed = absolute to 1e−10.
    if (fs_base - fa_base).abs() > 1e-10 * fa_base.abs() {
        return Err(format!(
            "signed {fs_base} differs from absolute {fa_base} for a constant-argument family"
        ));
    }

    // Determinism: an identical report twice, byte for byte.
    let sched = vec![0.2, 0.26, 0.3];
    let opts = CurveOptions::default();
    let r1 = interchange_report(&base, one(), &sp, &sched, &opts, None)
        .map_err(|e| e.to_string())?;
    let r2 = interchange_report(&base, one(), &sp, &sched, &opts, None)
        .map_err(|e| e.to_string())?;
    let s1 = serde_json::to_string(&r1).map_err(|e| e.to_string())?;
    let s2 = serde_json::to_string(&r2).map_err(|e| e.to_string())?;
    if s1 != s2 {
        return Err("two identical report runs serialized differently".into());
    }

    Ok(format!(
        "Minkowski direction on {checked} samples; phase invariances at 1e-12; deterministic reports"
    ))
}
