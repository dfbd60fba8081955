//! End-to-end checks of the command-line surface: exit codes, report
//! schemas, CSV shape, config layering and determinism.

use std::process::{Command, Output};

fn opmean(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opmean"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn norm_of_constant_one() {
    let out = opmean(&["norm", "1", "--p", "2", "--alpha", "0"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let value = v["report"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-9, "{value}");
}

#[test]
fn norm_of_z_squared() {
    let out = opmean(&["norm", "z^2", "--p", "2", "--alpha", "0"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let value = v["report"]["value"].as_f64().unwrap();
    let expected = (1.0f64 / 3.0).sqrt();
    assert!((value - expected).abs() < 1e-8, "{value} vs {expected}");
}

#[test]
fn norm_of_power_kernel_matches_oracle_route() {
    let out = opmean(&["norm", "(1-z)^(-0.3)", "--p", "2", "--singular", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let value = v["report"]["value"].as_f64().unwrap();
    // Γ(2)Γ(1.4)/Γ(1.7)², square-rooted.
    let expected = 1.0366571322;
    assert!((value - expected).abs() < 1e-6, "{value}");
}

#[test]
fn invalid_space_exits_2() {
    let out = opmean(&["norm", "1", "--p", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_exits_2() {
    let out = opmean(&["norm", "2*q"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position"), "{err}");
}

#[test]
fn bad_c_schedule_exits_2() {
    let out = opmean(&["essnorm", "--p", "5", "--c-schedule", "0.3,0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_reports_unit_norm() {
    let out = opmean(&["kernel", "--kind", "power", "--p", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let check = v["report"]["unit_norm_check"].as_f64().unwrap();
    assert!((check - 1.0).abs() < 1e-6, "{check}");
}

#[test]
fn apply_member_of_hilbert_family() {
    let out = opmean(&[
        "apply",
        "--family",
        "hilbert",
        "--t",
        "0.5",
        "--f-expr",
        "1",
        "--points",
        "0",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let value = v["report"]["values"][0]["value"][0].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-12, "{value}");
}

#[test]
fn sweep_theta_emits_fixed_csv_columns() {
    let out = opmean(&["sweep", "--axis", "theta", "--p", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("axis,quantity,error,converged"));
    // θ = 0.5 row: w_+ = 1/2 for every p.
    let mid = text
        .lines()
        .find(|l| l.starts_with("0.5,"))
        .expect("theta = 0.5 row");
    assert!(mid.contains("0.5,0.5,"), "{mid}");
}

#[test]
fn sweep_lambda_formula_values_finite() {
    let out = opmean(&[
        "sweep",
        "--axis",
        "lambda",
        "--p",
        "5",
        "--values",
        "1,2,3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    // The boundary data of the generalized family is λ-independent, so all
    // rows carry the same finite Beta value.
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((value - 3.3032659991941236).abs() < 1e-6, "{row}");
    }
}

#[test]
fn sweep_is_deterministic() {
    let args = [
        "sweep", "--axis", "t", "--family", "hilbert", "--p", "5", "--format", "csv",
    ];
    let a = opmean(&args);
    let b = opmean(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_reports_identical_apart_from_timestamp() {
    let args = ["norm", "z", "--p", "2"];
    let a = opmean(&args);
    let b = opmean(&args);
    let strip = |bytes: &[u8]| -> String {
        String::from_utf8_lossy(bytes)
            .lines()
            .filter(|l| !l.contains("timestamp_unix"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("opmean-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, r#"{"p": 4.0, "alpha": 1.0, "family": "hilbert"}"#).unwrap();
    let out = opmean(&["norm", "1", "--config", path.to_str().unwrap(), "--p", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    // The flag overrides the file's p; the file's alpha survives.
    assert_eq!(v["config"]["space"]["p"].as_f64(), Some(2.0));
    assert_eq!(v["config"]["space"]["alpha"].as_f64(), Some(1.0));
}

#[test]
fn admissible_evaluation_family_inconclusive_exit() {
    // No declared bound and no witness: integrability stays open → exit 3.
    let out = opmean(&["admissible", "--family", "evaluation", "--p", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn expression_family_requires_both_expressions() {
    let out = opmean(&["essnorm", "--family", "expression", "--u-expr", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn admissible_hilbert_all_pass_exit_zero() {
    let out = opmean(&["admissible", "--family", "hilbert", "--p", "5", "--alpha", "0"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn admissible_identity_map_fails_exit_four() {
    let out = opmean(&[
        "admissible",
        "--family",
        "expression",
        "--u-expr",
        "1",
        "--phi-expr",
        "z",
        "--p",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(4));
}
