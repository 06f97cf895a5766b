//! End-to-end tests of the binary: subcommands, exit codes, and the trace
//! file formats.

use std::path::Path;
use std::process::{Command, Output};

fn rabiccati(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabiccati"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn list_prints_six_names() {
    let out = rabiccati(&["list"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let names: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(
        names,
        vec![
            "scenario_tanh",
            "scenario_sinh",
            "example1",
            "theta_sine",
            "theta_arctan_a",
            "theta_arctan_b"
        ]
    );
}

#[test]
fn run_writes_csv_with_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tr.csv");
    let out = rabiccati(&[
        "run",
        "theta_arctan_b",
        "--t-max",
        "3",
        "--steps",
        "301",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 302);
    assert!(lines[0].starts_with("t,re_a,im_a,re_b,im_b,abs_a,abs_b,"));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 15, "row: {line}");
    }
    // First row carries the initial conditions exactly.
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0); // t
    assert_eq!(first[1], 1.0); // re_a
    assert_eq!(first[2], 0.0); // im_a
    assert_eq!(first[3], 0.0); // re_b
    assert_eq!(first[4], 0.0); // im_b
    assert_eq!(first[10], 0.0); // re_u
    assert_eq!(first[11], 0.0); // im_u
    assert_eq!(first[12], 0.0); // unitarity_defect
}

#[test]
fn run_csv_reproduces_values_to_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sinh.csv");
    let out = rabiccati(&[
        "run",
        "scenario_sinh",
        "--steps",
        "301",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    // Row with t = 1: abs_a must be 1/cosh(1) to the printed precision.
    let row = text
        .lines()
        .find(|line| line.starts_with("1.00000000000e+00,"))
        .expect("t = 1 row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[5], "6.48054273664e-01");
    let abs_a: f64 = fields[5].parse().unwrap();
    assert!((abs_a - 1.0 / 1f64.cosh()).abs() < 1e-11);
    // Every floating field uses the 12-significant-digit scientific form.
    for f in fields {
        assert!(f.contains('e'), "field {f}");
    }
}

#[test]
fn run_json_mirrors_fields_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tr.json");
    let out = rabiccati(&[
        "run",
        "scenario_tanh",
        "--steps",
        "11",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["schema_version"], "1.0");
    assert_eq!(value["case"], "scenario_tanh");
    assert_eq!(value["parameters"]["phi_omega"], "0");
    assert_eq!(value["grid"]["steps"], 11);
    let samples = value["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 11);
    for key in [
        "t",
        "re_a",
        "im_a",
        "re_b",
        "im_b",
        "abs_a",
        "abs_b",
        "omega_mag",
        "omega_phase",
        "Omega",
        "re_u",
        "im_u",
        "unitarity_defect",
        "schrodinger_residual",
        "riccati_residual",
    ] {
        assert!(samples[3].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_passes_for_all_catalog_cases() {
    for case in [
        "scenario_tanh",
        "scenario_sinh",
        "example1",
        "theta_sine",
        "theta_arctan_a",
        "theta_arctan_b",
    ] {
        let out = rabiccati(&["verify", case, "--t-max", "3", "--steps", "301"]);
        assert_eq!(exit_code(&out), 0, "{case}: {}", stdout(&out));
        assert!(stdout(&out).contains("8/8 checks passed"), "{case}");
    }
}

#[test]
fn verify_report_is_deterministic() {
    let first = rabiccati(&["verify", "theta_sine", "--steps", "301"]);
    let second = rabiccati(&["verify", "theta_sine", "--steps", "301"]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn unknown_case_exits_2() {
    let out = rabiccati(&["run", "scenario_exp"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn bad_expression_reports_offset_and_exits_2() {
    let out = rabiccati(&["run", "scenario_tanh", "--phi-omega", "tanh(w*t"]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("offset 9"), "stderr: {err}");
}

#[test]
fn bad_flag_exits_2() {
    let out = rabiccati(&["run", "scenario_tanh", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn general_integral_csv_has_all_constants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.csv");
    let out = rabiccati(&[
        "general-integral",
        "scenario_tanh",
        "--constants",
        "2,1+i,-3i",
        "--steps",
        "41",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "re_c0,im_c0,t,re_u,im_u,abs_denominator,near_pole"
    );
    assert_eq!(lines.len(), 1 + 3 * 41);
    // u(0) = 1/C0 for the first constant (C0 = 2).
    let first: Vec<&str> = lines[1].split(',').collect();
    let re_u: f64 = first[3].parse().unwrap();
    assert!((re_u - 0.5).abs() < 1e-11);
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn custom_x_mode_runs_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "x.json",
        r#"{
            "mode": "X",
            "expressions": {
                "mag": "t*exp(-k*t)",
                "phase": "0.5*t+0.2*t^2",
                "longitudinal": "0.3*cos(t)"
            },
            "parameters": {"k": 1.0},
            "grid": {"t_max": 3.0, "steps": 201}
        }"#,
    );
    let out = rabiccati(&["custom", "--config", &cfg, "--verify"]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("8/8 checks passed"));

    let trace = dir.path().join("x.csv");
    let out = rabiccati(&["custom", "--config", &cfg, "--out", trace.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn custom_theta_mode_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "theta.json",
        r#"{
            "mode": "Theta",
            "expressions": {
                "theta": "2*atan(t/sqrt(2+t^2))",
                "omega_mag": "1",
                "omega_phase": "0.3*sin(t)"
            },
            "grid": {"t_max": 3.0, "steps": 201}
        }"#,
    );
    let out = rabiccati(&["custom", "--config", &cfg, "--verify"]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
}

#[test]
fn failing_verification_exits_1() {
    // A deliberately sloppy oracle on a coarse grid (so step clamping
    // cannot rescue it) falls out of the 1e-7 agreement band; the suite
    // must report the disagreement and exit 1.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "loose.json",
        r#"{
            "mode": "Theta",
            "expressions": {
                "theta": "2*atan(t/sqrt(2+t^2))",
                "omega_mag": "1",
                "omega_phase": "0"
            },
            "grid": {"t_max": 3.0, "steps": 5},
            "tolerances": {"rel": 1e-2, "abs": 1e-2}
        }"#,
    );
    let out = rabiccati(&["custom", "--config", &cfg, "--verify"]);
    assert_eq!(exit_code(&out), 1, "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL"), "{}", stdout(&out));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"mode": "X""#);
    let out = rabiccati(&["custom", "--config", &cfg]);
    assert_eq!(exit_code(&out), 2);
    let cfg = write_config(
        dir.path(),
        "bad2.json",
        r#"{"mode": "X", "expressions": {"mag": "t*(", "phase": "0", "longitudinal": "0"}}"#,
    );
    let out = rabiccati(&["custom", "--config", &cfg]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("mag"), "stderr: {err}");
}

#[test]
fn phase_singularity_is_a_numerical_failure() {
    // theta = t/10 with |ω| = 1 crosses 2P = π before t = 2.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sing.json",
        r#"{
            "mode": "Theta",
            "expressions": {"theta": "t/10", "omega_mag": "1", "omega_phase": "0"},
            "grid": {"t_max": 2.0, "steps": 101}
        }"#,
    );
    let out = rabiccati(&["custom", "--config", &cfg]);
    assert_eq!(exit_code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("phase singularity"), "stderr: {err}");
}
