//! End-to-end checks of the command line front end: exit codes, deterministic
//! artifacts, and report schema conformance.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orbitpde"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn catenoid_cfg(out: &Path, override_gate: bool, max_iter: usize) -> String {
    format!(
        r#"
[flux]
builtin = "minimal_surface"

[geometry]
kind = "rotational"
r_in = 1.5
r_out = 3.0

[boundary]
psi = "arccosh(r)"

[solver]
scheme = "newton"
grid = [64]
max_iterations = {max_iter}
override_gate = {override_gate}

[output]
dir = "{}"
prefix = "cat"
"#,
        out.display()
    )
}

#[test]
fn solve_success_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(tmp.path(), "cat.toml", &catenoid_cfg(&out, true, 80));
    let status = bin().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let field1 = std::fs::read(out.join("cat_field.csv")).unwrap();
    let report1 = std::fs::read(out.join("cat_report.json")).unwrap();
    let status = bin().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(field1, std::fs::read(out.join("cat_field.csv")).unwrap());
    assert_eq!(report1, std::fs::read(out.join("cat_report.json")).unwrap());
    // the report validates against the shipped schema
    let schema: serde_json::Value = serde_json::from_str(orbitpde::report::REPORT_SCHEMA).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&report1).unwrap();
    orbitpde::report::validate_against_schema(&value, &schema).unwrap();
}

#[test]
fn bad_exponent_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        r#"
[flux]
builtin = "p_laplace"
p = 0.5

[geometry]
kind = "rotational"
r_out = 1.0
"#,
    );
    let status = bin().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gate_failure_exits_3_and_override_flag_clears_it() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(tmp.path(), "cat.toml", &catenoid_cfg(&out, false, 80));
    let status = bin().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(3), "annulus fails the strong-decay geometry check");
    let status = bin()
        .args(["solve", "--override-gate", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn non_convergence_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(tmp.path(), "cat.toml", &catenoid_cfg(&out, true, 1));
    let status = bin().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn barrier_not_found_exits_6() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // the annulus inner rim is concave toward the domain: the strong-decay
    // construction must refuse
    let cfg = write(tmp.path(), "cat.toml", &catenoid_cfg(&out, true, 80));
    let status = bin().args(["barrier", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(6));
}

#[test]
fn classify_reports_taxonomy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(
        tmp.path(),
        "p3.toml",
        &format!(
            r#"
[flux]
builtin = "p_laplace"
p = 3.0

[geometry]
kind = "rotational"
r_out = 1.0

[output]
dir = "{}"
prefix = "p3"
"#,
            out.display()
        ),
    );
    let output = bin().args(["classify", "--json", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("regular (p = 2): false"), "{text}");
    assert!(text.contains("condition I (mild decay): I:"), "{text}");
    assert!(text.contains("condition III: III:"), "{text}");
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("p3_classify.json")).unwrap())
            .unwrap();
    let schema: serde_json::Value = serde_json::from_str(orbitpde::report::REPORT_SCHEMA).unwrap();
    orbitpde::report::validate_against_schema(&value, &schema).unwrap();
}

#[test]
fn tabulated_profile_with_bad_slope_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "tab.toml",
        r#"
[flux]
table = [[0.1, 0.1], [0.2, 0.3], [0.3, 0.2], [0.4, 0.4]]

[geometry]
kind = "rotational"
r_out = 1.0
"#,
    );
    let status = bin().args(["classify", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn convexity_verdicts_match_direct_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(
        tmp.path(),
        "conv.toml",
        &format!(
            r#"
[flux]
builtin = "minimal_surface"

[geometry]
kind = "helicoidal"
lambda = 2.0
domain = {{ shape = "disk", radius = 1.0 }}

[convexity]
shape = "ellipse"
a = 2.0
b = 1.0
samples = 96

[output]
dir = "{}"
prefix = "conv"
"#,
            out.display()
        ),
    );
    let status = bin().args(["convexity", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    // re-evaluate the inequality from the emitted samples, exactly
    let csv = std::fs::read_to_string(out.join("conv_convexity.csv")).unwrap();
    let mut saw_violation = false;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let value: f64 = cols[4].parse().unwrap();
        let holds: bool = cols[5].parse().unwrap();
        assert_eq!(holds, value >= 0.0, "verdict must match the stored value");
        saw_violation |= !holds;
    }
    assert!(saw_violation, "the eccentric ellipse at λ=2 must report violations");
}

#[test]
fn verify_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(tmp.path(), "cat.toml", &catenoid_cfg(&out, true, 80));
    assert_eq!(bin().args(["solve", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--field")
        .arg(out.join("cat_field.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn parallel_batch_solves() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("out1");
    let out2 = tmp.path().join("out2");
    let cfg1 = write(tmp.path(), "a.toml", &catenoid_cfg(&out1, true, 80));
    let cfg2 = write(tmp.path(), "b.toml", &catenoid_cfg(&out2, true, 80));
    let status = bin()
        .args(["solve", "--jobs", "2", "--config"])
        .arg(&cfg1)
        .arg(&cfg2)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out1.join("cat_report.json").exists());
    assert!(out2.join("cat_report.json").exists());
}
