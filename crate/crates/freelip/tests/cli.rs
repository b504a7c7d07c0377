//! End-to-end tests of the `freelip` binary: subcommand output and the
//! exit-code contract (0 success, 1 verification/validation failure,
//! 2 input error).

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freelip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn instance(name: &str) -> String {
    format!("{}/instances/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("freelip-test-{tag}-{}.json", std::process::id()))
}

#[test]
fn verify_passes_on_bundled_instances() {
    for name in ["trivial", "swap", "c4_square", "dihedral_hexagon"] {
        let out = run(&["verify", &instance(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("overall: pass (29 checks"), "{name}: {text}");
        assert!(!text.contains("FAIL"), "{name}: {text}");
    }
}

#[test]
fn verify_fails_with_exit_one_on_a_corrupted_metric() {
    let out = run(&["verify", &fixture("bad_triangle.json")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL     instance/valid"), "{text}");
    assert!(text.contains("skipped  free/delta_isometry"), "{text}");
    assert!(text.contains("overall: fail"), "{text}");
}

#[test]
fn verify_writes_the_json_report() {
    let report_path = temp_path("report");
    let out = run(&[
        "verify",
        &instance("swap"),
        "--json",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = std::fs::read_to_string(&report_path).expect("report written");
    std::fs::remove_file(&report_path).ok();
    assert!(report.contains("\"overall\": \"pass\""));
    assert!(report.contains("\"name\": \"proj/projection_idempotent\""));
    assert!(report.starts_with("{\n"));
    assert!(report.ends_with("}\n"));
}

#[test]
fn verify_accepts_seed_and_trials_overrides() {
    let out = run(&["verify", &instance("swap"), "--seed", "99", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("overall: pass"));
}

#[test]
fn missing_files_are_input_errors() {
    let out = run(&["verify", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn malformed_json_is_an_input_error() {
    let out = run(&["validate", &fixture("not_json.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_accepts_bundled_instances() {
    let out = run(&["validate", &instance("dihedral_hexagon")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("valid (exact mode)"), "{text}");
    assert!(text.contains("order 12"), "{text}");
    assert!(text.contains("action: isometric"), "{text}");
}

#[test]
fn validate_reports_semantic_problems_with_exit_one() {
    let out = run(&["validate", &fixture("bad_triangle.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("invalid:"));
}

#[test]
fn validate_reports_distortion_bounds_for_non_isometric_actions() {
    let out = run(&["validate", &fixture("stretch_swap.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("bi-Lipschitz"), "{text}");
    assert!(text.contains("r = 1/3"), "{text}");
    assert!(text.contains("R = 3"), "{text}");
}

#[test]
fn quotient_output_is_itself_a_valid_instance() {
    let quotient_path = temp_path("quotient");
    let out = run(&[
        "quotient",
        &instance("dihedral_hexagon"),
        "--out",
        quotient_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&quotient_path).expect("quotient written");
    assert!(text.contains("\"{h0,h1,h2,h3,h4,h5}\""), "{text}");
    let revalidate = run(&["validate", quotient_path.to_str().unwrap()]);
    std::fs::remove_file(&quotient_path).ok();
    assert_eq!(revalidate.status.code(), Some(0), "{}", stdout(&revalidate));
}

#[test]
fn quotient_averages_non_isometric_actions_first() {
    let out = run(&["quotient", &fixture("stretch_swap.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    // Averaged distances: D(0,a) = D(0,b) = (1+3)/2 = 2.
    assert!(text.contains("\"{a,b}\""), "{text}");
    assert!(text.contains("\"2/1\""), "{text}");
}

#[test]
fn norm_prints_the_value_and_an_optimal_plan() {
    let out = run(&["norm", &instance("swap"), "--vector", "a:1,b:-2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("norm: 3"), "{text}");
    assert!(text.contains("plan:"), "{text}");
    assert!(text.contains("a -> b"), "{text}");
}

#[test]
fn norm_accepts_fractional_coefficients() {
    let out = run(&["norm", &instance("swap"), "--vector", "a:1/2,b:0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // ||(1/2)da + (1/4)db|| = 1/2 + 1/4 (both ship from the base at cost 1).
    assert!(stdout(&out).contains("norm: 3/4"), "{}", stdout(&out));
}

#[test]
fn unknown_labels_are_input_errors() {
    let out = run(&["norm", &instance("swap"), "--vector", "z:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown point label"), "{}", stderr(&out));
}

#[test]
fn malformed_assignments_are_input_errors() {
    let out = run(&["norm", &instance("swap"), "--vector", "a=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lipnorm_prints_the_constant_and_an_attaining_pair() {
    let out = run(&["lipnorm", &instance("swap"), "--function", "a:1,b:0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lipnorm: 1"), "{text}");
    assert!(text.contains("attained on: 0 -> a"), "{text}");
}

#[test]
fn lipnorm_rejects_nonzero_base_values() {
    let out = run(&["lipnorm", &instance("swap"), "--function", "0:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("base"), "{}", stderr(&out));
}

#[test]
fn project_averages_vectors_over_the_group() {
    let out = run(&["project", &instance("swap"), "--vector", "a:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("projected: a:1/2,b:1/2"), "{}", stdout(&out));
}

#[test]
fn project_averages_functions_over_the_group() {
    let out = run(&["project", &instance("swap"), "--function", "a:1,b:0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("a: 1/2"), "{text}");
    assert!(text.contains("b: 1/2"), "{text}");
}

#[test]
fn project_requires_an_isometric_action() {
    let out = run(&["project", &fixture("stretch_swap.json"), "--vector", "a:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("quotient"), "{}", stderr(&out));
}

#[test]
fn project_requires_a_vector_or_a_function() {
    let out = run(&["project", &instance("swap")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_reports_reproduce_the_goldens_byte_for_byte() {
    for name in ["trivial", "swap", "c4_square", "dihedral_hexagon"] {
        let report_path = temp_path(&format!("golden-{name}"));
        let out = run(&[
            "verify",
            &instance(name),
            "--json",
            report_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let mut produced = std::fs::read_to_string(&report_path).expect("report written");
        std::fs::remove_file(&report_path).ok();
        // The timing field is the only nondeterministic byte.
        let from = produced.find("\"ms\":").expect("ms field present");
        produced.replace_range(from.., "\"ms\": 0\n}\n");
        let golden = std::fs::read_to_string(format!(
            "{}/tests/golden/{name}.json",
            env!("CARGO_MANIFEST_DIR")
        ))
        .expect("golden present");
        assert_eq!(produced, golden, "{name} drifted");
    }
}
