//! Golden-report tests: the verification suite on the bundled instances
//! must reproduce the committed reports byte-for-byte once the timing
//! field is normalized. Any intentional change to checks, witnesses, or
//! report formatting requires regenerating the goldens.

use std::fs;
use std::path::{Path, PathBuf};

use freelip::instance::parse_for_verify;
use freelip::verify::run_target;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn normalized_report(instance_path: &Path) -> String {
    let target = parse_for_verify(instance_path).expect("bundled instances parse");
    let mut report = run_target(&target);
    report.ms = 0;
    report.to_json()
}

fn check_golden(name: &str) {
    let produced =
        normalized_report(&crate_dir().join("instances").join(format!("{name}.json")));
    let golden_path = crate_dir().join("tests/golden").join(format!("{name}.json"));
    let committed = fs::read_to_string(&golden_path)
        .unwrap_or_else(|e| panic!("missing golden {}: {e}", golden_path.display()));
    assert!(
        produced.contains("\"overall\": \"pass\""),
        "bundled instance {name} no longer passes:\n{produced}"
    );
    assert_eq!(
        produced, committed,
        "report for {name} drifted from the committed golden"
    );
}

#[test]
fn trivial_group_report_matches_golden() {
    check_golden("trivial");
}

#[test]
fn swap_report_matches_golden() {
    check_golden("swap");
}

#[test]
fn c4_square_report_matches_golden() {
    check_golden("c4_square");
}

#[test]
fn dihedral_hexagon_report_matches_golden() {
    check_golden("dihedral_hexagon");
}
