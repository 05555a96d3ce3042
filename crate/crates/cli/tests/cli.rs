use std::path::PathBuf;

use dpsod_cli::{run, Output, INPUT_ERROR, OK, VERIFICATION_FAILED};

fn dpsod(args: &[&str]) -> Output {
    run(std::iter::once("dpsod").chain(args.iter().copied()))
}

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_string_lossy().into_owned()
}

#[test]
fn gate_reports_existence_at_degree_five() {
    let out = dpsod(&["gate", "d=5", "nodes=2"]);
    assert_eq!(out.code, OK, "{}", out.stderr);
    assert!(out.stdout.contains("Kawamata decomposition exists"));
    let out = dpsod(&["gate", "d=4", "nodes=1"]);
    assert!(out.stdout.contains("no Kawamata decomposition"));
}

#[test]
fn gate_rejects_smooth_degrees_and_excess_nodes() {
    assert_eq!(dpsod(&["gate", "d=7", "nodes=1"]).code, INPUT_ERROR);
    assert_eq!(dpsod(&["gate", "d=5", "nodes=9"]).code, INPUT_ERROR);
    assert_eq!(dpsod(&["gate", "five", "nodes=1"]).code, INPUT_ERROR);
}

#[test]
fn bundled_replay_prints_both_bases() {
    let out = dpsod(&["replay", "prop-Y-to-W-4.sod"]);
    assert_eq!(out.code, OK, "{}", out.stderr);
    assert!(out
        .stdout
        .contains("final in {h,D}: <CAT(Db(C)), O(-h), O(D-2h), O, O(h)>"));
    assert!(out.stdout.contains("OrthogonalSwap"));
    let quiet = dpsod(&["--quiet", "replay", "prop-Y-to-W-4.sod"]);
    assert!(quiet.stdout.lines().count() <= 3);
}

#[test]
fn replay_json_carries_the_audit_log() {
    let out = dpsod(&["--json", "replay", "prop-Y-to-V.sod"]);
    assert_eq!(out.code, OK);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["final"], "<CAT(A_V), O(E-H), O(-E), O, O(H-E)>");
    assert_eq!(v["audit"]["entries"].as_array().unwrap().len(), 9);
}

#[test]
fn replay_from_disk_resolves_imports_next_to_the_script() {
    let dir = tempfile::tempdir().unwrap();
    let v = dpsod_core_script("prop-Y-to-V.sod");
    let w = dpsod_core_script("prop-Y-to-W-4.sod");
    std::fs::write(dir.path().join("prop-Y-to-V.sod"), v).unwrap();
    let path = dir.path().join("mine.sod");
    std::fs::write(&path, w).unwrap();
    let out = dpsod(&["replay", path.to_str().unwrap()]);
    assert_eq!(out.code, OK, "{}", out.stderr);
}

fn dpsod_core_script(name: &str) -> &'static str {
    dpsod::shipped::script_text(name).unwrap()
}

#[test]
fn syntax_errors_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sod");
    std::fs::write(&path, "ambient Y d=5\naxiom <O, O(H)>\nswap att 3\n").unwrap();
    let out = dpsod(&["replay", path.to_str().unwrap()]);
    assert_eq!(out.code, INPUT_ERROR);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);
}

#[test]
fn corrupted_scripts_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let text = dpsod_core_script("prop-Y-to-V.sod").replace(
        "expect <CAT(A_V), O(E-H), O(-E), O, O(H-E)>",
        "expect <CAT(A_V), O(-E), O(E-H), O, O(H-E)>",
    );
    let path = dir.path().join("wrong.sod");
    std::fs::write(&path, text).unwrap();
    let out = dpsod(&["replay", path.to_str().unwrap()]);
    assert_eq!(out.code, VERIFICATION_FAILED, "{}", out.stderr);
}

#[test]
fn intersection_numbers() {
    assert_eq!(dpsod(&["intersect", "d=4", "(H-E)^3"]).stdout, "1\n");
    assert_eq!(dpsod(&["intersect", "d=5", "(H-E)^3"]).stdout, "2\n");
    assert_eq!(dpsod(&["intersect", "d=4", "h*h*h"]).stdout, "1\n");
    assert_eq!(dpsod(&["intersect", "d=4", "H^2"]).code, INPUT_ERROR);
}

#[test]
fn compare_extracts_the_equivalence() {
    let out = dpsod(&["--quiet", "compare", "prop-Y-to-V.sod", "prop-Y-to-W-5.sod"]);
    assert_eq!(out.code, OK, "{}", out.stderr);
    assert!(out.stdout.contains("A_{V5} ≅ ⟨A_C, A_Q⟩"));
}

#[test]
fn quivers_builtin_and_from_file() {
    let out = dpsod(&["quiver", "single-burban"]);
    assert!(out.stdout.contains("dimension: 4"), "{}", out.stdout);
    let out = dpsod(&["quiver", &data("truncated-loop.quiver")]);
    assert_eq!(out.code, OK, "{}", out.stderr);
    assert!(out.stdout.contains("dimension: 3"), "{}", out.stdout);
    assert_eq!(dpsod(&["quiver", "no-such-quiver"]).code, INPUT_ERROR);
}

#[test]
fn defect_of_a_two_nodal_cubic() {
    let out = dpsod(&["--json", "defect", &data("cubic-2-nodes.hyp")]);
    assert_eq!(out.code, OK, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["mu"], 2);
    assert_eq!(v["delta"], 0);
}

#[test]
fn catalog_and_degenerations() {
    let out = dpsod(&["catalog"]);
    assert!(out.stdout.contains("V5"));
    assert_eq!(dpsod(&["catalog", "9"]).code, INPUT_ERROR);
    let out = dpsod(&["degenerations", "d=5", "nodes=3"]);
    assert!(out.stdout.contains("on C: 2, on Q: 1"));
}

#[test]
fn unknown_subcommand_is_an_input_error() {
    assert_eq!(dpsod(&["frobnicate"]).code, INPUT_ERROR);
    assert_eq!(dpsod(&["--help"]).code, OK);
}
