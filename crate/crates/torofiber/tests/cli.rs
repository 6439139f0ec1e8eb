//! End-to-end tests of the shipped fixtures and the command-line binary.

use std::path::PathBuf;
use std::process::Command;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture file present")
}

#[test]
fn fixture_files_match_the_library() {
    use torofiber::fiber_space::fixtures as fx;
    let pairs: Vec<(&str, torofiber::fiber_space::ToricFiberSpace)> = vec![
        ("a1", fx::a1()),
        ("nonred", fx::nonred()),
        ("mixed23", fx::mixed23()),
        ("quad", fx::quad()),
        ("chain2", fx::chain2()),
        ("chain2xchain2", fx::chain2_x_chain2()),
        ("chain2xp1", fx::chain2_x_p1()),
    ];
    for (name, expected) in pairs {
        let doc = torofiber::cli::parse(&read_fixture(name))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let fs = doc.fiber_space().unwrap();
        assert_eq!(fs.source(), expected.source(), "{name} source fan");
        assert_eq!(fs.target(), expected.target(), "{name} target fan");
        assert_eq!(fs.map(), expected.map(), "{name} lattice map");
    }
    // chart-mode fixtures parse into the expected charts
    let doc = torofiber::cli::parse(&read_fixture("nonred_chart")).unwrap();
    assert_eq!(doc.chart.unwrap().exponents, vec![num_bigint::BigInt::from(2)]);
    let doc = torofiber::cli::parse(&read_fixture("mixed23_chart")).unwrap();
    let chart = doc.chart.unwrap();
    assert_eq!(chart.blocks, vec![2]);
    assert_eq!(
        chart.exponents,
        vec![num_bigint::BigInt::from(2), num_bigint::BigInt::from(3)]
    );
}

fn run_binary(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_torofiber"))
        .args(args)
        .output()
        .expect("binary runs");
    (String::from_utf8_lossy(&out.stdout).into_owned(), out.status.code().unwrap_or(-1))
}

#[test]
fn binary_validate_chain2() {
    let path = fixture_path("chain2");
    let (out, code) = run_binary(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("torofiber "));
    assert!(out.contains("\"reduced\":true"));
    assert!(out.contains("\"proper\":true"));
}

#[test]
fn binary_reduce_nonred_roundtrip() {
    let path = fixture_path("nonred");
    let (out, code) = run_binary(&["reduce", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"degrees\":[\"2\"]"));
    assert!(out.contains("\"reduced_check\":true"));
}

#[test]
fn binary_weights_chain2_with_tau_flag() {
    let path = fixture_path("chain2");
    let (out, code) =
        run_binary(&["weights", path.to_str().unwrap(), "--tau", "1", "--json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"degeneration\":\"PASS\""));
    assert!(out.contains("\"totals\":[1,0,1]"));
}

#[test]
fn binary_fiber_dot_output() {
    let path = fixture_path("chain2");
    let (out, code) = run_binary(&["fiber", path.to_str().unwrap(), "--dot"]);
    assert_eq!(code, 0);
    assert!(out.contains("graph dual_complex"));
}

#[test]
fn binary_report_is_byte_identical() {
    let path = fixture_path("chain2");
    let (a, code_a) = run_binary(&["report", path.to_str().unwrap(), "--json"]);
    let (b, code_b) = run_binary(&["report", path.to_str().unwrap(), "--json"]);
    assert_eq!(code_a, 0);
    assert_eq!(code_a, code_b);
    assert_eq!(a, b);
}

#[test]
fn binary_rejects_bad_input() {
    let dir = std::env::temp_dir().join("torofiber_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (out, code) = run_binary(&["validate", bad.to_str().unwrap(), "--json"]);
    assert_eq!(code, 2);
    assert!(out.contains("error"));
    let (_, code) = run_binary(&["validate", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn binary_logcheck_with_overrides() {
    let path = fixture_path("chain2");
    let (out, code) =
        run_binary(&["logcheck", path.to_str().unwrap(), "-K", "3", "-S", "5", "--json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"pass\":true"));
}

#[test]
fn binary_weights_on_affine_input_fails_cleanly() {
    let path = fixture_path("quad");
    let (out, code) = run_binary(&["weights", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, 1);
    assert!(out.contains("NotProper"));
}
