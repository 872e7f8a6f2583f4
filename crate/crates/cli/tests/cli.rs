use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kerneldim"));
    cmd.env_remove("KERNELDIM_PRIME").env_remove("KERNELDIM_WORKERS");
    cmd
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn hash_of(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

#[test]
fn conjecture_even_k_small_case() {
    let out = run(&["conjecture", "--n", "3", "--k", "2", "--field", "gfp", "--trials", "20", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["matching_trials"], 20);
    assert_eq!(v["result"]["histogram"]["2"], 20);
    assert!(v["result"]["nullities"].as_array().unwrap().iter().all(|d| d == 2));
}

#[test]
fn structure_report_small_case_passes() {
    let out = run(&["structure-report", "--n", "3", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["result"]["nullity_total"], 2);
    assert_eq!(v["result"]["ic_nullities"], serde_json::json!([0, 1, 1]));
}

#[test]
fn repeated_edge_sum_is_zero() {
    let graph = fixture("repeated_edge.json");
    let out = run(&["eulerian-sum", "--graph", graph.to_str().unwrap(), "--start", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["signed_sum"], 0);
    assert_eq!(v["result"]["has_repeated_edge"], true);
}

#[test]
fn edge_list_shorthand_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, r#"{"n": 2, "edges": [[0, 1], [1, 0], [0, 0]]}"#).unwrap();
    let out = run(&["eulerian-sum", "--graph", path.to_str().unwrap(), "--start", "0", "--enumerate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    // Paths 1,2,3 and 3,1,2; the 3-cycle is even.
    assert_eq!(v["result"]["paths"].as_array().unwrap().len(), 2);
    assert_eq!(v["result"]["signed_sum"], 2);
}

#[test]
fn reports_are_versioned() {
    let v = json_of(&run(&["maximal-graph", "--n", "3", "--r", "1", "--a", "0", "--j", "1"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["version"], kerneldim::VERSION);
    assert_eq!(v["command"], "maximal-graph");
    assert_eq!(v["config"]["a"], 0);
    assert_eq!(v["result"]["ic_row"]["row"], serde_json::json!([-1, 0, 0]));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["conjecture", "--n", "3", "--k", "4", "--trials", "6", "--seed", "11"],
        &["al-check", "--n", "2", "--m", "4", "--field", "gfp", "--p", "101", "--seed", "3"],
        &["ic", "--n", "5", "--r", "2"],
        &["structure-report", "--n", "4", "--r", "2", "--seed", "5"],
        &["block", "--n", "4", "--r", "1", "--j", "2", "--out", "csv"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut hashes = Vec::new();
        for (run_no, extra) in [&[][..], &["--sequential"][..], &["--workers", "1"][..]].iter().enumerate() {
            let path = dir.path().join(format!("{i}_{run_no}.out"));
            let out = bin()
                .args(*args)
                .args(*extra)
                .args(["--output", path.to_str().unwrap()])
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0), "{args:?} {extra:?}: {}", String::from_utf8_lossy(&out.stderr));
            hashes.push(hash_of(&std::fs::read(&path).unwrap()));
        }
        assert!(hashes.windows(2).all(|w| w[0] == w[1]), "{args:?} differs across runs");
    }
}

#[test]
fn usage_errors_exit_two() {
    let bad: &[&[&str]] = &[
        &["no-such-command"],
        &["conjecture", "--n", "3"],
        &["conjecture", "--n", "3", "--k", "9"],
        &["conjecture", "--n", "3", "--k", "2", "--field", "gfp", "--p", "100"],
        &["conjecture", "--n", "3", "--k", "2", "--trials", "0"],
        &["al-check", "--n", "3", "--m", "4"],
        &["block", "--n", "3", "--r", "1", "--j", "3"],
        &["ic", "--n", "3", "--r", "3"],
        &["ic", "--n", "3", "--r", "1", "--j", "seven"],
        &["maximal-graph", "--n", "3", "--r", "1", "--a", "5", "--j", "0"],
        &["structure-report", "--n", "5", "--r", "2", "--field", "gfp", "--p", "5"],
        &["eulerian-sum", "--graph", "/nonexistent/graph.json", "--start", "0"],
    ];
    for args in bad {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?} printed no message");
    }
}

#[test]
fn corrupted_ic_exits_one_with_witness() {
    let fx = fixture("corrupted_ic.json");
    let out = run(&["structure-report", "--n", "3", "--r", "1", "--inject-ic", fx.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ic_l0_nonsingular"));
    let v = json_of(&out);
    assert_eq!(v["passed"], false);
    let checks = v["checks"].as_array().unwrap();
    let routes = checks.iter().find(|c| c["name"] == "ic_routes_agree").unwrap();
    assert_eq!(routes["passed"], false);
    let witnesses = routes["detail"]["disagreements"].as_array().unwrap();
    assert_eq!(witnesses.len(), 3);
    assert!(witnesses.iter().all(|w| w["j"] == 0));
    let l0 = checks.iter().find(|c| c["name"] == "ic_l0_nonsingular").unwrap();
    assert_eq!(l0["detail"]["nullity"], 3);
}

#[test]
fn fixture_is_not_advertised() {
    let out = run(&["structure-report", "--help"]);
    assert!(!String::from_utf8_lossy(&out.stdout).contains("inject"));
}

#[test]
fn env_overrides_default_prime_and_workers() {
    let out = bin()
        .args(["conjecture", "--n", "3", "--k", "2", "--field", "gfp", "--trials", "4"])
        .env("KERNELDIM_PRIME", "101")
        .env("KERNELDIM_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["config"]["field"]["p"], 101);

    let flag_wins = bin()
        .args(["conjecture", "--n", "3", "--k", "2", "--field", "gfp", "--p", "103", "--trials", "4"])
        .env("KERNELDIM_PRIME", "101")
        .output()
        .unwrap();
    assert_eq!(json_of(&flag_wins)["config"]["field"]["p"], 103);

    let bad_prime = bin().args(["conjecture", "--n", "3", "--k", "2", "--field", "gfp"]).env("KERNELDIM_PRIME", "91").output().unwrap();
    assert_eq!(bad_prime.status.code(), Some(2));

    let no_workers = bin().args(["conjecture", "--n", "3", "--k", "2"]).env("KERNELDIM_WORKERS", "0").output().unwrap();
    assert_eq!(no_workers.status.code(), Some(2));
}

#[test]
fn csv_output_has_header_and_rows() {
    let out = run(&["ic", "--n", "3", "--r", "1", "--j", "1", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,a,b,value");
    assert_eq!(lines.len(), 1 + 9);
    assert_eq!(lines[1], "1,0,0,-1");
}

#[test]
fn block_methods_agree() {
    let direct = json_of(&run(&["block", "--n", "4", "--r", "2", "--j", "1"]));
    let operator = json_of(&run(&["block", "--n", "4", "--r", "2", "--j", "1", "--method", "operator"]));
    assert_eq!(direct["result"], operator["result"]);
}
