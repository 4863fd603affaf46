use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    })
}

fn qsslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsslab")).args(args).output().unwrap()
}

/// Runs the binary, checks the exit code, and validates the report.
fn report(args: &[&str], code: i32) -> Value {
    let out = qsslab(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {stderr}");
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let errors: Vec<String> = validator().iter_errors(&r).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?}: schema errors {errors:?}");
    r
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn ladder_sweep_passes() {
    let r = report(&["verify-ladder", "--m-range", "2..64", "--dense-max", "6"], 0);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["details"]["checks"].as_array().unwrap().len(), 63 * 4);
    assert!(check(&r, "dense_max_deviation")["value"].as_f64().unwrap() <= 1e-12);
    assert!(r["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("Z⊗I^{m-1}")));
}

#[test]
fn ladder_range_containing_one_is_a_usage_error() {
    let r = report(&["verify-ladder", "--m-range", "1..5"], 2);
    assert_eq!(r["error"]["kind"], "usage");
}

#[test]
fn worked_sequence_round_trips_in_sampled_mode() {
    let six = data("six_gates.txt");
    let secret = data("zero_one_plus.json");
    let args = [
        "run", "--n", "2", "--kprime", "2", "--script", &six, "--secret", &secret,
        "--mode", "sampled", "--seed", "3",
    ];
    let r = report(&args, 0);
    assert!(check(&r, "max_round_trip_distance")["value"].as_f64().unwrap() <= 1e-9);
    let branch = &r["details"]["branches"][0];
    assert_eq!(branch["consumed_ancillas"].as_array().unwrap().len(), 2);
    let dist: Vec<f64> = branch["z_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let want = [0.0, 0.0, 0.25, 0.25, 0.25, 0.0, 0.25, 0.0];
    assert!(dist.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9), "{dist:?}");
}

#[test]
fn exact_mode_over_the_branch_cap_is_a_resource_error() {
    let six = data("six_gates.txt");
    let r = report(&["run", "--n", "2", "--kprime", "2", "--script", &six], 3);
    assert_eq!(r["error"]["kind"], "resource");
}

#[test]
fn empty_script_round_trips() {
    let r = report(&["run", "--n", "3", "--s", "2", "--seed", "8"], 0);
    assert!(check(&r, "max_round_trip_distance")["value"].as_f64().unwrap() <= 1e-10);
    assert!(r["details"]["branches"][0]["transcript"].as_array().unwrap().is_empty());
}

#[test]
fn toffoli_budget_exhaustion_fails() {
    let three = data("three_toffolis.txt");
    let r = report(
        &["run", "--n", "2", "--s", "3", "--t", "3", "--script", &three, "--mode", "sampled", "--seed", "1"],
        1,
    );
    assert_eq!(r["error"]["kind"], "protocol");
}

#[test]
fn sampled_mode_without_seed_is_rejected() {
    report(&["run", "--mode", "sampled"], 2);
    report(&["gadget", "--tolerance", "-1"], 2);
}

#[test]
fn default_audits_pass() {
    for n in ["4", "5"] {
        let r = report(&["audit", "--n", n], 0);
        let audits = r["details"]["audits"].as_array().unwrap();
        assert_eq!(audits.len(), n.parse::<usize>().unwrap());
        assert!(audits.iter().all(|a| a["tagged_residuals"] == 0));
    }
}

#[test]
fn full_coalition_is_rejected_with_notice() {
    let r = report(&["audit", "--n", "3", "--coalition", "alice,1,2,3"], 2);
    assert!(!r["notes"].as_array().unwrap().is_empty());
}

#[test]
fn gadget_report() {
    let r = report(&["gadget", "--samples", "20", "--seed", "4"], 0);
    let row = &r["details"]["basis_table"][6];
    assert_eq!((row["input"].as_str(), row["expected"].as_str()), (Some("|110>"), Some("|111>")));
    assert_eq!(row["min_fidelity"].as_f64(), Some(1.0));
    let reuse = check(&r, "ancilla_reuse_accepted");
    assert_eq!(reuse["value"].as_f64(), Some(0.0));
    assert!(reuse["detail"].as_str().unwrap().contains("budget"));
}

#[test]
fn reports_are_deterministic_and_out_matches_stdout() {
    let args = ["verify-ladder", "--m-range", "2..10", "--dense-max", "4"];
    let a = qsslab(&args).stdout;
    assert_eq!(a, qsslab(&args).stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let path = path.to_str().unwrap();
    let out: Vec<&str> = args.iter().copied().chain(["--out", path]).collect();
    assert_eq!(qsslab(&out).status.code(), Some(0));
    let mut from_file: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut from_stdout: Value = serde_json::from_slice(&a).unwrap();
    from_file["config"]["out"] = Value::Null;
    from_stdout["config"]["out"] = Value::Null;
    assert_eq!(from_file, from_stdout);
}

#[test]
fn config_files_match_flags() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("c.conf");
    std::fs::write(&kv, "# sweep\nm-range = 2..10\ndense_max = 4\n").unwrap();
    let js = dir.path().join("c.json");
    std::fs::write(&js, r#"{"m-range": "2..10", "dense_max": 4}"#).unwrap();
    let flags = qsslab(&["verify-ladder", "--m-range", "2..10", "--dense-max", "4"]).stdout;
    for file in [kv, js] {
        let via_file = qsslab(&["verify-ladder", "--config", file.to_str().unwrap()]).stdout;
        assert_eq!(via_file, flags);
    }
    // Flags override file values.
    let kv = dir.path().join("c.conf");
    let r: Value = serde_json::from_slice(
        &qsslab(&["verify-ladder", "--config", kv.to_str().unwrap(), "--m-range", "3..5"]).stdout,
    )
    .unwrap();
    assert_eq!(r["config"]["m_range"], "3..5");
}
