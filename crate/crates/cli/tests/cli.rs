//! End-to-end tests of the `predset` binary: report contents, schema
//! conformance, exit codes, and byte-level determinism.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_predset"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn poll_file(json: &str) -> NamedTempFile {
    let mut file = NamedTempFile::new().expect("temp file");
    file.write_all(json.as_bytes()).expect("write poll");
    file
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn assert_matches_schema(instance: &Value, schema_file: &str) {
    let schema_text = std::fs::read_to_string(schema_dir().join(schema_file)).expect("schema file");
    let schema: Value = serde_json::from_str(&schema_text).expect("schema parses");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{e}"))
        .collect();
    assert!(
        errors.is_empty(),
        "schema {schema_file} violations: {errors:?}"
    );
}

fn round3(x: f64) -> f64 {
    (x * 1e3).round_ties_even() / 1e3
}

const NONRESPONSE_POLL: &str = r#"{"n": 1000, "counts": {"C": 475, "T": 425}, "nonresponse": 100}"#;
const CLOSE_POLL: &str = r#"{"n": 1000, "counts": {"C": 530, "T": 470}, "nonresponse": 0}"#;

#[test]
fn predict_reports_too_close_to_call() {
    let poll = poll_file(CLOSE_POLL);
    let stdout = run_ok(&["predict", "--poll", poll.path().to_str().unwrap()]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "predict_report.schema.json");

    assert_eq!(report["theta_hat"], serde_json::json!(0.47));
    assert_eq!(
        round3(report["probabilities"]["T"].as_f64().unwrap()),
        0.426
    );
    assert_eq!(
        round3(report["probabilities"]["C"].as_f64().unwrap()),
        0.574
    );
    assert_eq!(report["prediction_set"], serde_json::json!(["C", "T"]));
    assert_eq!(report["too_close_to_call"], serde_json::json!(true));
    assert_eq!(report["empty_set"], serde_json::json!(false));
}

#[test]
fn predict_collapses_on_a_landslide() {
    let poll = poll_file(r#"{"n": 1000, "counts": {"C": 1000, "T": 0}, "nonresponse": 0}"#);
    let stdout = run_ok(&["predict", "--poll", poll.path().to_str().unwrap()]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    // At theta = 0, pi(T) = 1 / (1 + e^5) ~ 0.0067 < 0.05.
    assert_eq!(report["prediction_set"], serde_json::json!(["C"]));
    assert_eq!(report["too_close_to_call"], serde_json::json!(false));
}

#[test]
fn predict_flags_an_empty_set() {
    // At alpha = 0.6 both 0.574 and 0.426 fall at or below the level.
    let poll = poll_file(CLOSE_POLL);
    let stdout = run_ok(&[
        "predict",
        "--poll",
        poll.path().to_str().unwrap(),
        "--alpha",
        "0.6",
    ]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "predict_report.schema.json");
    assert_eq!(report["prediction_set"], serde_json::json!([]));
    assert_eq!(report["empty_set"], serde_json::json!(true));
}

#[test]
fn predict_exit_codes() {
    let poll = poll_file(CLOSE_POLL);
    let path = poll.path().to_str().unwrap();
    assert_eq!(exit_code(&["predict", "--poll", path, "--alpha", "1.5"]), 3);
    assert_eq!(exit_code(&["predict", "--poll", path, "--alpha", "0"]), 3);
    assert_eq!(exit_code(&["predict", "--poll", path, "--lambda", "-3"]), 3);
    assert_eq!(
        exit_code(&["predict", "--poll", "/nonexistent/poll.json"]),
        2
    );

    let broken = poll_file(r#"{"n": 10, "counts": {"C": 9}, "nonresponse": 2}"#);
    assert_eq!(
        exit_code(&["predict", "--poll", broken.path().to_str().unwrap()]),
        2
    );
    let garbage = poll_file("not json at all");
    assert_eq!(
        exit_code(&["predict", "--poll", garbage.path().to_str().unwrap()]),
        2
    );
}

#[test]
fn plaus_reports_the_nonresponse_spread() {
    let poll = poll_file(NONRESPONSE_POLL);
    let stdout = run_ok(&["plaus", "--poll", poll.path().to_str().unwrap()]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "plaus_report.schema.json");

    assert_eq!(report["theta_lo"], serde_json::json!(0.425));
    assert_eq!(report["theta_hi"], serde_json::json!(0.525));
    let t = &report["assignment"]["T"];
    let c = &report["assignment"]["C"];
    assert_eq!(t["upper"], serde_json::json!(0.562177));
    assert_eq!(t["lower"], serde_json::json!(0.320821));
    assert_eq!(c["upper"], serde_json::json!(0.679179));
    assert_eq!(c["lower"], serde_json::json!(0.437823));
    assert_eq!(t["dont_know"], serde_json::json!(0.241355));
    assert_eq!(report["prediction_set"], serde_json::json!(["C", "T"]));
    assert_eq!(report["naive_mar"]["theta_hat"], serde_json::json!(0.472));
    assert_eq!(
        round3(report["naive_mar"]["probabilities"]["T"].as_f64().unwrap()),
        0.430
    );
    assert_eq!(
        round3(report["naive_mar"]["probabilities"]["C"].as_f64().unwrap()),
        0.570
    );
}

#[test]
fn plaus_output_is_grid_size_invariant() {
    let poll = poll_file(NONRESPONSE_POLL);
    let path = poll.path().to_str().unwrap();
    let coarse = run_ok(&["plaus", "--poll", path, "--grid-size", "2"]);
    let fine = run_ok(&["plaus", "--poll", path, "--grid-size", "101"]);
    assert_eq!(coarse, fine);
}

#[test]
fn plaus_without_nonresponse_has_no_dont_know() {
    let poll = poll_file(CLOSE_POLL);
    let stdout = run_ok(&["plaus", "--poll", poll.path().to_str().unwrap()]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    for label in ["C", "T"] {
        assert_eq!(
            report["assignment"][label]["dont_know"],
            serde_json::json!(0.0)
        );
    }
}

#[test]
fn plaus_rejects_non_binary_polls() {
    let poll = poll_file(r#"{"n": 10, "counts": {"X": 4, "Y": 6}, "nonresponse": 0}"#);
    assert_eq!(
        exit_code(&["plaus", "--poll", poll.path().to_str().unwrap()]),
        3
    );
}

#[test]
fn logistic_curve_hits_known_points() {
    let stdout = run_ok(&["curve", "logistic"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[500], "0.5\t0.5");
    let (theta, pi_t) = lines[470].split_once('\t').unwrap();
    assert_eq!(theta, "0.47");
    assert_eq!(round3(pi_t.parse().unwrap()), 0.426);
}

#[test]
fn miscoverage_curve_matches_the_library() {
    let stdout = run_ok(&["curve", "miscoverage", "--n", "4", "--lambda", "10"]);
    let params = predset::LogisticRuleParams::new(10.0, 4).unwrap();
    let model = predset::binomial_flat_joint(&params).unwrap();
    let expected = predset::miscoverage_cdf(&model).unwrap().to_tsv();
    assert_eq!(stdout, expected);
}

#[test]
fn validity_report_holds_below_threshold() {
    let stdout = run_ok(&["validity", "--n", "50", "--lambda", "10"]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "validity_report.schema.json");
    assert_eq!(report["model"], serde_json::json!("logistic"));
    assert_eq!(report["threshold_a"], serde_json::json!(0.5));
    assert_eq!(report["all_hold_below_threshold"], serde_json::json!(true));
    assert_eq!(report["alpha_grid"].as_array().unwrap().len(), 512);
}

#[test]
fn validity_smallest_poll_is_well_formed() {
    let stdout = run_ok(&["validity", "--n", "1"]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "validity_report.schema.json");
}

#[test]
fn validity_uninformative_fails_above_half() {
    let stdout = run_ok(&[
        "validity",
        "--n",
        "20",
        "--uninformative",
        "--grid",
        "0.25:0.75:3",
    ]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_matches_schema(&report, "validity_report.schema.json");
    assert_eq!(report["model"], serde_json::json!("uninformative"));
    assert!(report.get("lambda").is_none());
    let holds: Vec<bool> = report["holds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_bool().unwrap())
        .collect();
    // G jumps to 1 at 1/2: holds below, fails at 0.5 and 0.75.
    assert_eq!(holds, vec![true, false, false]);
    assert_eq!(report["all_hold_below_threshold"], serde_json::json!(true));
}

#[test]
fn validity_monte_carlo_section_is_reproducible() {
    let args = [
        "validity",
        "--n",
        "100",
        "--grid",
        "0.01:0.49:16",
        "--mc-trials",
        "5000",
        "--seed",
        "11",
        "--alpha",
        "0.05",
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first, second);

    let report: Value = serde_json::from_str(&first).unwrap();
    assert_matches_schema(&report, "validity_report.schema.json");
    let mc = &report["monte_carlo"];
    assert_eq!(mc["trials"], serde_json::json!(5000));
    let estimate = mc["estimate"].as_f64().unwrap();
    let exact = mc["exact"].as_f64().unwrap();
    let se = mc["std_error"].as_f64().unwrap();
    assert!((estimate - exact).abs() <= 4.0 * se.max(1e-4));
}

#[test]
fn validity_rejects_bad_grids_and_oversized_models() {
    assert_eq!(exit_code(&["validity", "--grid", "0.5"]), 3);
    assert_eq!(exit_code(&["validity", "--grid", "0.2:0.1:4"]), 3);
    assert_eq!(exit_code(&["validity", "--grid", "0:0.5:4"]), 3);
    assert_eq!(exit_code(&["validity", "--n", "99999999"]), 4);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let poll = poll_file(NONRESPONSE_POLL);
    let path = poll.path().to_str().unwrap();
    let stdout = run_ok(&["plaus", "--poll", path]);

    let out = NamedTempFile::new().unwrap();
    let out_path = out.path().to_str().unwrap();
    run_ok(&["plaus", "--poll", path, "--out", out_path]);
    let written = std::fs::read_to_string(out.path()).unwrap();
    assert_eq!(stdout, written);
}

#[test]
fn poll_schema_accepts_and_rejects() {
    let good: Value = serde_json::from_str(NONRESPONSE_POLL).unwrap();
    assert_matches_schema(&good, "poll.schema.json");

    let schema_text = std::fs::read_to_string(schema_dir().join("poll.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&schema_text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for bad in [
        r#"{"counts": {"C": 1}, "nonresponse": 0}"#,
        r#"{"n": 1, "counts": {}, "nonresponse": 0}"#,
        r#"{"n": 1, "counts": {"C": 1}, "nonresponse": -1}"#,
        r#"{"n": 1, "counts": {"C": 0.5}, "nonresponse": 0}"#,
    ] {
        let instance: Value = serde_json::from_str(bad).unwrap();
        assert!(!validator.is_valid(&instance), "should reject {bad}");
    }
}
