//! End-to-end tests that spawn the real binary and check the JSON
//! document, the exit code, and the standard error channel.

use refex::cli::expression_from_json;
use refex::store::TripleStore;
use std::process::Command;

const GEO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/geo.nt");
const GUYANA: &str = "http://ex.org/Guyana";
const SURINAME: &str = "http://ex.org/Suriname";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn refex(args: &[&str]) -> Run {
    let output = Command::new(env!("CARGO_BIN_EXE_refex"))
        .args(args)
        .output()
        .expect("failed to spawn the refex binary");
    Run {
        code: output.status.code().expect("binary was killed by a signal"),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
    }
}

fn geo_pair(extra: &[&str]) -> Vec<String> {
    let mut args = vec![
        "--kb".to_string(),
        GEO.to_string(),
        "--targets".to_string(),
        format!("{GUYANA},{SURINAME}"),
        "--inverse-top".to_string(),
        "0".to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

fn run_geo_pair(extra: &[&str]) -> Run {
    let args = geo_pair(extra);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    refex(&refs)
}

fn parse(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).expect("stdout is not a single JSON document")
}

#[test]
fn describe_finds_the_two_component_conjunction() {
    let run = run_geo_pair(&[]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "found");
    assert_eq!(doc["targets"].as_array().unwrap().len(), 2);
    let expected = 3.0 + 3f64.log2();
    let bits = doc["complexity_bits"].as_f64().unwrap();
    assert!((bits - expected).abs() < 1e-9, "got {bits}, expected {expected}");
    assert_eq!(doc["expression"].as_array().unwrap().len(), 2);
    assert!(doc["expression_text"].as_str().unwrap().contains("  AND  "));
    assert_eq!(doc["config"]["language"], "extended");
    assert_eq!(doc["stats"]["queue_size"], 2);
}

#[test]
fn emitted_expression_reevaluates_to_the_targets() {
    let run = run_geo_pair(&[]);
    assert_eq!(run.code, 0);
    let doc = parse(&run.stdout);
    let store = TripleStore::parse_ntriples(&std::fs::read_to_string(GEO).unwrap()).unwrap();
    let expr =
        expression_from_json(&store, &doc["expression"]).expect("expression not rebuildable");
    let targets = vec![
        store.dict().lookup_entity(GUYANA).unwrap(),
        store.dict().lookup_entity(SURINAME).unwrap(),
    ];
    assert!(store.is_referring_expression(&expr, &targets));
}

#[test]
fn default_flags_still_find_an_expression() {
    let run = refex(&["--kb", GEO, "--targets", &format!("{GUYANA},{SURINAME}")]);
    assert_eq!(run.code, 0);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "found");
    assert!(doc["complexity_bits"].as_f64().unwrap() > 0.0);
}

#[test]
fn parallel_run_reports_the_same_complexity() {
    let sequential = run_geo_pair(&[]);
    let parallel = run_geo_pair(&["--threads", "4"]);
    assert_eq!(parallel.code, 0);
    let a = parse(&sequential.stdout)["complexity_bits"].as_f64().unwrap();
    let b = parse(&parallel.stdout)["complexity_bits"].as_f64().unwrap();
    assert_eq!(a, b);
}

#[test]
fn standard_language_yields_no_expression_and_exit_zero() {
    let run = run_geo_pair(&["--language", "standard"]);
    assert_eq!(run.code, 0);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "no_re");
    assert!(doc["expression"].is_null());
    assert!(doc["complexity_bits"].is_null());
}

#[test]
fn excluding_a_predicate_removes_its_candidates() {
    let run = run_geo_pair(&["--exclude-predicate", "http://ex.org/locatedIn"]);
    assert_eq!(run.code, 0);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "no_re");
    assert_eq!(doc["stats"]["queue_size"], 1);
}

#[test]
fn unknown_target_exits_with_code_two() {
    let run = refex(&["--kb", GEO, "--targets", "http://ex.org/Atlantis"]);
    assert_eq!(run.code, 2);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "error");
    assert!(doc["message"].as_str().unwrap().contains("Atlantis"));
}

#[test]
fn unreadable_knowledge_base_exits_with_code_one() {
    let run = refex(&["--kb", "/no/such/file.nt", "--targets", GUYANA]);
    assert_eq!(run.code, 1);
    assert_eq!(parse(&run.stdout)["status"], "error");
}

#[test]
fn out_of_range_fraction_exits_with_code_one() {
    let run = refex(&["--kb", GEO, "--targets", GUYANA, "--inverse-top", "1.5"]);
    assert_eq!(run.code, 1);
    assert_eq!(parse(&run.stdout)["status"], "error");
}

#[test]
fn zero_timeout_exits_with_code_three() {
    let run = run_geo_pair(&["--timeout", "0"]);
    assert_eq!(run.code, 3);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "timeout");
    assert!(doc["expression"].is_null());
}

#[test]
fn summarize_lists_expressions_in_ascending_complexity() {
    let run = refex(&["--kb", GEO, "--targets", GUYANA, "--summarize", "5", "--inverse-top", "0"]);
    assert_eq!(run.code, 0);
    let doc = parse(&run.stdout);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["target"], GUYANA);
    let entries = doc["expressions"].as_array().unwrap();
    assert!(!entries.is_empty() && entries.len() <= 5);
    let bits: Vec<f64> = entries.iter().map(|e| e["complexity_bits"].as_f64().unwrap()).collect();
    assert!(bits.windows(2).all(|w| w[0] <= w[1]), "not ascending: {bits:?}");
    assert!(doc["derived"].as_u64().unwrap() as usize >= entries.len());
}

#[test]
fn summarize_rejects_multiple_targets() {
    let run = run_geo_pair(&["--summarize", "3"]);
    assert_eq!(run.code, 1);
    assert_eq!(parse(&run.stdout)["status"], "error");
}

#[test]
fn stats_flag_writes_to_standard_error_only() {
    let run = run_geo_pair(&["--stats"]);
    assert_eq!(run.code, 0);
    assert!(run.stderr.contains("queue size"));
    assert!(run.stderr.contains("nodes visited"));
    parse(&run.stdout);
}

#[test]
fn help_and_usage_errors_use_conventional_codes() {
    let help = refex(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("Usage"));
    let bad = refex(&["--kb", GEO, "--targets", GUYANA, "--no-such-flag"]);
    assert_eq!(bad.code, 1);
    assert!(!bad.stderr.is_empty());
}
