//! End-to-end checks of the `wat` binary: exit codes, stdin/stdout
//! conversion, output formats, and the store-backed commands.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn wat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wat"))
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = wat()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn wat");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_file(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn encode_decode_round_trip_is_lossless() {
    let vectors = "\
{0, X, 1, 9, 0, 01, 1, X, 0}
{0, 3, 4, 7, 1, 01, 0, 1, X}
{X, X, X, X, X, X, X, X, X}
";
    let encoded = run_with_stdin(&["encode"], vectors);
    assert_eq!(encoded.status.code(), Some(0));
    let hex = stdout_of(&encoded);
    assert_eq!(hex.lines().count(), 3);

    let decoded = run_with_stdin(&["decode"], &hex);
    assert_eq!(decoded.status.code(), Some(0));
    assert_eq!(stdout_of(&decoded), vectors);
}

#[test]
fn encode_empty_input_is_clean() {
    let output = run_with_stdin(&["encode"], "");
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).is_empty());
}

#[test]
fn encode_reports_malformed_lines_with_numbers() {
    let output = run_with_stdin(&["encode"], "{0, X}\n{X, X, 2, 0, X, X, X, X, X}\n");
    assert_eq!(output.status.code(), Some(2));
    // The good line still converts.
    assert_eq!(stdout_of(&output).lines().count(), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn decode_rejects_bad_hex() {
    let output = run_with_stdin(&["decode"], "zz\n");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn classify_emits_records_and_exit_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(
        &input,
        "GET /pub/product.pl?id=1; DROP TABLE Products -- HTTP/1.0\n%%%\nGET /index.html HTTP/1.0\n",
    );
    let output = wat().args(["classify"]).arg(&input).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    let text = stdout_of(&output);
    assert!(text.contains("{1, 0, 3, 2, 0, 01, 0, 1, X}"), "stdout: {text}");
    assert!(text.contains("sql-drop-table"));
}

#[test]
fn classify_benign_input_is_silent_and_clean() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(&input, "GET /index.html HTTP/1.0\nHost: www.example.com\n");
    let output = wat().args(["classify"]).arg(&input).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).is_empty());
}

#[test]
fn classify_emits_cve_tag_for_htr_fragment_request() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(&input, "GET /global.asa%3f+.htr\n");
    let output = wat().args(["classify"]).arg(&input).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    let text = stdout_of(&output);
    assert!(text.contains("{0, X, 2, 0, 0, 01, 0, X, X}"), "stdout: {text}");
    assert!(text.contains("CVE-2001-0004"), "stdout: {text}");
}

#[test]
fn classify_unreadable_rules_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(&input, "GET / HTTP/1.0\n");
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .args(["--rules", "/nonexistent/rules.conf"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn classify_log_lines_and_jsonl_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("access.log");
    write_file(
        &input,
        r#"10.0.0.9 - - [12/Jul/2001:09:00:00 +0000] "GET /members/_vti_cnf/ HTTP/1.0" 404 209
not a log line
10.0.0.9 - - [12/Jul/2001:09:00:05 +0000] "GET /ok.html HTTP/1.0" 200 11
"#,
    );
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .args(["--format", "clf", "--output", "jsonl"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let text = stdout_of(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);

    // JSON Lines records reparse, and the embedded vector parses.
    let value: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    let vector = value["vector"].as_str().unwrap();
    wat_core::codec::parse_text(vector).unwrap();
    assert_eq!(vector, "{1, 4, 2, 8, 0, 01, 0, X, X}");
    assert!(value["request_ref"].as_str().unwrap().ends_with(":1"));

    // The bad line was reported but did not stop processing.
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn classify_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(&input, "GET /servlet//..//../o.jsp\n%%%\nPROPFIND /\n");
    let first = wat().args(["classify"]).arg(&input).output().unwrap();
    let second = wat().args(["classify"]).arg(&input).output().unwrap();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn store_cluster_and_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    let store = dir.path().join("vectors.wavx");
    write_file(
        &input,
        "GET /servlet//..//../o.jsp\n%%%\nGET /ca/\\../\\../\\../\\file.ext\n%%%\nPROPFIND /\n",
    );
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .arg("--store")
        .arg(&store)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));

    // The two traversal vectors are identical and cluster at threshold 0.
    let output = wat()
        .args(["cluster", "--threshold", "0"])
        .arg("--store")
        .arg(&store)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("members [0, 1]"), "stdout: {text}");
    assert!(text.contains("3 records in 2 clusters"), "stdout: {text}");

    let output = wat().args(["report"]).arg("--store").arg(&store).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("3 stored vectors"));
    assert!(text.contains("confidentiality  3"), "stdout: {text}");
}

#[test]
fn cluster_threshold_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("vectors.wavx");
    write_file(&store, "");
    for bad in ["1.5", "-0.1", "nope"] {
        let output = wat()
            .args(["cluster", "--threshold", bad])
            .arg("--store")
            .arg(&store)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(1), "threshold {bad}");
    }
}

#[test]
fn report_on_empty_store_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("none.txt");
    let store = dir.path().join("vectors.wavx");
    write_file(&input, "GET /index.html HTTP/1.0\n");
    // Classifying benign traffic with a store creates an empty store.
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .arg("--store")
        .arg(&store)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    let output = wat().args(["report"]).arg("--store").arg(&store).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).contains("0 stored vectors"));

    let output = wat()
        .args(["cluster", "--threshold", "0.5"])
        .arg("--store")
        .arg(&store)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).contains("0 records in 0 clusters"));
}

#[test]
fn validate_corpus_passes_and_flags_errata() {
    let output = wat().args(["validate-corpus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("20/20"), "stdout: {text}");
    assert!(text.contains("item 16: PASS (erratum"), "stdout: {text}");
    assert!(text.contains("item 18: PASS (erratum"), "stdout: {text}");
}

#[test]
fn validate_corpus_detects_perturbed_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    // One entry whose recorded vector disagrees with classification.
    write_file(
        &corpus,
        "@id 17\n@vector {0, X, 2, 0, 0, 40, 0, X, 1}\nPROPFIND /\n",
    );
    let output = wat()
        .args(["validate-corpus"])
        .arg("--corpus")
        .arg(&corpus)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let text = stdout_of(&output);
    assert!(text.contains("item 17: FAIL"), "stdout: {text}");
}

#[test]
fn validate_corpus_missing_file_is_a_config_error() {
    let output = wat()
        .args(["validate-corpus", "--corpus", "/nonexistent/corpus.txt"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn env_variables_override_paths() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    write_file(&input, "GET /servlet//..//../o.jsp\n");
    // An empty rules file via WAT_RULES: nothing matches, exit 0.
    let rules = dir.path().join("empty.rules");
    write_file(&rules, "# no rules\n");
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .env("WAT_RULES", &rules)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_of(&output).is_empty());
}

#[test]
fn config_file_sets_strict_validation_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("requests.txt");
    // Matches ows-bin-batch, whose vector has privileges with an
    // authorization threat; strict validation flags it.
    write_file(&input, "GET /ows-bin/*.bat?&cmd.bat\n");
    let config = dir.path().join("wat.conf");
    write_file(&config, "[classifier]\nvalidation = strict\n");
    let output = wat()
        .args(["classify"])
        .arg(&input)
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("only applicable when the threat is authentication"), "stderr: {stderr}");
}
