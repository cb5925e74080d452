//! End-to-end runs of the `socratic` binary against the mock backend.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn socratic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socratic")).args(args).output().expect("binary runs")
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_socratic"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = socratic(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A demo day: twelve scenes, four frames each, seven minutes apart.
fn day(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("frames.jsonl");
    ok_json(&["synth", "frames", "--audio", "--out", s(&path)]);
    path
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    assert_eq!(code(&socratic(&["history", "--frames", "/definitely/missing.jsonl"])), 4);
    assert_eq!(code(&socratic(&["history", "--frames", s(&frames), "--mode", "sideways"])), 2);
    assert_eq!(code(&socratic(&["index", "build", "--keys", s(&frames), "--algo", "annoy", "--out", "x"])), 2);
    assert_eq!(code(&socratic(&["history", "--frames", s(&frames), "--mode", "search"])), 2);

    let locators = dir.path().join("sel.txt");
    ok_json(&["synth", "select-frames", "--out", s(&locators)]);
    let one = socratic(&["select", "--frames", s(&locators), "--vlm", "a@0", "--baseline-vlm", "a"]);
    assert_eq!(code(&one), 2);

    let image_without_index = socratic(&["ask", "--question", "where is my mug?", "--modality", "image"]);
    assert_eq!(code(&image_without_index), 2);
    let err: Value = serde_json::from_slice(&image_without_index.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 2);

    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "sed = 3\n").unwrap();
    assert_eq!(code(&socratic(&["--config", s(&bad_cfg), "history", "--frames", s(&frames)])), 2);
}

#[test]
fn identical_runs_print_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    let args = ["--seed", "7", "history", "--frames", s(&frames), "--mode", "hybrid", "--entity", "mug", "--interval", "1800000"];
    let (a, b) = (socratic(&args), socratic(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn uniform_history_captions_each_grid_frame() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    let three: String = std::fs::read_to_string(&frames).unwrap().lines().take(3).map(|l| format!("{l}\n")).collect();
    let short = dir.path().join("three.jsonl");
    std::fs::write(&short, three).unwrap();
    let log = ok_json(&["history", "--frames", s(&short), "--interval", "300000"]);
    let events = log["events"].as_array().unwrap();
    assert_eq!(events.len(), 3);
    assert_eq!(log["source"], "uniform");
    assert_eq!(log["run"]["inputs"]["interval_ms"], "300000");

    let pretty = socratic(&["history", "--frames", s(&short), "--pretty"]);
    let text = String::from_utf8(pretty.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("8:00 AM: I am making coffee"));
}

#[test]
fn history_file_round_trips_into_ask() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    let log = dir.path().join("day.json");
    let quiet = socratic(&["history", "--frames", s(&frames), "--out", s(&log), "--pretty"]);
    assert!(quiet.status.success() && quiet.stdout.is_empty());
    let answer = ok_json(&["ask", "--history", s(&log), "--question", "did I drink coffee today?", "--explain"]);
    assert_eq!(answer["modality"], "text_answer");
    assert!(answer["text"].as_str().unwrap().starts_with("yes"));
    assert!(answer["explanation"].is_string());
}

#[test]
fn search_history_finds_the_entity_and_ask_retrieves_its_frame() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    let q = "where did I leave my mug?";
    let log = ok_json(&["history", "--frames", s(&frames), "--mode", "search", "--question", q]);
    assert_eq!(log["search_entities"], serde_json::json!(["mug"]));
    assert_eq!(log["events"][0]["t_ms"], 8 * 3_600_000);

    let answer = ok_json(&["ask", "--question", q, "--frames", s(&frames)]);
    assert_eq!(answer["modality"], "image_search");
    assert_eq!(answer["search_entity"], "mug");
    assert_eq!(answer["retrieved"][0]["frame"], 0);
}

#[test]
fn repl_reads_until_end_of_input() {
    let dir = TempDir::new().unwrap();
    let frames = day(&dir);
    let log = dir.path().join("day.json");
    assert!(socratic(&["history", "--frames", s(&frames), "--out", s(&log)]).status.success());
    let empty = with_stdin(&["ask", "--history", s(&log)], "");
    assert_eq!(code(&empty), 0);
    assert!(empty.stdout.is_empty());

    // A question that cannot be answered is reported and the loop goes on.
    let two = with_stdin(&["ask", "--history", s(&log)], "where did I leave my mug?\n\ndid I drink coffee today?\n");
    assert_eq!(code(&two), 0);
    assert_eq!(String::from_utf8(two.stdout).unwrap().lines().count(), 1);
    assert_eq!(String::from_utf8(two.stderr).unwrap().lines().count(), 1);
}

#[test]
fn greedy_single_candidate_caption() {
    let out = ok_json(&["caption", "--image", "synth:kitchen;mug", "--internet", "--candidates", "1", "--temperature", "0"]);
    assert_eq!(out["candidates"].as_array().unwrap().len(), 1);
    assert_eq!(out["caption"], out["candidates"][0]["text"]);
    let ego = ok_json(&["caption", "--image", "synth:kitchen;coffee maker;making coffee", "--t-ms", "5"]);
    assert_eq!(ego["t_ms"], 5);
    assert_eq!(ego["detections"]["places"]["items"][0]["label"], "kitchen");
}

fn v2t_fixture(dir: &TempDir, transcript_chars: usize) -> (PathBuf, PathBuf, PathBuf) {
    let out = dir.path().join(format!("v{transcript_chars}"));
    ok_json(&["synth", "v2t", "--videos", "2", "--coverage", "0", "--out-dir", s(&out)]);
    let transcripts = out.join("transcripts.jsonl");
    let t = "x".repeat(transcript_chars);
    std::fs::write(&transcripts, format!("{{\"video_id\":\"video0000\",\"transcript\":\"{t}\"}}\n")).unwrap();
    (out.join("videos.smeb"), out.join("captions.tsv"), transcripts)
}

#[test]
fn transcript_gate_is_inclusive_at_one_hundred_characters() {
    let dir = TempDir::new().unwrap();
    for (chars, fused) in [(99, 0), (100, 1)] {
        let (v, c, t) = v2t_fixture(&dir, chars);
        let m = ok_json(&["v2t", "--videos", s(&v), "--captions", s(&c), "--transcripts", s(&t)]);
        assert_eq!(m["n_fused"], fused, "{chars} chars");
        assert_eq!(m["n_queries"], 2);
    }
    let (v, c, t) = v2t_fixture(&dir, 99);
    let lowered = ok_json(&["v2t", "--videos", s(&v), "--captions", s(&c), "--transcripts", s(&t), "--gate", "99"]);
    assert_eq!(lowered["n_fused"], 1);
    let none = socratic(&["v2t", "--videos", s(&v), "--captions", s(&c), "--transcripts", s(&t), "--subset", "long"]);
    assert_ne!(code(&none), 0);
}

#[test]
fn long_transcripts_lift_retrieval_on_repeated_scenes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("corpus");
    ok_json(&["synth", "v2t", "--out-dir", s(&out)]);
    let (v, c, t) = (out.join("videos.smeb"), out.join("captions.tsv"), out.join("transcripts.jsonl"));
    let visual = ok_json(&["v2t", "--videos", s(&v), "--captions", s(&c)]);
    let fused = ok_json(&["v2t", "--videos", s(&v), "--captions", s(&c), "--transcripts", s(&t)]);
    assert_eq!(fused["n_fused"], 24);
    assert!(fused["r_at"]["1"].as_f64() > visual["r_at"]["1"].as_f64());
}

#[test]
fn selection_excludes_the_truth_model() {
    let dir = TempDir::new().unwrap();
    let locators = dir.path().join("sel.txt");
    ok_json(&["synth", "select-frames", "--out", s(&locators)]);
    let reference = dir.path().join("ref.json");
    std::fs::write(&reference, r#"{"b":0.9,"c":0.1}"#).unwrap();
    let report = ok_json(&[
        "select", "--frames", s(&locators), "--vlm", "a@0", "--vlm", "b@0.1", "--vlm", "c@1.5", "--baseline-vlm", "a",
        "--reference", s(&reference),
    ]);
    assert_eq!(report["truth"]["vlm"], "a");
    let rows = report["rows"].as_array().unwrap();
    let row = |id: &str| rows.iter().find(|r| r["vlm"] == id).unwrap();
    assert_eq!(row("a")["excluded"], true);
    assert_eq!(row("b")["excluded"], false);
    assert!(row("b")["score"].as_f64() > row("c")["score"].as_f64());
    assert_eq!(row("b")["per_frame"].as_array().unwrap().len(), 36);
    assert!(report["correlation"].is_object());
}

#[test]
fn persisted_exact_index_answers_like_a_fresh_one() {
    let dir = TempDir::new().unwrap();
    let keys = dir.path().join("keys.smeb");
    ok_json(&["synth", "keys", "--n", "300", "--dim", "24", "--out", s(&keys)]);
    let ix = dir.path().join("exact");
    let built = ok_json(&["index", "build", "--keys", s(&keys), "--out", s(&ix)]);
    assert_eq!((built["count"].as_u64(), built["dim"].as_u64()), (Some(300), Some(24)));
    let recall = ok_json(&["index", "recall", "--index", s(&ix), "--queries", s(&keys), "--k", "5"]);
    assert_eq!(recall["recall"], 1.0);

    let frames = day(&dir);
    let fx = dir.path().join("frames-ix");
    ok_json(&["index", "build", "--keys", s(&frames), "--out", s(&fx)]);
    let from_file = ok_json(&["ask", "--question", "where did I leave my mug?", "--index", s(&fx)]);
    let in_memory = ok_json(&["ask", "--question", "where did I leave my mug?", "--frames", s(&frames)]);
    assert_eq!(from_file["retrieved"], in_memory["retrieved"]);
}

#[test]
fn lsh_index_recovers_self_queries() {
    let dir = TempDir::new().unwrap();
    let keys = dir.path().join("keys.smeb");
    ok_json(&["synth", "keys", "--n", "400", "--dim", "32", "--out", s(&keys)]);
    let ix = dir.path().join("lsh");
    ok_json(&["index", "build", "--keys", s(&keys), "--algo", "lsh", "--out", s(&ix)]);
    let recall = ok_json(&["index", "recall", "--index", s(&ix), "--queries", s(&keys)]);
    assert!(recall["recall"].as_f64().unwrap() >= 0.95, "{recall}");
    let q = ok_json(&["index", "query", "--index", s(&ix), "--queries", s(&keys), "--k", "1"]);
    assert!(q.to_string().contains("\"score\""));
}

#[test]
fn config_file_and_flags_are_echoed() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\n[search]\nn_per_entity = 2\n").unwrap();
    let out = ok_json(&["--config", s(&cfg), "caption", "--image", "synth:porch"]);
    assert_eq!(out["run"]["config"]["seed"], 11);
    assert_eq!(out["run"]["config"]["search"]["n_per_entity"], 2);
    let over = ok_json(&["--config", s(&cfg), "--seed", "3", "caption", "--image", "synth:porch"]);
    assert_eq!(over["run"]["config"]["seed"], 3);
    assert_eq!(over["run"]["config"]["index"]["lsh"]["seed"], 3);
}

#[test]
fn replay_backend_without_fixtures_is_a_usage_error() {
    assert_eq!(code(&socratic(&["--backend", "replay", "caption", "--image", "synth:porch"])), 2);
}
