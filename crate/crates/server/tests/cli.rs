use std::path::{Path, PathBuf};
use std::process::Command;

use carecall_core::dispatch::{DeliveryStatus, Outbox};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carecall"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn generate_then_replay_fills_the_outbox() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = bin()
        .args(["generate", data("hold_fruits.script.toml").to_str().unwrap(), "-o"])
        .arg(&trace)
        .args(["--seed", "9", "--noise", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let outbox = dir.path().join("box.jsonl");
    let out = bin()
        .current_dir(dir.path())
        .arg("replay")
        .arg(&trace)
        .arg("--outbox")
        .arg(&outbox)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("selection     Fruits"), "{stdout}");

    let records = Outbox::read(&outbox).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| &*r.label == "Fruits" && r.status == DeliveryStatus::Sent));
}

#[test]
fn replay_events_are_protocol_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .arg("replay")
        .arg(data("fig3.trace.jsonl"))
        .arg("--config")
        .arg(data("fig3.config.toml"))
        .arg("--events")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let cursors = stdout.lines().filter(|l| l.contains("\"cursor_out\"")).count();
    assert_eq!(cursors, 90);
    assert_eq!(stdout.lines().filter(|l| l.contains("\"selection_out\"")).count(), 1);
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = bin().args(["replay", "missing.jsonl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));

    let out = bin().args(["generate", "nope.toml", "-o", "x.jsonl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["bench", "x.jsonl", "--turbo"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .arg("bench")
        .arg(data("three_selections.trace.jsonl"))
        .args(["--passes", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for key in ["min_ms", "median_ms", "mean_ms", "max_ms", "effective_fps", "max_median_ratio"] {
        assert!(stdout.contains(key), "missing {key} in {stdout}");
    }
    assert!(stdout.contains("selections           3"));
}

#[test]
fn bad_trace_line_fails_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.jsonl");
    std::fs::write(&trace, "{\"i\":0,\"t\":0,\"joints\":[]}\n{\"i\":0,\"t\":33,\"joints\":[]}\n").unwrap();
    let out = bin().current_dir(dir.path()).arg("replay").arg(&trace).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.jsonl") && stderr.contains("line 2"), "{stderr}");
}

#[test]
fn serve_fails_cleanly_on_a_bad_address() {
    let out = bin().args(["serve", "--listen", "256.0.0.1:1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
