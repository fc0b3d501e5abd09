use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn flagft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagft"))
        .args(args)
        .env_remove("FLAGFT_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn build(dir: &TempDir, w: usize, d: usize, scheme: &str) -> PathBuf {
    let path = dir.path().join(format!("{scheme}-{w}-{d}.txt"));
    let out = flagft(&[
        "build",
        "--w",
        &w.to_string(),
        "--d",
        &d.to_string(),
        "--scheme",
        scheme,
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_writes_the_text_format() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, 4, 3, "conjecture");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("flagcircuit w=4 d=3 scheme=conjecture\nP+ s\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("MZ ")).count(), 8);

    let optimized = fs::read_to_string(build(&dir, 10, 5, "optimized")).unwrap();
    assert_eq!(
        optimized.lines().filter(|l| l.starts_with("MZ ")).count(),
        20
    );

    // Stdout output matches the file.
    let out = flagft(&["build", "--w", "4", "--d", "3", "--scheme", "conjecture"]);
    assert_eq!(stdout(&out), text);
}

#[test]
fn build_rejects_even_distance() {
    let out = flagft(&["build", "--w", "4", "--d", "4", "--scheme", "conjecture"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn verify_exit_codes_follow_verdicts() {
    let dir = TempDir::new().unwrap();
    let modified = build(&dir, 4, 3, "modified");
    let out = flagft(&["verify", s(&modified), "--mode", "decoder"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict pass"));

    let optimized = build(&dir, 10, 5, "optimized");
    let out = flagft(&["verify", s(&optimized), "--mode", "search", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));

    let bare = build(&dir, 4, 3, "bare");
    let report = dir.path().join("bare.report");
    let out = flagft(&[
        "verify",
        s(&bare),
        "--mode",
        "search",
        "--report",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "fail\n");
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("verdict fail"));
    assert!(text.contains("counterexample combo"));

    // The decoder needs dummy rounds.
    let out = flagft(&["verify", s(&bare), "--mode", "decoder"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let c = build(&dir, 3, 5, "modified");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    flagft(&["verify", s(&c), "--report", s(&a), "--jobs", "1"]);
    flagft(&["verify", s(&c), "--report", s(&b), "--jobs", "4"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn replay_pass_and_fail_reports() {
    let dir = TempDir::new().unwrap();
    let bare = build(&dir, 4, 3, "bare");
    let report = dir.path().join("fail.report");
    flagft(&[
        "verify",
        s(&bare),
        "--mode",
        "search",
        "--report",
        s(&report),
    ]);
    let out = flagft(&["replay", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("reproduced:"));

    let modified = build(&dir, 2, 3, "modified");
    let pass = dir.path().join("pass.report");
    flagft(&["verify", s(&modified), "--report", s(&pass)]);
    let out = flagft(&["replay", s(&pass)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("nothing to replay"));

    let out = flagft(&["replay", s(&dir.path().join("missing"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_prints_correction_and_trace() {
    let dir = TempDir::new().unwrap();
    let c = build(&dir, 4, 3, "modified");
    let text = fs::read_to_string(&c).unwrap();
    let flags = text.lines().filter(|l| l.starts_with("MZ ")).count();

    let zeros = "0".repeat(flags);
    let out = flagft(&["decode", s(&c), &zeros]);
    assert_eq!(out.status.code(), Some(0));
    let printed = stdout(&out);
    assert!(printed.starts_with("correction 0000\n"));
    assert!(printed.contains("lower_bound 0"));

    let out = flagft(&["decode", s(&c), "0101"]);
    assert_eq!(out.status.code(), Some(2));
    let out = flagft(&["decode", s(&c), &"x".repeat(flags)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_matches_library_on_single_faults() {
    use flagft::{decode_outcomes, parse_circuit, SiteCatalog};

    let dir = TempDir::new().unwrap();
    let path = build(&dir, 4, 3, "modified");
    let circuit = parse_circuit(&fs::read_to_string(&path).unwrap()).unwrap();
    let catalog = SiteCatalog::new(&circuit).unwrap();
    for i in catalog.active().into_iter().step_by(5) {
        let flags = &catalog.result(i).flags;
        let (expected, _) = decode_outcomes(&circuit, flags).unwrap();
        let out = flagft(&["decode", s(&path), &flags.to_string()]);
        let first = stdout(&out).lines().next().unwrap().to_string();
        assert_eq!(first, format!("correction {expected}"), "site {i}");
    }
}
