//! End-to-end checks of the `hpf` binary.

use std::path::Path;
use std::process::{Command, Output};

fn hpf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_same_seed_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = hpf(&["simulate", "exp1", "--seed", "7", "--out", "a.trace"], dir.path());
    let out2 = hpf(&["simulate", "exp1", "--seed", "7", "--out", "b.trace"], dir.path());
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    assert!(out2.status.success());
    let a = std::fs::read(dir.path().join("a.trace")).unwrap();
    let b = std::fs::read(dir.path().join("b.trace")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn replay_verifies_a_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sim = hpf(&["simulate", "exp1", "--out", "t.trace"], dir.path());
    assert!(sim.status.success());
    let rep = hpf(&["replay", "t.trace"], dir.path());
    assert!(rep.status.success());
    let stdout = String::from_utf8_lossy(&rep.stdout);
    assert!(stdout.contains("verified"), "unexpected output: {stdout}");
}

#[test]
fn report_over_both_conditions_includes_anova() {
    let dir = tempfile::tempdir().unwrap();
    for (cond, n) in [("v", "3"), ("vh", "3")] {
        let out = hpf(
            &["assembly", "--condition", cond, "--subjects", n, "--out-dir", "."],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let traces: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.ends_with(".trace").then_some(name)
        })
        .collect();
    assert_eq!(traces.len(), 6);
    let mut args = vec!["report"];
    args.extend(traces.iter().map(String::as_str));
    args.extend(["--anova", "--out", "report.json"]);
    let out = hpf(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ANOVA"), "missing ANOVA lines: {stdout}");
    assert!(dir.path().join("report.json").exists());

    let plot = hpf(&["plot", "report.json"], dir.path());
    assert!(plot.status.success());
    assert!(dir.path().join("report.svg").exists());
}

#[test]
fn validation_errors_exit_1_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = hpf(&["simulate", "no-such-preset"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));

    let missing = hpf(&["replay", "missing.trace"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let usage = hpf(&["definitely-not-a-subcommand"], dir.path());
    assert_eq!(usage.status.code(), Some(1));
}
