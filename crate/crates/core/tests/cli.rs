use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fable")).args(args).output().expect("binary runs")
}

fn fixture() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/canonical.scn").display().to_string()
}

#[test]
fn replay_prints_three_episodes() {
    let out = fable(&["replay-fable"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("episode")).count(), 3);
    assert!(text.contains("color:elimination"));
    assert!(text.contains("weight:growth"));
}

#[test]
fn run_single_order_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let out = fable(&["run", "--scenario", &fixture(), "--order-index", "1", "--out-dir", &out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let episodes = fs::read_to_string(dir.path().join("episodes.csv")).unwrap();
    let probes = fs::read_to_string(dir.path().join("probes.csv")).unwrap();
    assert_eq!(episodes.lines().count(), 9);
    assert_eq!(probes.lines().count(), 1 + 8 * 4);
    assert!(episodes.lines().nth(1).unwrap().starts_with("0,obj8,,"));
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out =
            fable(&["run", "--scenario", &fixture(), "--out-dir", &d.path().display().to_string(), "--seed", "7"]);
        assert!(out.status.success());
    }
    for k in 0..4 {
        for name in ["episodes.csv", "probes.csv"] {
            let rel = format!("order_{k}/{name}");
            assert_eq!(fs::read(a.path().join(&rel)).unwrap(), fs::read(b.path().join(&rel)).unwrap(), "{rel}");
        }
    }
}

#[test]
fn bad_scenario_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    let text = fs::read_to_string(fixture()).unwrap().replace("order = 7,6,5,4,3,2,1,0", "order = 0,0,1");
    fs::write(&path, &text).unwrap();
    let out =
        fable(&["run", "--scenario", &path.display().to_string(), "--out-dir", &dir.path().display().to_string()]);
    assert!(!out.status.success());
    let line = text.lines().position(|l| l == "order = 0,0,1").unwrap() + 1;
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("line {line}: order is not a permutation")), "{err}");
}

#[test]
fn out_of_range_order_index_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        fable(&["run", "--scenario", &fixture(), "--order-index", "9", "--out-dir", &dir.path().display().to_string()]);
    assert!(!out.status.success());
}

#[test]
fn capacity_probe_reports_accuracy() {
    let out = fable(&["probe-capacity", "--n", "1", "--cue", "1.0"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("bit accuracy 1.0000"));
    assert!(!fable(&["probe-capacity", "--n", "10", "--cue", "0"]).status.success());
}
