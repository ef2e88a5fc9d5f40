use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn minent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minent")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn every_shipped_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut names: Vec<String> = std::fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".toml"))
        .collect();
    names.sort();
    assert!(names.len() >= 12, "{names:?}");
    for n in names {
        let out = tmp.path().join(&n);
        let o = minent(&["run", &config(&n), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{n}: {}{}", text(&o.stdout), text(&o.stderr));
        assert!(out.join("report.txt").exists(), "{n}");
    }
}

#[test]
fn cap_report_states_the_cap_time_and_derivative_range() {
    let tmp = tempfile::tempdir().unwrap();
    let o = minent(&["run", &config("cap.toml"), "--out", tmp.path().to_str().unwrap()]);
    let s = text(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{s}");
    assert!(s.contains("T_delta = 1/delta = 10"), "{s}");
    assert!(s.contains("ell'"), "{s}");
    assert!(tmp.path().join("data/profile.csv").exists());
    assert!(tmp.path().join("plots").read_dir().unwrap().next().is_some());
}

#[test]
fn algebraic_report_names_the_uniform_maximum() {
    let tmp = tempfile::tempdir().unwrap();
    let o = minent(&["run", &config("algebraic.toml"), "--out", tmp.path().to_str().unwrap()]);
    let s = text(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{s}");
    assert!(s.contains("max 0.649519 at uniform"), "{s}");
}

#[test]
fn malformed_config_exits_one_with_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), "kind = \"cap\"\nsede = 4\n[params]\ndelta = 0.1\n");
    let o = minent(&["run", &path]);
    assert_eq!(o.status.code(), Some(1));
    let e = text(&o.stderr);
    assert!(e.contains("line 2") && e.contains("sede"), "{e}");

    let path = write_config(tmp.path(), "kind = \"cap\"\n[params]\ndelta = \"small\"\n");
    let o = minent(&["run", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("delta"), "{}", text(&o.stderr));
}

#[test]
fn missing_config_exits_one() {
    let o = minent(&["run", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "kind = \"minent\"\n[params]\nvolumes = [1.0, 2.0]\nexpected = 123.0\n";
    let path = write_config(tmp.path(), body);
    let o = minent(&["run", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stdout));
    assert!(text(&o.stderr).contains("check failed"), "{}", text(&o.stderr));
}

#[test]
fn sweep_without_values_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = minent(&["sweep", &config("cap.toml"), "--param", "delta", "--values", "", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o.stderr));
}

#[test]
fn sweep_merges_tables_with_a_parameter_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = minent(&["sweep", &config("cap.toml"), "--param", "delta", "--values", "0.1,0.2", "--grid", "200", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}{}", text(&o.stdout), text(&o.stderr));
    let merged = std::fs::read_to_string(tmp.path().join("data/profile.csv")).unwrap();
    assert!(merged.starts_with("delta,"), "{}", &merged[..40.min(merged.len())]);
    assert!(merged.lines().skip(1).any(|l| l.starts_with("0.1,")));
    assert!(merged.lines().skip(1).any(|l| l.starts_with("0.2,")));
    let summary = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(summary.starts_with("delta,passed"), "{summary}");
    assert_eq!(summary.lines().count(), 3);
    assert!(tmp.path().join("runs/delta=0.2/report.txt").exists());
}

#[test]
fn unknown_sweep_parameter_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = minent(&["sweep", &config("cap.toml"), "--param", "nosuch", "--values", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o.stderr));
}

#[test]
fn same_seed_gives_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        let o = minent(&["run", &config("comparison.toml"), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("data/comparison.csv")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}
