use std::path::Path;
use std::process::{Command, Output};

use patrolmap::io::{load_field, load_trajectories, read_rows};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patrolmap"))
        .args(args)
        .env_remove("HJB_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn solve_a_writes_fields_and_stats() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = run(&["solve-a", "--scenario", "example2", "--n", "61", "--nlambda", "10", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!((0.0..=100.0).contains(&value(&s, "A_p")));
    let p = load_field(&d.path().join("p_a.txt")).unwrap();
    assert_eq!(p.grid().nx(), 60);

    let o = run(&[
        "stats",
        "--profit",
        d.path().join("p_a.txt").to_str().unwrap(),
        "--benefit",
        d.path().join("benefit.txt").to_str().unwrap(),
        "--mask",
        d.path().join("mask.txt").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "A_p"), value(&s, "A_p"));
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, format!("scenario = example1\nn = 999\nnlambda = 1\nformat = packed\nout = {}\n", d.path().display())).unwrap();
    let o = run(&["solve-g", "--config", cfg.to_str().unwrap(), "--n", "41"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mid = load_field(&d.path().join("p_g_mid.bin")).unwrap();
    assert_eq!(mid.grid().nx(), 40);
}

#[test]
fn trace_writes_four_model_a_paths_and_model_g_paths() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = run(&[
        "trace", "--scenario", "example4", "--n", "81", "--nlambda", "20", "--point", "0.555,0.315", "--model", "both",
        "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = load_trajectories(&d.path().join("trajectories_a.txt")).unwrap();
    assert_eq!(a.len(), 4);
    for role in ["time", "detection", "sharp", "argmax"] {
        assert!(a.iter().any(|(l, _)| l.contains(&format!("role={role}"))));
    }
    let g = load_trajectories(&d.path().join("trajectories_g.txt")).unwrap();
    assert_eq!(g.len(), 4);
    assert!(g.iter().all(|(_, t)| !t.is_empty()));
}

#[test]
fn export_figure_data_writes_fronts() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = run(&[
        "export-figure-data", "--scenario", "example3", "--n", "41", "--nlambda", "8", "--point", "0.4,0.4", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&d.path().join("lambda_payoff_0.txt")).unwrap();
    assert_eq!(rows.len(), 9);
    let front = read_rows(&d.path().join("front_0.txt")).unwrap();
    assert!(!front.is_empty() && front.len() <= 9);
    for f in ["p_a.txt", "p_sharp.txt", "summary.txt", "trajectories_a.txt"] {
        assert!(Path::new(&d.path().join(f)).exists(), "{f}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve-a", "--scenario", "example9"]).status.code(), Some(1));
    assert_eq!(run(&["solve-a", "--scenario", "example1", "--epsilon", "1.5", "--n", "21"]).status.code(), Some(1));
    assert_eq!(run(&["solve-a", "--elevation", "/nonexistent/dem.txt", "--budget", "1"]).status.code(), Some(2));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
