use std::path::Path;
use std::process::{Command, Output};

fn alps(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alps")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        let o = alps(
            &["run", "--optimizer", "random", "--benchmark", "logistic", "--trials", "4", "--budget", "12", "--seed", "3", "--out", out],
            d,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["traces.csv", "summary.json", "convergence.svg"] {
        assert!(d.join("a").join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read(d.join("a/traces.csv")).unwrap(), std::fs::read(d.join("b/traces.csv")).unwrap());

    let o = alps(&["plot", "a/summary.json", "b/summary.json", "--out", "both.svg"], d);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(d.join("both.svg")).unwrap();
    assert_eq!(svg.matches("legend-entry").count(), 2);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("c.toml"),
        "optimizer = \"alps\"\ntrials = 50\nbudget = 10\n[alps]\nn_s = 40\n[alps.forest]\nn_trees = 5\n",
    )
    .unwrap();
    let o = alps(&["run", "--config", "c.toml", "--trials", "2", "--out", "r"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(d.join("r/summary.json")).unwrap();
    assert!(summary.contains("\"trials\": 2"));

    let o = alps(&["sweep", "--config", "c.toml", "--trials", "2", "--n-batch", "1,5", "--n-s", "40", "--out", "s"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(d.join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(alps(&["run", "--optimizer", "simplex-annealing"], d).status.code(), Some(2));
    assert_eq!(alps(&["run", "--benchmark", "rosenbrock"], d).status.code(), Some(2));
    assert_eq!(alps(&["run", "--trials", "0"], d).status.code(), Some(2));
    assert_eq!(alps(&["run", "--config", "missing.toml"], d).status.code(), Some(2));
    std::fs::write(d.join("bad.toml"), "trials = \"many\"").unwrap();
    assert_eq!(alps(&["run", "--config", "bad.toml"], d).status.code(), Some(2));
    assert_eq!(alps(&["frobnicate"], d).status.code(), Some(2));
}

#[test]
fn train_model_then_search() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = alps(&["train-model", "--synthetic", "200", "--wavelengths", "80", "--material", "inconel", "--out", "m.json"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("test RMSE"));
    std::fs::write(
        d.join("p.toml"),
        "trials = 2\nbudget = 10\n[benchmark]\nname = \"rfpca\"\nmodel = \"m.json\"\ntarget = \"tpv\"\n[alps]\nn_s = 50\n",
    )
    .unwrap();
    let o = alps(&["run", "--config", "p.toml", "--out", "tpv"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("tpv/traces.csv").exists());
}
