use std::path::Path;
use std::process::{Command, Output};

fn landscape(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_HN: [&str; 4] = ["--set", "n=20", "--set", "r_count=5"];

#[test]
fn successful_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["hn", "--out", "run"];
    args.extend(SMALL_HN);
    let o = landscape(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.csv", "report.json", "manifest.json", "profile_r0.90.csv"] {
        assert!(dir.path().join("run").join(f).exists(), "missing {f}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("pearson"));
}

#[test]
fn default_output_directory_is_per_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["hn"];
    args.extend(SMALL_HN);
    assert_eq!(landscape(&args, dir.path()).status.code(), Some(0));
    assert!(dir.path().join("out/hn/report.csv").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(landscape(&["nope"], dir.path()).status.code(), Some(2));
    assert_eq!(landscape(&["hn", "--workers", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = landscape(&["hn", "--set", "bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.toml"), "n = 20\nr_count = \"many\"\n").unwrap();
    let o = landscape(&["hn", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = landscape(&["hn", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_contract_violation_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = landscape(
        &["cdt-mono", "--set", "a_start=10", "--set", "a_count=2", "--set", "steps_per_period=200"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn io_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("file"), "").unwrap();
    let mut args = vec!["hn", "--out", "file/run"];
    args.extend(SMALL_HN);
    assert_eq!(landscape(&args, dir.path()).status.code(), Some(4));
    assert_eq!(landscape(&["hn", "--config", "missing.toml"], dir.path()).status.code(), Some(4));
}

#[test]
fn set_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "n = 20\nr_count = 5\n").unwrap();
    let o = landscape(
        &["hn", "--config", "c.toml", "--set", "n=24", "--print-config"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("n = 24"));
    assert!(text.contains("r_count = 5"));
}

#[test]
fn manifest_rerun_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let first = landscape(
        &["bounds", "--out", "a", "--seed", "7", "--set", "dim=10", "--set", "model=\"random\""],
        dir.path(),
    );
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = landscape(&["bounds", "--config", "a/manifest.json", "--out", "b"], dir.path());
    assert_eq!(second.status.code(), Some(0), "{}", stderr(&second));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 7);
    for name in manifest["outputs"].as_array().unwrap() {
        let name = name.as_str().unwrap();
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

#[test]
fn keys_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = landscape(&["keys", "cdt-mono"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("truncation = 6"));
    assert!(text.contains("a_count = 500"));
    assert_eq!(landscape(&["keys", "nope"], dir.path()).status.code(), Some(2));
}
