use std::process::Command;

fn qflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qflow"))
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = qflow()
        .args(["run", "--preset", "dirac_to_dirac", "--grid", "40", "--horizon", "0.1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["trajectory.csv", "energy.csv", "manifest.json", "density_5.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn json_format_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "preset = \"uniform_to_uniform\"\ngrid = 30\nhorizon = 1.0\n").unwrap();
    let out = dir.path().join("run");
    let status = qflow()
        .args(["run", "--format", "json", "--horizon", "0.02", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"steps\": 10"));
    assert!(out.join("trajectory.json").exists());
}

#[test]
fn sweep_respects_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let output = qflow()
        .args(["sweep", "--preset", "lambda_sweep", "--grid", "30", "--horizon", "0.05", "--lambdas", "1e-1,1e-3", "--out"])
        .arg(dir.path())
        .env("QF_MAX_THREADS", "1")
        .output()
        .unwrap();
    assert!(output.status.success());
    let table = std::fs::read_to_string(dir.path().join("lambda_errors.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn oracle_check_exit_codes() {
    let ok = qflow()
        .args(["oracle-check", "--preset", "dirac_away", "--grid", "20", "--horizon", "0.1"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("constant_speed: pass"));

    let none = qflow()
        .args(["oracle-check", "--preset", "uniform_to_uniform", "--grid", "20", "--horizon", "0.1"])
        .output()
        .unwrap();
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn bad_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("taken");
    std::fs::write(&file, "").unwrap();
    let status = qflow()
        .args(["run", "--preset", "dirac_to_dirac", "--out"])
        .arg(&file)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = qflow().args(["run", "--tau", "0.1"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
