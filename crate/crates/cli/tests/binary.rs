use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pdx(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdx"))
        .args(args)
        .env("PDX_OUTPUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn passing_run_exits_zero_and_writes_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdx(&["--threads", "2", "oracle"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] oracle-suite euclidean_max_residual"), "{stdout}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runtime"]["threads"], 2);
    assert_eq!(report["config"]["output"]["dir"], dir.path().to_string_lossy().as_ref());
    assert!(dir.path().join("report_oracle-suite_euclidean.csv").exists());
}

#[test]
fn set_overrides_the_environment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other");
    let set = format!("output.dir={}", other.display());
    let out = pdx(&["oracle", "--set", &set, "--set", "output.formats=[\"json\"]"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(other.join("report.json").exists());
    assert!(!other.join("report_oracle-suite_euclidean.csv").exists());
}

#[test]
fn failed_gate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("resolution-identity.toml");
    let out = pdx(&["verify", "--config", &cfg, "--set", "numeric.tolerances.identity=1e-300"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] resolution-identity identity_residual"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn config_errors_exit_one_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "experiment = \"pdx-position\"\n[model.params]\nmass = -1\nomgea = 2\n").unwrap();
    let out = pdx(&["verify", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("2 config error(s)"), "{stderr}");
    assert!(stderr.contains("model.params.mass"));
    assert!(stderr.contains("nearest valid key is `model.params.omega`"), "{stderr}");
}

#[test]
fn wrong_command_for_experiment_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdx(&["crossing", "--config", &config("oracle-suite.toml")], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not run oracle-suite"));
}

#[test]
fn unwritable_output_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = pdx(&["oracle"], &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"format_version\": 1"), "{stdout}");
}
