//! End-to-end checks of the command-line interface and its exit codes.

use std::path::Path;
use std::process::Command;

fn wgpinn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wgpinn"))
}

fn write_tiny_config(dir: &Path, formulation: &str, k: f64) -> std::path::PathBuf {
    let toml = format!(
        r#"
[train]
formulation = "{formulation}"
k = {k}
hidden_layers = 2
neurons_per_layer = 5
total_steps = 8
eval_every = 4
grid_x = 4
grid_z = 3
n_boundary = 4
eval_grid_x = 6
eval_grid_z = 3

[output]
dir = "{}"

[matrix]
formulations = ["classical", "taper"]
k_values = [8.0]
"#,
        dir.join("out").display()
    );
    let path = dir.join("cfg.toml");
    std::fs::write(&path, toml).unwrap();
    path
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny_config(dir.path(), "taper", 8.0);
    let out = wgpinn().arg("run").arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "config.resolved.toml",
        "trace.csv",
        "field.csv",
        "checkpoint.json",
    ] {
        assert!(dir.path().join("out").join(name).exists(), "{name} missing");
    }
}

#[test]
fn matrix_writes_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny_config(dir.path(), "taper", 8.0);
    let out = wgpinn().arg("matrix").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.path().join("out").join("error_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(table.starts_with("formulation,k,status"));
}

#[test]
fn eval_reads_checkpoint_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny_config(dir.path(), "taper", 8.0);
    assert!(wgpinn().arg("run").arg(&cfg).status().unwrap().success());
    let ckpt = dir.path().join("out").join("checkpoint.json");
    let out = wgpinn().arg("eval").arg(&ckpt).arg("5x4").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 21);
    assert!(stdout.starts_with("x,z,re_u,im_u"));
}

#[test]
fn verify_passes_on_defaults() {
    let out = wgpinn().arg("verify").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verification passed"));
}

#[test]
fn verify_reports_forbidden_wave_number_without_crashing() {
    // k = 3 pi violates the DtN proviso; expect exit code 3 and a clean
    // report.
    let dir = tempfile::tempdir().unwrap();
    let toml = format!(
        "[train]\nk = {}\n\n[output]\ndir = \"{}\"\n",
        3.0 * std::f64::consts::PI,
        dir.path().join("out").display()
    );
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, toml).unwrap();
    let out = wgpinn().arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL problem-spec"), "{stdout}");
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[train]\nk = \"eight\"\n").unwrap();
    let out = wgpinn().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_output_directory_is_created() {
    let dir = tempfile::tempdir().unwrap();
    let deep = dir.path().join("not/yet/here");
    let toml = format!(
        r#"
[train]
hidden_layers = 2
neurons_per_layer = 4
total_steps = 2
eval_every = 2
grid_x = 3
grid_z = 2
n_boundary = 3
eval_grid_x = 4
eval_grid_z = 2

[output]
dir = "{}"
"#,
        deep.display()
    );
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, toml).unwrap();
    assert!(wgpinn().arg("run").arg(&cfg).status().unwrap().success());
    assert!(deep.join("field.csv").exists());
}

#[test]
fn output_root_env_var_relocates_relative_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let toml = r#"
[train]
hidden_layers = 2
neurons_per_layer = 4
total_steps = 2
eval_every = 2
grid_x = 3
grid_z = 2
n_boundary = 3
eval_grid_x = 4
eval_grid_z = 2

[output]
dir = "rel/run"
"#;
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, toml).unwrap();
    let status = wgpinn()
        .arg("run")
        .arg(&cfg)
        .env("WGPINN_OUT_ROOT", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("rel/run/field.csv").exists());
}

#[test]
fn zero_step_run_dumps_initial_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!(
        r#"
[train]
formulation = "taper"
hidden_layers = 2
neurons_per_layer = 4
total_steps = 0
grid_x = 3
grid_z = 2
n_boundary = 3
eval_grid_x = 4
eval_grid_z = 2

[output]
dir = "{}"
"#,
        dir.path().join("out").display()
    );
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, toml).unwrap();
    assert!(wgpinn().arg("run").arg(&cfg).status().unwrap().success());
    let trace = std::fs::read_to_string(dir.path().join("out").join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2, "header plus the step-0 record");
}
