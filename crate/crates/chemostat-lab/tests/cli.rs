//! End-to-end checks of the command-line interface: exit-code conventions,
//! report content on the two worked regimes, diagnostics for broken
//! configs, and byte-identical artifacts across reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const PERSISTENCE: &str = r#"
[model]
omega = 6.283185307179586

[d]
kind = "constant"
value = 1.0

[s0]
kind = "sinusoid"
offset = 2.0
sin = 1.0

[species.1]
response = "michaelis_menten"
b = 10.0
k = 1.0
tau = 0.1
"#;

const EXTINCTION: &str = r#"
[model]
omega = 6.283185307179586

[d]
kind = "constant"
value = 1.0

[s0]
kind = "sinusoid"
offset = 2.0
sin = 1.0

[species.1]
response = "michaelis_menten"
b = 1.0
k = 1.0
tau = 1.0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chemostat"))
}

/// Fresh scratch directory under the cargo-managed test tmpdir.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_describes_the_model_and_exits_cleanly() {
    let dir = scratch("cli-validate");
    let config = write_config(&dir, "model.toml", PERSISTENCE);
    let out = bin().arg("validate").arg(&config).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("n = 1"), "missing species count: {text}");
    assert!(text.contains("H1") && text.contains("H2"), "missing hypothesis lines: {text}");
}

#[test]
fn check_separates_the_two_worked_regimes() {
    let dir = scratch("cli-check");
    let persistence = write_config(&dir, "persistence.toml", PERSISTENCE);
    let extinction = write_config(&dir, "extinction.toml", EXTINCTION);

    let out = bin().arg("check").arg(&persistence).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let h3a = text.lines().find(|l| l.contains("H3A")).expect("H3A line");
    assert!(h3a.contains("holds"), "H3A should hold at b = 10, tau = 0.1: {h3a}");
    assert!(h3a.contains("4.533527"), "frozen margin missing: {h3a}");
    let stab = text.lines().find(|l| l.contains("EXT_STAB")).expect("EXT_STAB line");
    assert!(stab.contains("fails"), "EXT_STAB should fail at b = 10: {stab}");

    let out = bin().arg("check").arg(&extinction).output().unwrap();
    // Failing conditions are report content, not a fault.
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let stab = text.lines().find(|l| l.contains("EXT_STAB")).expect("EXT_STAB line");
    assert!(stab.contains("holds"), "EXT_STAB should hold at b = 1, tau = 1: {stab}");
    assert!(stab.contains("1.988034"), "frozen margin missing: {stab}");
    let h3a = text.lines().find(|l| l.contains("H3A")).expect("H3A line");
    assert!(h3a.contains("fails"), "H3A should fail at b = 1, tau = 1: {h3a}");
}

#[test]
fn find_periodic_reports_washout_convergence_as_success() {
    let dir = scratch("cli-washout-regime");
    let config = write_config(&dir, "extinction.toml", EXTINCTION);
    let out = bin()
        .arg("--out-dir")
        .arg(&dir)
        .arg("find-periodic")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("washout"),
        "expected a washout-convergence message: {}",
        stdout(&out)
    );
}

#[test]
fn artifacts_are_byte_identical_across_reruns() {
    let dir = scratch("cli-determinism");
    let config = write_config(&dir, "model.toml", PERSISTENCE);

    let run = |out_dir: &Path| {
        fs::create_dir_all(out_dir).unwrap();
        let out = bin()
            .arg("--out-dir")
            .arg(out_dir)
            .arg("washout")
            .arg(&config)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        let sweep = bin()
            .arg("--out-dir")
            .arg(out_dir)
            .arg("sweep")
            .arg(&config)
            .args(["--b-steps", "6", "--tau-steps", "6"])
            .output()
            .unwrap();
        assert!(sweep.status.success(), "stderr: {}", stderr(&sweep));
    };

    let first = dir.join("run1");
    let second = dir.join("run2");
    run(&first);
    run(&second);

    for name in ["washout.csv", "sweep.csv"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let header = fs::read_to_string(first.join("washout.csv")).unwrap();
    assert!(header.lines().any(|l| l.starts_with("t,")), "missing CSV header");
    assert!(header.lines().any(|l| l.starts_with('#')), "missing comment block");
}

#[test]
fn output_directory_env_var_is_honored() {
    let dir = scratch("cli-env-dir");
    let config = write_config(&dir, "model.toml", PERSISTENCE);
    let out = bin()
        .env("CHEMOSTAT_OUT_DIR", &dir)
        .arg("washout")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.join("washout.csv").exists());
}

#[test]
fn malformed_configs_produce_diagnostics_not_artifacts() {
    let dir = scratch("cli-diagnostics");

    let broken = write_config(&dir, "broken.toml", "[model\nomega = 1.0\n");
    let out = bin().arg("validate").arg(&broken).output().unwrap();
    assert!(!out.status.success(), "syntax error must not exit 0");
    let err = stderr(&out);
    assert!(err.contains("line"), "diagnostic should name the line: {err}");

    let unknown = write_config(
        &dir,
        "unknown.toml",
        &PERSISTENCE.replace("michaelis_menten", "teleportation"),
    );
    let out = bin().arg("validate").arg(&unknown).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("teleportation"), "stderr: {}", stderr(&out));

    let out = bin().arg("validate").arg(dir.join("absent.toml")).output().unwrap();
    assert!(!out.status.success(), "missing file must not exit 0");
}
