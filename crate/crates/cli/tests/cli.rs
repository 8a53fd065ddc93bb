use std::path::Path;
use std::process::{Command, Output};

fn mgtlab(args: &[&str], config: &str, out: &Path) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mgtlab"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .env("MGTLAB_THREADS", "2")
        .output()
        .unwrap()
}

const MINIMAL: &str = r#"{ "model": { "alpha": 4.0, "b": 2.0, "c": 1.0, "s": 0.5 }, "grid": { "n_interior": 64 }, "n_modes": 8 }"#;

#[test]
fn roots_run_succeeds_and_lists_its_files() {
    let out = tempfile::tempdir().unwrap();
    let result = mgtlab(&["roots"], MINIMAL, out.path());
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.ends_with("roots.csv")));
    assert!(stdout.lines().any(|l| l.ends_with("manifest.json")));
    let csv = std::fs::read_to_string(out.path().join("roots/roots.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,lambda_n,re_l1,re_l2,im_l2,residual"));
}

#[test]
fn unstable_parameters_exit_with_validation_status() {
    let out = tempfile::tempdir().unwrap();
    let config = MINIMAL.replace(r#""alpha": 4.0"#, r#""alpha": 0.5"#);
    let result = mgtlab(&["roots"], &config, out.path());
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("gamma > 0"));
}

#[test]
fn malformed_json_and_unknown_commands_exit_with_status_one() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(mgtlab(&["roots"], "{ not json", out.path()).status.code(), Some(1));
    assert_eq!(mgtlab(&["bogus"], MINIMAL, out.path()).status.code(), Some(1));
}

#[test]
fn rerun_produces_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for out in [a.path(), b.path()] {
        assert!(mgtlab(&["kernels"], MINIMAL, out).status.success());
    }
    let read = |p: &Path| std::fs::read(p.join("kernels/bounds.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}
