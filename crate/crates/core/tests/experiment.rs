use std::collections::BTreeMap;
use std::path::Path;

use mgtlab::experiment::output::sha256_hex;
use mgtlab::experiment::{run, ExperimentConfig, Subcommand};

const LIGHT: &str = r#"{
    "model": { "alpha": 4.0, "b": 2.0, "c": 1.0, "s": 0.5 },
    "grid": { "omega_lo": -1.0, "omega_hi": 1.0, "n_interior": 64, "exterior_half_width": 1.0 },
    "n_modes": 16,
    "horizon": 2.0,
    "control": { "region": [1.2, 1.8], "profiles": 2, "time_panels": 16 },
    "control_sizes": [4, 8],
    "epsilons": [1e-2, 1e-4, 1e-6],
    "oracles": { "refinement_panels": [4, 8, 16] },
    "seed": 17
}"#;

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn every_subcommand_writes_files_and_a_manifest() {
    let config = ExperimentConfig::from_json(LIGHT).unwrap();
    let out = tempfile::tempdir().unwrap();
    for sub in Subcommand::ALL {
        let summary = run(sub, &config, LIGHT.as_bytes(), out.path()).unwrap();
        assert!(!summary.files.is_empty(), "{}", sub.name());
        for f in &summary.files {
            assert!(summary.directory.join(f).is_file(), "{}: {}", sub.name(), f.display());
        }
        let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(&summary.manifest).unwrap()).unwrap();
        assert_eq!(manifest["subcommand"], sub.name());
        assert_eq!(manifest["config_sha256"], sha256_hex(LIGHT.as_bytes()));
        assert_eq!(manifest["seed"], 17);
    }
    let roots = std::fs::read_to_string(out.path().join("roots/roots.csv")).unwrap();
    assert_eq!(roots.lines().next().unwrap(), "n,lambda_n,re_l1,re_l2,im_l2,residual");
    assert_eq!(roots.lines().count(), 17);
}

#[test]
fn reruns_are_byte_identical() {
    let config = ExperimentConfig::from_json(LIGHT).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for sub in Subcommand::ALL {
        let first = run(sub, &config, LIGHT.as_bytes(), a.path()).unwrap();
        let second = run(sub, &config, LIGHT.as_bytes(), b.path()).unwrap();
        let (x, y) = (csv_files(&first.directory), csv_files(&second.directory));
        assert!(!x.is_empty() || sub == Subcommand::Dual);
        assert_eq!(x, y, "{}", sub.name());
    }
}

#[test]
fn seed_changes_seeded_outputs() {
    let base = ExperimentConfig::from_json(LIGHT).unwrap();
    let other = ExperimentConfig { seed: 18, ..base.clone() };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = run(Subcommand::Simulate, &base, LIGHT.as_bytes(), a.path()).unwrap();
    let y = run(Subcommand::Simulate, &other, LIGHT.as_bytes(), b.path()).unwrap();
    assert_ne!(csv_files(&x.directory), csv_files(&y.directory));
}

#[test]
fn invalid_configuration_is_reported_by_field() {
    let unstable = LIGHT.replace(r#""alpha": 4.0"#, r#""alpha": 0.4"#);
    assert!(ExperimentConfig::from_json(&unstable).is_err());
    let typo = LIGHT.replace("n_modes", "n_mode");
    let msg = ExperimentConfig::from_json(&typo).unwrap_err().to_string();
    assert!(msg.contains("n_mode"), "{msg}");
    let mut config = ExperimentConfig::from_json(LIGHT).unwrap();
    config.control.region = (0.5, 1.5);
    let msg = config.validate().unwrap_err().to_string();
    assert!(msg.contains("control.region"), "{msg}");
}
