use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hiss_cli::{execute, run, ExperimentConfig, Metric};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hiss"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL_BERNOULLI: &str = r#"
[model]
kind = "bernoulli4d"

[sampler]
name = "hiss"

[run]
chains = 3
samples = 50
seed = 9
"#;

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(SMALL_BERNOULLI).unwrap();
    cfg.run.out_dir = tmp.path().join("first");
    run(&cfg).unwrap();

    let manifest = tmp.path().join("first/manifest.toml");
    let mut again = ExperimentConfig::from_path(&manifest).unwrap();
    let info = again.manifest.clone().unwrap();
    assert_eq!(info.nfe_measured, info.nfe_predicted);
    assert_eq!(info.nfe_measured, 3 * 50 * 5 * (2 + 2 * 4));
    again.run.out_dir = tmp.path().join("second");
    run(&again).unwrap();
    for f in ["metrics.csv", "samples.csv", "summary.csv", "nfe.csv"] {
        let a = fs::read(tmp.path().join("first").join(f)).unwrap();
        let b = fs::read(tmp.path().join("second").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn run_subcommand_writes_artifacts_and_leaves_input_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.toml", SMALL_BERNOULLI);
    let before = fs::read(&cfg).unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--seed", "3"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(fs::read(&cfg).unwrap(), before);
    for f in ["metrics.csv", "samples.csv", "summary.csv", "nfe.csv", "manifest.toml"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("iteration,wall_time_s,metric,value,chain_id"));
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 3 * 50);
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3"));
}

#[test]
fn unknown_sampler_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        &SMALL_BERNOULLI.replace("name = \"hiss\"", "name = \"annealing\""),
    );
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("annealing"), "{err}");
    assert!(err.contains("pt_dmala"), "{err}");
}

#[test]
fn missing_config_fails() {
    let out = bin().args(["run", "/nonexistent/exp.toml"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn enumerate_lists_states_by_probability() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.toml", SMALL_BERNOULLI);
    let out = tmp.path().join("enum");
    let status = bin()
        .args(["enumerate", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let mut r = csv::Reader::from_path(out.join("exact.csv")).unwrap();
    let rows: Vec<(String, f64)> = r.deserialize().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0].0, "0000");
    let total = 0.588204 + 0.294102 + 0.117641 + 13.0 * 5.882e-6;
    assert!((rows[0].1 - 0.588204 / total).abs() < 1e-12);
    assert!((rows.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-10);

    let ising = write_config(
        tmp.path(),
        "ising.toml",
        &SMALL_BERNOULLI.replace("kind = \"bernoulli4d\"", "kind = \"ising\""),
    );
    let rows = hiss_cli::enumerate(&ExperimentConfig::from_path(&ising).unwrap()).unwrap();
    assert_eq!(rows.len(), 512);
    assert!(rows.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn ablation_subcommand_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.toml", SMALL_BERNOULLI);
    let out = tmp.path().join("abl");
    let status = bin()
        .args([
            "ablation",
            cfg.to_str().unwrap(),
            "--param",
            "gl",
            "--grid",
            "10x1,5x2",
            "--out-dir",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let summary = fs::read_to_string(out.join("ablation_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(out.join("gl_10x1/metrics.csv").exists());
    assert!(out.join("gl_5x2/nfe.csv").exists());
}

#[test]
fn every_sampler_runs_on_every_model() {
    let models = [
        "kind = \"bernoulli4d\"",
        "kind = \"ising\"",
        "kind = \"tsp\"",
        "kind = \"mlp\"\nrows = 16\nhidden = 3",
    ];
    for model in models {
        for sampler in ["hiss", "dmala", "gwg", "pt_dmala", "hiss_gk", "hiss_nomh"] {
            let text = format!(
                "[model]\n{model}\n[sampler]\nname = \"{sampler}\"\nsweeps_g = 2\nrefinements_l = 1\nnum_temps = 3\nswap_interval = 2\n[run]\nchains = 2\nsamples = 6\nmetric_every = 2\n"
            );
            if model.contains("tsp") && sampler == "gwg" {
                assert!(ExperimentConfig::from_toml_str(&text).is_err());
                continue;
            }
            let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
            let report = execute(&cfg).unwrap_or_else(|e| panic!("{model} / {sampler}: {e}"));
            assert!(report.nfe.matches(), "{model} / {sampler}: {:?}", report.nfe);
            assert_eq!(report.chains.len(), 2);
            if let Some(t) = &report.tsp {
                assert!(t.unique >= 1);
            }
            if model.contains("mlp") {
                assert!(report.mean_final(Metric::Mse).unwrap() >= 0.0);
            }
        }
    }
}
