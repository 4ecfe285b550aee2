//! End-to-end runs of the binary. Golden outputs live in `tests/golden`;
//! regenerate them with `UPDATE_GOLDEN=1 cargo test --test cli`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pauli_blockade::cli::{RunConfig, DEFAULT_CONFIG, EXIT_CONFIG, EXIT_IO};
use serde_json::Value;

const SUBCOMMANDS: [(&str, &[&str]); 8] = [
    ("suppression", &["--method", "all"]),
    ("sweep-temperature", &[]),
    ("sweep-fermi", &[]),
    ("angular-map", &[]),
    ("lifetime", &[]),
    ("radial-profile", &[]),
    ("prepulse", &[]),
    ("budget", &[]),
];

fn small_config() -> RunConfig {
    let mut cfg = RunConfig::from_json(DEFAULT_CONFIG).unwrap();
    let t = &mut cfg.task;
    t.suppression.as_mut().unwrap().mc_samples = 20_000;
    t.sweep_temperature.as_mut().unwrap().grid = vec![0.1, 0.3, 0.7];
    t.sweep_fermi.as_mut().unwrap().grid = vec![0.57, 0.75, 0.93];
    t.angular_map.as_mut().unwrap().n_alpha = 7;
    let p = t.radial_profile.as_mut().unwrap();
    p.nx = 32;
    p.ny = 32;
    p.pixel_um = 1.4;
    p.bin_um = 1.4;
    let p = t.prepulse.as_mut().unwrap();
    p.n_atoms_sim = 500;
    p.kick_histories = 2;
    p.durations_us = vec![0.0, 2.5, 4.0, 5.0];
    cfg
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(subcommand: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauli-blockade"))
        .env("PAULI_BLOCKADE_THREADS", "2")
        .arg(subcommand)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn same_json(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => close(x.as_f64().unwrap(), y.as_f64().unwrap()),
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_json(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| k == "version" || y.get(k).is_some_and(|w| same_json(v, w)))
        }
        _ => a == b,
    }
}

/// Compares field by field, allowing last-digit differences in numbers.
fn same_contents(name: &str, got: &str, want: &str) -> bool {
    if name.ends_with(".json") {
        return same_json(&serde_json::from_str(got).unwrap(), &serde_json::from_str(want).unwrap());
    }
    let got: Vec<&str> = got.split([',', '\n']).collect();
    let want: Vec<&str> = want.split([',', '\n']).collect();
    got.len() == want.len()
        && got.iter().zip(&want).all(|(g, w)| match (g.parse::<f64>(), w.parse::<f64>()) {
            (Ok(x), Ok(y)) => close(x, y),
            _ => g == w,
        })
}

#[test]
fn subcommands_match_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (sub, extra) in SUBCOMMANDS {
        let out = dir.path().join(sub);
        let result = run(sub, &config, &out, extra);
        assert!(result.status.success(), "{sub}: {}", String::from_utf8_lossy(&result.stderr));
        let golden = golden_dir().join(sub);
        let mut produced: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        produced.sort();
        if update {
            let _ = std::fs::remove_dir_all(&golden);
            std::fs::create_dir_all(&golden).unwrap();
            for p in &produced {
                std::fs::copy(p, golden.join(p.file_name().unwrap())).unwrap();
            }
            continue;
        }
        let mut expected: Vec<_> = std::fs::read_dir(&golden)
            .unwrap_or_else(|_| panic!("missing golden directory for {sub}; run with UPDATE_GOLDEN=1"))
            .map(|e| e.unwrap().file_name())
            .collect();
        expected.sort();
        let names: Vec<_> = produced.iter().map(|p| p.file_name().unwrap().to_owned()).collect();
        assert_eq!(names, expected, "{sub}: file set differs");
        for p in &produced {
            let name = p.file_name().unwrap().to_string_lossy();
            let got = std::fs::read_to_string(p).unwrap();
            let want = std::fs::read_to_string(golden.join(&*name)).unwrap();
            assert!(same_contents(&name, &got, &want), "{sub}/{name} differs from golden");
        }
    }
}

#[test]
fn provenance_sidecar_records_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let config = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    assert!(run("suppression", &config, &out, &["--method", "mc", "--seed", "5"]).status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out.join("suppression.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["subcommand"], "suppression");
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["config_sha256"], cfg.digest());
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["files"][0], "suppression.csv");

    // quadrature runs draw no random numbers and record no seed
    assert!(run("lifetime", &config, &out, &[]).status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out.join("lifetime.meta.json")).unwrap()).unwrap();
    assert!(meta["seed"].is_null());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let csv = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        assert!(run("suppression", &config, &out, extra).status.success());
        std::fs::read_to_string(out.join("suppression.csv")).unwrap()
    };
    let base = csv("a", &["--method", "mc"]);
    let same = csv("b", &["--method", "mc", "--seed", &small_config().task.seed.to_string()]);
    let other = csv("c", &["--method", "mc", "--seed", "99"]);
    assert_eq!(base, same);
    assert_ne!(base, other);
}

#[test]
fn json_format_is_a_table_of_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let out = dir.path().join("out");
    assert!(run("angular-map", &config, &out, &["--format", "json"]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("angular_map.json")).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains("alpha_deg") && text.contains("s_value"));
    assert!(!out.join("angular_map.csv").exists());
}

#[test]
fn invalid_trap_exits_with_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.trap.freq_x_hz = -120.0;
    let config = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let result = run("budget", &config, &out, &[]);
    assert_eq!(result.status.code(), Some(EXIT_CONFIG));
    let report: Value = serde_json::from_str(String::from_utf8_lossy(&result.stderr).trim()).unwrap();
    assert_eq!(report["error"], "config");
    assert!(!out.exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
    v["trap"]["freq_w_hz"] = 3.0.into();
    let config = dir.path().join("config.json");
    std::fs::write(&config, v.to_string()).unwrap();
    let result = run("budget", &config, &dir.path().join("out"), &[]);
    assert_eq!(result.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&result.stderr).contains("freq_w_hz"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let result = run("budget", &dir.path().join("absent.json"), &dir.path().join("out"), &[]);
    assert_eq!(result.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    // a regular file where the output directory should go
    let blocker = dir.path().join("out");
    std::fs::write(&blocker, "").unwrap();
    let result = run("budget", &config, &blocker, &[]);
    assert_eq!(result.status.code(), Some(EXIT_IO));
}
