use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jeffreys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jeffreys"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, steps: usize) -> String {
    let out = jeffreys(&["scenarios", "--show", name, "--steps", &steps.to_string()]);
    assert!(out.status.success());
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, &out.stdout).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn lists_catalog() {
    let out = jeffreys(&["scenarios", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["merge-beta", "diverge-iid", "singular-pair", "incoherent-scripted"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn run_writes_reproducible_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "merge-beta", 300);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = jeffreys(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = fs::read(a.join("trace.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("trace.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,y,h_m,tv_m,log2_k1,log2_k2,log2_geomean,components_active,bet_placed"
    );
    assert_eq!(lines.count(), 300);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"], 300);
}

#[test]
fn sweep_writes_one_directory_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "diverge-iid", 50);
    let out = dir.path().join("sweep");
    let o = jeffreys(&["sweep", "--config", &cfg, "--seeds", "3..6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    for seed in 3..6 {
        assert!(out.join(format!("seed_{seed}/trace.csv")).exists());
    }
    assert!(!out.join("seed_6").exists());
    let all: serde_json::Value = serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 3);
}

#[test]
fn oracles_pass_on_small_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "diverge-iid", 4);
    let text = fs::read_to_string(&cfg).unwrap().replace("\"J\": 20", "\"J\": 3").replace("\"M_max\": 64", "\"M_max\": 4");
    fs::write(&cfg, text).unwrap();
    for check in ["martingale", "metrics"] {
        let o = jeffreys(&["oracle", "--check", check, "--config", &cfg]);
        assert!(o.status.success(), "{check}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = jeffreys(&["oracle", "--check", "accounting", "--config", &cfg, "--runs", "200"]);
    assert!(o.status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "diverge-iid", 10);
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"alphabet_size\": 2, \"T\": 5}").unwrap();
    assert_eq!(jeffreys(&["run", "--config", bad.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let zero = dir.path().join("zero.json");
    fs::write(&zero, fs::read_to_string(&cfg).unwrap().replace("\"p\": 0.4", "\"p\": 0.0")).unwrap();
    assert_eq!(jeffreys(&["run", "--config", zero.to_str().unwrap(), "--out", out]).status.code(), Some(3));

    let wide = dir.path().join("wide.json");
    fs::write(&wide, fs::read_to_string(&cfg).unwrap().replace("\"m_report\": 8", "\"m_report\": 21")).unwrap();
    assert_eq!(
        jeffreys(&["oracle", "--check", "metrics", "--config", wide.to_str().unwrap()]).status.code(),
        Some(4)
    );

    assert_eq!(jeffreys(&["sweep", "--config", &cfg, "--seeds", "5..5", "--out", out]).status.code(), Some(2));
}
