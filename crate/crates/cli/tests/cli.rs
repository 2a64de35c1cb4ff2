use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = r#"
[kernel]
alpha = 1.5

[model]
beta = 0.5
h_gap = 0.05
h_list = [-0.05, 0.0, 0.1, 0.2]

[run]
n_list = [8, 16, 32]
replicas = 6
"#;

fn gps(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gps"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("run gps")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn homog_scan_header_and_flags() {
    let d = TempDir::new().unwrap();
    let o = gps(d.path(), BASE, &["homog-scan"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(d.path(), "homog.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# gps 0.1.0 config_sha256="));
    assert_eq!(lines.next().unwrap(), "alpha,gamma,h,N,F_N,exit_flag");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    // short volumes are flagged
    assert!(rows.iter().all(|r| r.ends_with(",1")));
    assert!(!csv.contains('\r'));
}

#[test]
fn identical_config_gives_identical_bytes_across_thread_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(gps(a.path(), BASE, &["quenched-scan", "--threads", "1"]).status.code(), Some(0));
    assert_eq!(gps(b.path(), BASE, &["quenched-scan", "--threads", "3"]).status.code(), Some(0));
    for f in ["quenched.csv", "quenched_summary.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn seed_override_changes_disorder_and_hash() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    gps(a.path(), BASE, &["quenched-scan"]);
    gps(b.path(), BASE, &["quenched-scan", "--seed", "99"]);
    let (x, y) = (read(a.path(), "quenched.csv"), read(b.path(), "quenched.csv"));
    assert_ne!(x.lines().next(), y.lines().next());
    assert_ne!(x.lines().nth(2), y.lines().nth(2));
}

#[test]
fn quenched_schema_and_summary() {
    let d = TempDir::new().unwrap();
    assert_eq!(gps(d.path(), BASE, &["quenched-scan"]).status.code(), Some(0));
    let csv = read(d.path(), "quenched.csv");
    assert_eq!(csv.lines().nth(1).unwrap(), "alpha,beta,h,N,replica,logZ_over_N");
    assert_eq!(csv.lines().filter(|l| l.contains(",summary,")).count(), 3);
    let s = read(d.path(), "quenched_summary.csv");
    assert_eq!(s.lines().nth(1).unwrap(), "alpha,beta,h,N,mean,ci,annealed_value,is_lower_bound");
    for row in s.lines().skip(2) {
        let f: Vec<&str> = row.split(',').collect();
        let (mean, ci, ann): (f64, f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap(), f[6].parse().unwrap());
        assert!(mean <= ann + 2.0 * ci, "{row}");
    }
}

#[test]
fn unknown_key_fails_closed() {
    let d = TempDir::new().unwrap();
    let o = gps(d.path(), &format!("{BASE}\n[certificate]\ndeltaa = 0.9\n"), &["homog-scan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("deltaa"));
    assert!(!d.path().join("out").exists());
}

#[test]
fn budget_and_inconclusive_exit_codes() {
    let d = TempDir::new().unwrap();
    let cfg = BASE.replace("replicas = 6", "replicas = 6\nbudget = 100");
    assert_eq!(gps(d.path(), &cfg, &["homog-scan"]).status.code(), Some(3));
    assert!(!d.path().join("out").exists());

    let cfg = BASE.replace("alpha = 1.5", "alpha = 0.5");
    assert_eq!(gps(d.path(), &cfg, &["second-moment-scan"]).status.code(), Some(4));
}

#[test]
fn certificate_json_fields() {
    let d = TempDir::new().unwrap();
    let cfg = format!("{BASE}\n[certificate]\nk_scale = 4\n");
    let o = gps(d.path(), &cfg, &["certificate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "certificate.json")).unwrap();
    for key in ["alpha", "beta", "h", "delta", "k", "rho1", "rho2", "rho3", "certified", "shift_lower_bound", "per_cell_bound_source"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["k"], 4);
    assert!(v["_meta"]["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn oracle_suite_passes() {
    let d = TempDir::new().unwrap();
    let o = gps(d.path(), BASE, &["oracle-suite"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = read(d.path(), "oracle.csv");
    assert!(csv.lines().skip(2).all(|l| l.ends_with(",true")), "{csv}");
}

#[test]
fn missing_config_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_gps")).arg("kernel-info").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
