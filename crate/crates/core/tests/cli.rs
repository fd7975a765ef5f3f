use std::process::{Command, Output};

fn subfrac(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subfrac"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("spawn subfrac")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn verify_group_passes() {
    let o = subfrac(&["verify", "group"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["records"].as_array().unwrap().len() > 20);
    assert_eq!(v["config"]["group"], "heisenberg:1");
}

#[test]
fn config_errors_exit_two() {
    for args in [&["verify", "nope"][..], &["--s", "1.5", "report"], &["--group", "lie:3", "verify", "group"], &["--config", "/nonexistent", "report"]] {
        let o = subfrac(args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
    }
    let o = subfrac(&["verify", "group"], &[("SUBFRAC_COLOUR", "red")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_record_exits_one() {
    let o = subfrac(&["verify", "operator", "--only", "operator.limits"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let minus = v["records"].as_array().unwrap().iter().find(|r| r["id"].as_str().unwrap().ends_with("minus_u")).unwrap();
    assert_eq!(minus["status"], "fail");
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "group = quaternionic:1\nseed = 7\nsuite = lorentz # cheap\n").unwrap();
    let out = dir.path().join("report.json");
    let o = subfrac(
        &["--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap(), "report"],
        &[("SUBFRAC_SEED", "8"), ("SUBFRAC_QUAD_MC_SAMPLES", "20000")],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["group"], "quaternionic:1");
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["quad"]["mc_samples"], 20000);
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["id"].as_str().unwrap().starts_with("lorentz.")));
}

#[test]
fn csv_tables() {
    let o = subfrac(&["--s", "0.3,0.5", "--format", "csv", "decay"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("group,s,field,fitted_exponent,expected"));
    for (line, e) in lines.zip([3.4, 3.0]) {
        let cols: Vec<&str> = line.split(',').collect();
        let fitted: f64 = cols[3].parse().unwrap();
        assert!((fitted - e).abs() / e < 0.02, "{line}");
    }
    let o = subfrac(&["--format", "csv", "decay", "--field", "power:2.5", "--curve"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("s,field,radius,sup,inflation"));
    let o = subfrac(&["decay", "--field", "wiggle"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tail_table_scaled_column_is_flat() {
    let o = subfrac(&["tail", "--radii", "8,32,128"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    let scaled: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["scaled"].as_f64().unwrap()).collect();
    assert_eq!(scaled.len(), 3);
    let (lo, hi) = scaled.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 1.1, "{scaled:?}");
}

#[test]
fn reports_are_reproducible() {
    let a = subfrac(&["verify", "kernels,lorentz"], &[]);
    let b = subfrac(&["verify", "lorentz,kernels"], &[("RAYON_NUM_THREADS", "1")]);
    assert_eq!(a.stdout, b.stdout);
    let c = subfrac(&["--timings", "verify", "lorentz"], &[]);
    assert!(json(&c)["wall_ms"].as_object().is_some_and(|m| !m.is_empty()));
    assert!(json(&a).get("wall_ms").is_none());
}
