use std::path::Path;
use std::process::{Command, Output};

fn lfsgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfsgeo"))
        .args(args)
        .env_remove("LFSGEO_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

#[test]
fn bounds_table_rows() {
    let o = lfsgeo(&["bounds", "--tmin", "0", "--tmax", "0.3", "--step", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["t", "thm1i", "thm1ii", "ad", "nsw", "bsw", "sphere_lower"]);
    assert!(rows[1][1..].iter().all(|c| c.parse::<f64>().unwrap() == 0.0));
    let thm1i: f64 = rows[2][1].parse().unwrap();
    assert!((thm1i - 0.5990222222222222).abs() < 1e-15);
    // t = 0.3: outside (0, 1/4] and (0, 0.095], inside the others.
    assert_eq!(rows[4][1], "");
    assert_eq!(rows[4][2], "");
    assert!(!rows[4][3].is_empty());
}

#[test]
fn bad_grid_exits_2_with_json_error() {
    for args in [
        &["bounds", "--tmax", "1.0"][..],
        &["bounds", "--step", "0"],
        &["bounds", "--tmin", "0.4", "--tmax", "0.2"],
        &["bounds", "--tmin", "-0.1"],
    ] {
        let o = lfsgeo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&o)["error"]["kind"], "usage");
    }
}

#[test]
fn verify_sphere_exits_clean_and_is_reproducible() {
    let args = ["verify", "--manifold", "sphere", "--bound", "thm1i", "--seed", "42", "--n", "5000", "--reproducible"];
    let a = lfsgeo(&args);
    let b = lfsgeo(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["report"]["per_bound"][0]["violations"], 0);
    assert!(v.get("wall_time_s").is_none());
}

#[test]
fn wall_time_reported_by_default() {
    let o = lfsgeo(&["verify", "--n", "100"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let base = ["verify", "--manifold", "torus", "--n", "3000", "--seed", "9", "--reproducible"];
    let one = lfsgeo(&[&["--threads", "1"][..], &base].concat());
    let four = lfsgeo(&[&["--threads", "4"][..], &base].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn corrupted_bound_exits_1() {
    let o = lfsgeo(&["verify", "--manifold", "circle", "--n", "2000", "--bound-scale", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total: u64 = v["report"]["per_bound"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["violations"].as_u64().unwrap())
        .sum();
    assert!(total > 0);
}

#[test]
fn out_prefix_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let o = lfsgeo(&["verify", "--n", "50", "--bound", "lem1", "--out", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,sin_angle,bound_id,bound_value,tightness,satisfied");
    assert_eq!(csv.lines().count(), 51);
    assert!(Path::new(&dir.path().join("run.json")).exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# torus run\nmanifold = torus\nparam.R = 3\nparam.r = 1\nbound = thm1i, lem1\nn = 200\nseed = 4\n").unwrap();
    let o = lfsgeo(&["verify", "--config", cfg.to_str().unwrap(), "--n", "300", "--reproducible"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["n"], 300);
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["manifold"]["params"]["R"], 3.0);
    assert_eq!(v["report"]["per_bound"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 10\ncolour = blue\n").unwrap();
    let o = lfsgeo(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn bad_inputs_exit_2() {
    for args in [
        &["verify", "--manifold", "klein"][..],
        &["verify", "--param", "R=2"],
        &["verify", "--manifold", "torus", "--param", "R=0.2", "--param", "r=0.5"],
        &["verify", "--bound", "thm9"],
        &["verify", "--frobnicate"],
        &["verify", "--tmin", "0.5", "--tmax", "0.9", "--bound", "thm1i"],
    ] {
        let o = lfsgeo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stderr_json(&o)["error"]["kind"].is_string());
    }
}

#[test]
fn sandwich_and_eq4_checks() {
    let o = lfsgeo(&["verify", "--manifold", "torus", "--check", "sandwich", "--n", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["evaluated"], 500);
    let o = lfsgeo(&["verify", "--manifold", "sphere", "--check", "eq4", "--n", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["per_bound"][0]["id"], "eq4");
}

#[test]
fn project_reports_three_flags() {
    let o = lfsgeo(&["project", "--manifold", "torus", "--n", "500", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["report"];
    assert_eq!(r["no_collapse_observed"], true);
    assert_eq!(r["full_coverage"], true);
    assert_eq!(r["height_bound_holds"], true);
    assert!(r["injectivity"]["verdict"].as_str().unwrap().starts_with("no collapse observed"));
}

#[test]
fn cloud_from_file_and_from_manifold() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("c");
    let o = lfsgeo(&["cloud", "--manifold", "circle", "--n", "2000", "--k", "12", "--pairs", "200", "--queries", "300", "--out", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert!(v["report"]["estimates"]["median_lfs_relative_error"].as_f64().unwrap() < 0.05);

    let pts = dir.path().join("pts.txt");
    let mut text = String::from("# dim 2\n");
    for i in 0..500 {
        let a = i as f64 * std::f64::consts::TAU / 500.0;
        text.push_str(&format!("{} {}\n", 2.0 * a.cos(), 2.0 * a.sin()));
    }
    std::fs::write(&pts, text).unwrap();
    let o = lfsgeo(&["cloud", "--cloud", pts.to_str().unwrap(), "--k", "10", "--pairs", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let median = v["report"]["estimates"]["median_lfs"].as_f64().unwrap();
    assert!((median - 2.0).abs() < 0.02, "{median}");
}

#[test]
fn missing_cloud_file_is_an_input_error() {
    let o = lfsgeo(&["cloud", "--cloud", "/nonexistent/points.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "Cloud");
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(lfsgeo(&["--help"]).status.code(), Some(0));
    let v = lfsgeo(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}
