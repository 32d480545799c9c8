use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crlab"))
        .args(args)
        .env_remove("CRLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn record<'a>(rep: &'a Value, id: &str) -> &'a Value {
    rep["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == id)
        .unwrap_or_else(|| panic!("no record {id}"))
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

#[test]
fn build_prints_closed_form_values() {
    let o = crlab(&["build", "--n", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("a=0.288675"), "{s}");
    assert!(s.contains("t=1.154700"), "{s}");

    let s = stdout(&crlab(&["build", "--n", "3"]));
    let t: f64 = s
        .split("t=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let k = 1.0;
    let oracle = 1.0 / (std::f64::consts::PI * (1.0 + 4.0 * k) / 14.0).cos();
    assert!((t - oracle).abs() < 1e-12);
}

#[test]
fn build_rejects_order_zero() {
    let o = crlab(&["build", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_writes_map_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p1.json");
    assert!(crlab(&["build", "--n", "1", "--out", path.to_str().unwrap()])
        .status
        .success());
    let v = report(&path);
    assert_eq!(v["n"], 1);
    assert_eq!(v["alpha"].as_array().unwrap().len(), 2);
    assert!(v["p"].is_object() || v["p"].is_array());
}

#[test]
fn verify_construction_passes_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = crlab(&[
        "verify",
        "--suite",
        "construction",
        "--n-max",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rep = report(&path);
    assert_eq!(rep["schema"], "crlab/1");
    assert_eq!(rep["suite"], "construction");
    assert_eq!(rep["config"]["n_max"], 8);
    assert!(rep["config"]["tolerances"]["construction"].is_number());
    assert!(rep["wall_time_ms"].is_number());
    for r in rep["records"].as_array().unwrap() {
        assert!(!r["anchor"].as_str().unwrap().is_empty());
    }
    assert_eq!(record(&rep, "pde-residual-n8")["status"], "pass");
}

#[test]
fn verify_phi_finds_five_quarters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    assert!(
        crlab(&["verify", "--suite", "phi", "--out", path.to_str().unwrap()])
            .status
            .success()
    );
    let rep = report(&path);
    let r = record(&rep, "phi-min");
    assert_eq!(r["status"], "pass");
    assert!(r["observed"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_witnesses_at_rounded_sqrt2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = crlab(&[
        "verify",
        "--suite",
        "witnesses",
        "--t",
        "1.4142135",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rep = report(&path);
    let r = record(&rep, "collision-n1-t1.4142135623730951");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["witness"]["image"][0], r["witness"]["image"][1]);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(crlab(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn failing_check_gives_nonzero_exit() {
    let o = crlab(&[
        "verify",
        "--suite",
        "fibers",
        "--fiber-samples",
        "50",
        "--tol-fiber-roots",
        "1e-300",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = crlab(&[
            "verify",
            "--suite",
            "fibers",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let strip = |p: &Path| {
        let mut v = report(p);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = Command::new(env!("CARGO_BIN_EXE_crlab"))
        .args([
            "verify",
            "--suite",
            "phi",
            "--resolution",
            "101",
            "--out",
            path.to_str().unwrap(),
        ])
        .env("CRLAB_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.code().is_some());
    assert_eq!(report(&path)["config"]["seed"], 99);
}

#[test]
fn sweep_margins_shrink_towards_threshold() {
    let o = crlab(&[
        "sweep",
        "--n",
        "1",
        "--t-min",
        "1.01",
        "--t-max",
        "1.15",
        "--steps",
        "15",
        "--samples",
        "400",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert!(header.contains(&"min_level_gap".to_owned()));
    assert_eq!(rows.len(), 15);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let bound: Vec<f64> = rows
        .iter()
        .map(|r| r[col("distance_bound")].parse().unwrap())
        .collect();
    assert!(bound.windows(2).all(|w| w[1] < w[0]));
    assert!(bound[14] < 1e-4);
    let first: f64 = rows[0][col("min_criterion")].parse().unwrap();
    let last: f64 = rows[14][col("min_criterion")].parse().unwrap();
    assert!(last < first / 10.0);
    assert!(rows.iter().all(|r| r[col("degenerate_witness")] == "false"));
}

#[test]
fn sweep_flags_witness_past_threshold() {
    let o = crlab(&[
        "sweep",
        "--n",
        "1",
        "--t-min",
        "1.16",
        "--t-max",
        "1.2",
        "--steps",
        "2",
        "--samples",
        "100",
    ]);
    let (header, rows) = csv_rows(&stdout(&o));
    let w = header.iter().position(|h| h == "degenerate_witness").unwrap();
    assert_eq!(rows[0][w], "true");
}

#[test]
fn sweep_for_higher_order_has_no_fiber_columns() {
    let o = crlab(&[
        "sweep",
        "--n",
        "2",
        "--t-min",
        "1.01",
        "--t-max",
        "1.04",
        "--steps",
        "3",
        "--samples",
        "100",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert!(!header.iter().any(|h| h.contains("gap")));
    assert_eq!(rows.len(), 3);
}

#[test]
fn sweep_rejects_bad_range() {
    assert_ne!(
        crlab(&["sweep", "--t-min", "0.9", "--t-max", "1.1"])
            .status
            .code(),
        Some(0)
    );
    assert_ne!(
        crlab(&["sweep", "--t-min", "1.1", "--t-max", "1.05"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn grid_export() {
    let o = crlab(&["grid", "--what", "phi", "--resolution", "501"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["b_re", "b_im", "in_D", "phi"]);
    assert_eq!(rows.len(), 501 * 501);

    // Both ends of the sigma-segment sit where membership changes.
    let s3 = 3f64.sqrt();
    let s15 = 15f64.sqrt();
    let step = 1.4 / 500.0;
    for sigma in [-1.0 / (s15 + 3.0), 1.0 / (s15 - 3.0)] {
        let (re, im) = (1.0 - 3.0 * sigma / 8.0, s3 * sigma / 8.0);
        let near: Vec<&Vec<String>> = rows
            .iter()
            .filter(|r| {
                let x: f64 = r[0].parse().unwrap();
                let y: f64 = r[1].parse().unwrap();
                (x - re).abs() <= 1.5 * step && (y - im).abs() <= 1.5 * step
            })
            .collect();
        assert!(near.iter().any(|r| r[2] == "1"), "sigma = {sigma}");
        assert!(near.iter().any(|r| r[2] == "0"), "sigma = {sigma}");
    }

    let again = stdout(&crlab(&["grid", "--what", "phi", "--resolution", "501"]));
    assert_eq!(text, again);

    let d = stdout(&crlab(&["grid", "--what", "D", "--resolution", "101"]));
    assert!(d.starts_with("b_re,b_im,in_D\n"));
}

#[test]
fn grid_rejects_coarse_resolution() {
    assert_eq!(crlab(&["grid", "--resolution", "100"]).status.code(), Some(2));
}

#[test]
fn sample_points_lie_on_the_level() {
    let o = crlab(&["sample", "--t", "1.2", "--samples", "20", "--format", "csv"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    let level = header.iter().position(|h| h == "level").unwrap();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let t: f64 = r[level].parse().unwrap();
        assert!((t - 1.2).abs() < 1e-10);
    }
}
