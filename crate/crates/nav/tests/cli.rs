use std::path::Path;
use std::process::{Command, Output};

fn nav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crater-nav"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const CONFIG: &str = "\
seed = 1
[mission]
duration_days = 0.4
[synth]
count = 40000
seed = 2
";

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), CONFIG).unwrap();

    ok(nav(d, &["gen-catalogue", "--config", "run.toml", "--out", "cat.csv"]));
    assert!(std::fs::read_to_string(d.join("cat.csv")).unwrap().starts_with("id,lat_deg,lon_deg,diameter_m"));

    let msg = ok(nav(d, &["simulate", "--config", "run.toml", "--out", "frames.csv", "--detections", "det.json"]));
    assert!(msg.contains("frames.csv"));

    // --seed is mandatory for run-core
    assert!(!nav(d, &["run-core", "--config", "run.toml", "--frames", "frames.csv"]).status.success());

    let args = ["run-core", "--config", "run.toml", "--catalogue", "cat.csv", "--frames", "frames.csv", "--seed", "9"];
    ok(nav(d, &args));
    ok(nav(d, &args));
    let hashes: Vec<_> = std::fs::read_dir(d.join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(hashes.len(), 1);
    let (r1, r2) = (hashes[0].join("001"), hashes[0].join("002"));
    let reports = std::fs::read(r1.join("reports.csv")).unwrap();
    assert_eq!(reports, std::fs::read(r2.join("reports.csv")).unwrap());
    for f in ["config.toml", "timings.csv", "summary.json", "solar_angle_bins.csv", "off_nadir_bins.csv"] {
        assert!(r1.join(f).is_file(), "{f}");
    }

    let rep = r1.join("reports.csv");
    let rep = rep.to_str().unwrap();
    ok(nav(d, &["run-od", "--reports", rep, "--out", "refined.csv"]));
    let refined = std::fs::read_to_string(d.join("refined.csv")).unwrap();
    let report_rows = String::from_utf8(reports).unwrap().lines().count();
    assert_eq!(refined.lines().count(), report_rows);
    assert!(refined.starts_with("t_s,x_m,y_m,z_m"));

    ok(nav(d, &["report", "--reports", rep, "--refined", "refined.csv", "--out", "summary"]));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("summary/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 9);
    assert_eq!(summary["summary"]["frames"], report_rows - 1);
    assert!(summary["summary"]["od_position_error"]["rms"].is_number());
    let bins = std::fs::read_to_string(d.join("summary/solar_angle_bins.csv")).unwrap();
    assert_eq!(bins.lines().count(), 10);

    // external detections get their own run directory
    ok(nav(d, &[&args[..], &["--detections", "det.json"]].concat()));
    assert_eq!(std::fs::read_dir(d.join("runs")).unwrap().count(), 2);
}

#[test]
fn bad_catalogue_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cat.csv"), "id,lat_deg,lon_deg,diameter_m\nA,0,0,1000\nB,95,0,1000\n").unwrap();
    std::fs::write(d.join("run.toml"), CONFIG).unwrap();
    ok(nav(d, &["simulate", "--config", "run.toml", "--out", "frames.csv"]));
    let out = nav(d, &["run-core", "--frames", "frames.csv", "--catalogue", "cat.csv", "--seed", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
