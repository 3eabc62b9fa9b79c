use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optiplace::{certify, DVector, Placement, SensorKind, SensorSpec};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optiplace"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn bearings(report: &Value) -> Vec<Vec<f64>> {
    report["sensors"].as_array().unwrap().iter().map(|s| vec_of(&s["bearing"])).collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn planar_six_reproduces_printed_bearings() {
    let out = run(&["construct", p(&scenario("planar_six.scn")), "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["verdict"], true);
    assert_eq!(r["regime"], "regular");
    let expected = [[1.0, 0.0], [0.8563, -0.5165], [0.2155, 0.9765], [0.2155, 0.9765], [0.2155, 0.9765], [0.2155, 0.9765]];
    for (g, e) in bearings(&r).iter().zip(expected) {
        assert!((g[0] - e[0]).abs() < 1e-3 && (g[1] - e[1]).abs() < 1e-3, "{g:?} vs {e:?}");
    }
    let objective = r["objective"].as_f64().unwrap();
    assert!((objective - 0.00795).abs() < 1e-4);
    let diff = objective - r["bound"].as_f64().unwrap() - r["error"].as_f64().unwrap();
    assert!(diff.abs() < 1e-12);
}

#[test]
fn equal_pair_subtends_right_angle() {
    let out = run(&["construct", p(&scenario("bearing_pair.scn")), "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let g = bearings(&json(&out));
    let cos = g[0][0] * g[1][0] + g[0][1] * g[1][1];
    assert!((cos.acos().to_degrees() - 90.0).abs() < 1e-9);
}

#[test]
fn dominant_sensor_is_orthogonal_to_the_rest() {
    let out = run(&["construct", p(&scenario("irregular_3d.scn")), "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["k0"], 1);
    assert_eq!(r["regular"], false);
    let g = bearings(&r);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for other in &g[1..] {
        assert!(dot(&g[0], other).abs() < 1e-9);
    }
    // The weak sensors sit 60° apart (as lines) in the orthogonal plane.
    for i in 1..4 {
        for j in i + 1..4 {
            assert!((dot(&g[i], &g[j]).abs() - 0.5).abs() < 1e-9);
        }
    }
    assert!((r["bound"].as_f64().unwrap() - (1e4 + 4.5)).abs() < 1e-9);
}

#[test]
fn report_is_written_in_both_forms() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["construct", p(&scenario("planar_six.scn")), "--report", p(&report)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict          optimal"));
    assert!(text.contains("0.856276219842"));
    let r: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["sensors"].as_array().unwrap().len(), 6);
}

#[test]
fn octahedron_checks() {
    let out = run(&["check", p(&scenario("octahedron.scn"))]);
    assert_eq!(code(&out), 0);

    let dir = TempDir::new().unwrap();
    let (s, c) = 5f64.to_radians().sin_cos();
    let text = fs::read_to_string(scenario("octahedron.scn"))
        .unwrap()
        .replace("position = 0 0 1\n", &format!("position = 0 {s} {c}\n"));
    let rotated = write(&dir, "rotated.scn", &text);
    let out = run(&["check", p(&rotated), "--format", "structured"]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    let error = r["error"].as_f64().unwrap();
    assert!(error > 0.0);

    // Report numbers are the library's, not reformatted.
    let mut positions: Vec<DVector<f64>> = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
        .iter()
        .map(|x| DVector::from_row_slice(x))
        .collect();
    positions.push(DVector::from_vec(vec![0.0, s, c]));
    positions.push(DVector::from_vec(vec![0.0, 0.0, -1.0]));
    let pl = Placement::from_sensor_positions(DVector::zeros(3), &positions).unwrap();
    let specs = SensorSpec::for_placement(SensorKind::RangeOnly, &[1.0; 6], &pl).unwrap();
    let cert = certify(&pl, &specs, 1e-6).unwrap();
    assert_eq!(error, cert.error);
    assert_eq!(r["objective"].as_f64().unwrap(), cert.objective);

    let text = fs::read_to_string(scenario("octahedron.scn")).unwrap().replace("position = 0 0 1\n", "position = 0 0 0\n");
    let out = run(&["check", p(&write(&dir, "coincident.scn", &text))]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

fn last_error(csv: &str) -> f64 {
    csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn tetrahedron_flow_converges() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&["simulate", p(&scenario("tetrahedron_flow.scn")), "-o", p(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged-optimal"));
    let csv = fs::read_to_string(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,sensor,x,y,z,V,optimality_error");
    assert!(csv.lines().count() - 1 <= 10_000);
    assert!(last_error(&csv) < 1e-6);
}

#[test]
fn altitude_scenario_converges() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("u.csv");
    let out = run(&["simulate", p(&scenario("uav_ugv.scn")), "-o", p(&csv), "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["outcome"], "converged-optimal");
    let csv = fs::read_to_string(csv).unwrap();
    assert!(csv.lines().count() - 1 <= 10_000);
    assert!(last_error(&csv) < 1e-4);
    let z: Vec<f64> = csv
        .lines()
        .rev()
        .take(4)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    for (z, target) in z.iter().rev().zip([10.0, 10.0, 0.0, 0.0]) {
        assert!((z - target).abs() < 1e-3, "altitude {z} vs {target}");
    }
}

#[test]
fn oversized_step_is_rejected() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(scenario("tetrahedron_flow.scn"))
        .unwrap()
        .replace("dt = 0.01\n", "dt = 10\nrenormalize = true\n");
    let out = run(&["simulate", p(&write(&dir, "dt.scn", &text))]);
    assert_eq!(code(&out), 75);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reduce dt"));
}

#[test]
fn irregularity_examples() {
    for (values, k0) in [(["10", "1", "1", "1"], 1), (["10", "10", "1", "1"], 2), (["1", "1", "1", "1"], 0)] {
        let mut args = vec!["irregularity", "--dim", "3", "--format", "structured"];
        args.extend(values);
        let out = run(&args);
        assert_eq!(code(&out), 0);
        let r = json(&out);
        assert_eq!(r["k0"], k0);
        assert_eq!(r["regular"], k0 == 0);
        assert_eq!(r["dominant"].as_array().unwrap().len(), k0);
    }
    assert_eq!(code(&run(&["irregularity", "--dim", "3", "1", "-1", "1"])), 64);
    assert_eq!(code(&run(&["irregularity", "--dim", "2", "1", "0"])), 64);

    let out = run(&["irregularity", "--scenario", p(&scenario("irregular_3d.scn")), "--format", "structured"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["k0"], 1);
}

#[test]
fn parse_errors_carry_position() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.scn", "dimension = 2\n[sensor]\nkind = bearing\nsigma = x\n");
    let out = run(&["construct", p(&bad)]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4, column 9"));

    let out = run(&["check", p(&scenario("planar_six.scn"))]);
    assert_eq!(code(&out), 64);
    assert_eq!(code(&run(&["check", p(&dir.path().join("missing.scn"))])), 74);
}

#[test]
fn forced_method_reports_infeasibility() {
    let dir = TempDir::new().unwrap();
    let text = "dimension = 2\n[sensor]\nkind = range\nsigma = 0.1\n[sensor]\nkind = range\nsigma = 1\nrepeat = 2\n\
                [construction]\nmethod = 2d\n";
    let out = run(&["construct", p(&write(&dir, "inf.scn", text))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

fn round_trip(dir: &TempDir, path: &Path, seed: &str) {
    let positions = dir.path().join("positions.scn");
    let out = run(&["construct", p(path), "-o", p(&positions), "--seed", seed]);
    assert_eq!(code(&out), 0, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    let out = run(&["check", p(&positions)]);
    assert_eq!(code(&out), 0, "{}: {}", path.display(), String::from_utf8_lossy(&out.stdout));
}

#[test]
fn construct_output_round_trips_through_check() {
    let dir = TempDir::new().unwrap();
    for name in ["planar_six.scn", "bearing_pair.scn", "irregular_3d.scn"] {
        round_trip(&dir, &scenario(name), "0");
    }
    // Generic networks in both dimensions, covering every construction path.
    let cases: [(usize, &[f64], &str); 6] = [
        (2, &[3.0, 4.0, 5.0, 6.5, 2.2], "bearing"),
        (3, &[1.0, 1.1, 1.2, 1.3], "range"),
        (3, &[2.0, 2.5, 3.0, 3.5, 4.0], "rss"),
        (3, &[1.0, 1.0, 1.0], "bearing"),
        (3, &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], "bearing"),
        (3, &[0.05, 1.0, 1.0, 1.0, 1.0], "range"),
    ];
    for (k, (d, sigmas, kind)) in cases.iter().enumerate() {
        let mut text = format!("dimension = {d}\n");
        for (i, s) in sigmas.iter().enumerate() {
            let range = if *kind == "range" { String::new() } else { format!("range = {}\n", 1.0 + i as f64) };
            text.push_str(&format!("[sensor]\nkind = {kind}\nsigma = {s}\n{range}"));
        }
        round_trip(&dir, &write(&dir, &format!("case{k}.scn"), &text), "7");
    }
}
