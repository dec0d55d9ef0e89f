use std::f64::consts::{E, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use convexpos::asymptotics::{exact_reference, ExactShape};
use convexpos::geom::regular_polygon;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexpos"))
        .args(args)
        .env_remove("CONVEXPOS_SEED")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_polygon(dir: &tempfile::TempDir, name: &str, poly: &convexpos::Polygon) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, poly.to_json_string()).unwrap();
    path
}

/// Parses a CSV table into header and rows of raw fields.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn analyze_square() {
    let text = ok_stdout(&["analyze", path_str(&data("square.json"))]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((v["dom"]["ap_star"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["dom"]["m"].as_u64(), Some(4));
    let c = v["model"]["c_k"].as_f64().unwrap();
    assert!((c - 1.0 / (32.0 * PI * PI)).abs() < 1e-12);
    assert_eq!(v["table"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_truncated_square() {
    let text = ok_stdout(&["analyze", path_str(&data("truncated-square.json"))]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let kt: Vec<[f64; 2]> = serde_json::from_value(v["dom"]["k_t_vertices"].clone()).unwrap();
    assert_eq!(kt.len(), 4);
    for corner in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
        let hit = kt
            .iter()
            .any(|p| (p[0] - corner[0]).abs() < 1e-9 && (p[1] - corner[1]).abs() < 1e-9);
        assert!(hit, "corner {corner:?} missing from {kt:?}");
    }
    assert_eq!(v["dom"]["tangency_set"].as_array().unwrap().len(), 4);
    assert!((v["dom"]["ap_star"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn analyze_nonconvex_exits_2() {
    let out = run(&["analyze", path_str(&data("nonconvex.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonConvex"));
}

#[test]
fn analyze_missing_file_exits_2() {
    let out = run(&["analyze", "/nonexistent/polygon.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_polygon(&dir, "p25.json", &regular_polygon(25, 1.0));
    let out = run(&["analyze", path_str(&path)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TooManySides"));
}

#[test]
fn analyze_writes_files_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let svg = dir.path().join("fig.svg");
    let stdout = ok_stdout(&[
        "analyze",
        path_str(&data("truncated-square.json")),
        "--out",
        path_str(&report),
        "--svg",
        path_str(&svg),
        "--n",
        "10,50",
    ]);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    // Every float survives a text round trip bit for bit.
    let again: Value = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, again);
    assert_eq!(parsed["table"][1]["n"].as_u64(), Some(50));

    let figure = std::fs::read_to_string(&svg).unwrap();
    assert!(figure.contains("<svg") && figure.contains("version=\"1.1\""));
    assert_eq!(figure.matches(" Q ").count(), 4);
    assert!(figure.contains("stroke-dasharray"));
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let a = ok_stdout(&["analyze", path_str(&data("truncated-square.json"))]);
    let b = ok_stdout(&["analyze", path_str(&data("truncated-square.json"))]);
    assert_eq!(a, b);
}

#[test]
fn asymptotic_square_proxy_increases_to_limit() {
    let text = ok_stdout(&["asymptotic", path_str(&data("square.json")), "--n", "100,200,400"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["n", "log_p_asymptotic", "proxy"]);
    let proxy: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let limit = 16.0 * E * E;
    assert!(proxy.windows(2).all(|w| w[0] < w[1]), "{proxy:?}");
    assert!(proxy.iter().all(|&p| p < limit));
}

#[test]
fn asymptotic_triangle_near_limit() {
    let text = ok_stdout(&["asymptotic", path_str(&data("triangle.json")), "--n", "400"]);
    let (_, rows) = csv_rows(&text);
    let proxy: f64 = rows[0][2].parse().unwrap();
    let limit = 27.0 * E * E / 2.0;
    assert!((proxy / limit - 1.0).abs() < 0.05, "{proxy} vs {limit}");
}

#[test]
fn asymptotic_pentagon_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_polygon(&dir, "pentagon.json", &regular_polygon(5, 1.0));
    let text = ok_stdout(&["asymptotic", path_str(&path), "--n", "10,100,1000"]);
    let (_, rows) = csv_rows(&text);
    let pinned = [
        (-8.248909241512699, 43.82827959257498),
        (-452.5564875198221, 108.28595903237739),
        (-8988.47727309983, 124.8400458739476),
    ];
    for (row, (log_p, proxy)) in rows.iter().zip(pinned) {
        let got_log: f64 = row[1].parse().unwrap();
        let got_proxy: f64 = row[2].parse().unwrap();
        assert!(got_log.is_finite() && got_proxy.is_finite());
        assert!((got_log / log_p - 1.0).abs() < 1e-9, "{got_log} vs {log_p}");
        assert!((got_proxy / proxy - 1.0).abs() < 1e-9, "{got_proxy} vs {proxy}");
    }
}

#[test]
fn asymptotic_rejects_small_n() {
    let out = run(&["asymptotic", path_str(&data("square.json")), "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn montecarlo_reproducible_and_worker_independent() {
    let square = data("square.json");
    let base = [
        "montecarlo",
        path_str(&square),
        "--n",
        "4",
        "--trials",
        "200000",
        "--seed",
        "7",
    ];
    let one = ok_stdout(&[&base[..], &["--workers", "1"]].concat());
    let eight = ok_stdout(&[&base[..], &["--workers", "8"]].concat());
    let again = ok_stdout(&[&base[..], &["--workers", "1"]].concat());
    assert_eq!(one, eight);
    assert_eq!(one, again);
    let (header, rows) = csv_rows(&one);
    assert_eq!(
        header,
        ["estimator", "polygon_hash", "n", "trials", "successes", "p_hat", "ci_low", "ci_high", "seed"]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "convex_position");
    assert_eq!(rows[0][8], "7");
}

#[test]
fn montecarlo_seed_from_environment() {
    let square = data("square.json");
    let args = ["montecarlo", path_str(&square), "--n", "5", "--trials", "20000"];
    let from_env = Command::new(env!("CARGO_BIN_EXE_convexpos"))
        .args(args)
        .env("CONVEXPOS_SEED", "11")
        .output()
        .unwrap();
    let explicit = ok_stdout(&[&args[..], &["--seed", "11"]].concat());
    assert_eq!(String::from_utf8(from_env.stdout).unwrap(), explicit);
}

#[test]
fn montecarlo_triangle_near_two_thirds() {
    let text = ok_stdout(&[
        "montecarlo",
        path_str(&data("triangle.json")),
        "--n",
        "4",
        "--trials",
        "200000",
        "--seed",
        "3",
    ]);
    let (_, rows) = csv_rows(&text);
    let p: f64 = rows[0][5].parse().unwrap();
    assert!((p - 2.0 / 3.0).abs() < 0.005, "{p}");
}

#[test]
fn montecarlo_full_sided_and_bipointed() {
    let text = ok_stdout(&[
        "montecarlo",
        path_str(&data("square.json")),
        "--n",
        "5",
        "--trials",
        "20000",
        "--estimator",
        "full-sided",
    ]);
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "convex_position");
    assert_eq!(rows[1][0], "full_sided");
    // Every convex tuple in a square is full-sided.
    assert_eq!(rows[0][4], rows[1][4]);

    let text = ok_stdout(&["montecarlo", "--n", "2", "--trials", "100000", "--estimator", "bipointed"]);
    let (_, rows) = csv_rows(&text);
    let p: f64 = rows[0][5].parse().unwrap();
    assert!((p - 1.0 / 3.0).abs() < 0.01, "{p}");
}

#[test]
fn montecarlo_needs_polygon() {
    let out = run(&["montecarlo", "--n", "4", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_values() {
    assert_eq!(ok_stdout(&["exact", "--shape", "square", "--n", "4"]).trim(), "25/36");
    assert_eq!(ok_stdout(&["exact", "--shape", "bipointed", "--n", "2"]).trim(), "1/3");
    let log: f64 = ok_stdout(&["exact", "--shape", "triangle", "--n", "100"])
        .trim()
        .parse()
        .unwrap();
    let reference = exact_reference(ExactShape::Triangle, 100).unwrap().log;
    assert!((log / reference - 1.0).abs() < 1e-12);
    let forced: f64 = ok_stdout(&["exact", "--shape", "square", "--n", "4", "--log"])
        .trim()
        .parse()
        .unwrap();
    assert!((forced - (25.0f64 / 36.0).ln()).abs() < 1e-14);
}

#[test]
fn pcp_square_example() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("pcp.svg");
    let text = ok_stdout(&[
        "pcp",
        path_str(&data("square.json")),
        path_str(&data("pcp3.csv")),
        "--svg",
        path_str(&svg),
    ]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let c: Vec<f64> = serde_json::from_value(v["c"].clone()).unwrap();
    assert!(c.iter().all(|x| (x - 0.7).abs() < 1e-12), "{c:?}");
    let s: Vec<usize> = serde_json::from_value(v["s"].clone()).unwrap();
    assert_eq!(s, [1, 1, 1, 0]);
    assert!(v.get("note").is_none());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<circle"));
}

#[test]
fn pcp_nonconvex_points_omit_s() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "0.1,0.1\n0.9,0.1\n0.5,0.9\n0.5,0.4\n").unwrap();
    let text = ok_stdout(&["pcp", path_str(&data("square.json")), path_str(&pts)]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["s"].is_null());
    assert!(v["note"].is_string());
    assert_eq!(v["ell"].as_array().unwrap().len(), 4);
}

#[test]
fn pcp_empty_points_exits_2() {
    let out = run(&["pcp", path_str(&data("square.json")), path_str(&data("empty.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EmptyInput"));
}

#[test]
fn pcp_point_outside_names_index() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "0.5,0.5\n1.5,0.5\n").unwrap();
    let out = run(&["pcp", path_str(&data("square.json")), path_str(&pts)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("PointOutsidePolygon") && msg.contains("point 1"), "{msg}");
}
