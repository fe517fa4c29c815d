use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use vcount_core::counting::CountReport;
use vcount_core::evaluation::parse_comparison_csv;
use vcount_core::stream::{ingest_bytes, read_tracks, stream_to_bytes};
use vcount_core::{BoundingBox, Detection, Frame, VehicleClass};

fn vcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcount"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = vcount(args);
    assert!(
        out.status.success(),
        "vcount {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["--seed", "7", "--out", s(dir), "simulate", "--preset", "straight_two_lane"];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn simulate_writes_files_and_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    simulate(&a, &[]);
    simulate(&b, &[]);
    for name in [
        "detections.ndjson",
        "gt_detections.ndjson",
        "gt_tracks.ndjson",
        "gt_counts.csv",
        "zones.json",
        "manifest.json",
    ] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let manifest: Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn zero_noise_stream_equals_ground_truth() {
    let tmp = TempDir::new().unwrap();
    simulate(tmp.path(), &["--zero-noise"]);
    assert_eq!(
        fs::read(tmp.path().join("detections.ndjson")).unwrap(),
        fs::read(tmp.path().join("gt_detections.ndjson")).unwrap()
    );
}

#[test]
fn bad_lane_names_the_lane() {
    let tmp = TempDir::new().unwrap();
    let mut cfg: Value = serde_json::from_str(&ok(&["defaults", "--preset", "straight_two_lane"])).unwrap();
    let lane = cfg["scenario"]["lanes"][0]["name"].as_str().unwrap().to_string();
    cfg["scenario"]["lanes"][0]["path"][0] = json!([5000.0, 100.0]);
    let path = tmp.path().join("sim.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = vcount(&["--config", s(&path), "--out", s(&tmp.path().join("o")), "simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&lane));
}

fn single_object_stream(dir: &Path) -> std::path::PathBuf {
    let frames: Vec<Frame> = (0..10)
        .map(|i| {
            let b = BoundingBox::new(10.0 + i as f64, 10.0, 50.0 + i as f64, 50.0).unwrap();
            Frame::new(i, vec![Detection::new(b, VehicleClass::Car, 0.9).unwrap()])
        })
        .collect();
    let path = dir.join("single.ndjson");
    fs::write(&path, stream_to_bytes(&frames)).unwrap();
    path
}

#[test]
fn iou_tracker_on_single_object_gives_one_track() {
    let tmp = TempDir::new().unwrap();
    let input = single_object_stream(tmp.path());
    let out = tmp.path().join("t");
    let line = ok(&["--out", s(&out), "track", "--input", s(&input), "--tracker", "iou"]);
    let tracks = read_tracks(&fs::read(out.join("tracks.ndjson")).unwrap()[..]).unwrap();
    assert_eq!(tracks.len(), 1);
    assert_eq!(tracks[0].len(), 10);
    let fps: f64 = line
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("fps="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(fps.is_finite() && fps >= 0.0);
    assert!(line.contains("tracks_created=1") && line.contains("frames=10"));
}

#[test]
fn unknown_tracker_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let input = single_object_stream(tmp.path());
    let out = vcount(&["--out", s(&tmp.path().join("t")), "track", "--input", s(&input), "--tracker", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(vcount(&["track", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn tracker_config_file_must_agree_with_flag() {
    let tmp = TempDir::new().unwrap();
    let input = single_object_stream(tmp.path());
    let cfg = tmp.path().join("sort.json");
    fs::write(&cfg, r#"{"kind": "sort", "params": {"max_age": 2}}"#).unwrap();
    let out = tmp.path().join("t");
    ok(&["--config", s(&cfg), "--out", s(&out), "track", "--input", s(&input)]);
    let manifest: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["tracker"]["params"]["max_age"], 2);
    let bad = vcount(&["--config", s(&cfg), "--out", s(&out), "track", "--input", s(&input), "--tracker", "iou"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn counting_ground_truth_tracks_reproduces_ground_truth_counts() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    simulate(&sim, &[]);
    let out = tmp.path().join("c");
    ok(&[
        "--out",
        s(&out),
        "count",
        "--tracks",
        s(&sim.join("gt_tracks.ndjson")),
        "--zones",
        s(&sim.join("zones.json")),
    ]);
    assert_eq!(
        fs::read_to_string(out.join("counts.csv")).unwrap(),
        fs::read_to_string(sim.join("gt_counts.csv")).unwrap()
    );
}

#[test]
fn empty_tracks_count_zero_and_missing_zones_fail() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    simulate(&sim, &[]);
    let empty = tmp.path().join("empty.ndjson");
    fs::write(&empty, "").unwrap();
    let out = tmp.path().join("c");
    ok(&["--out", s(&out), "count", "--tracks", s(&empty), "--zones", s(&sim.join("zones.json"))]);
    let report = CountReport::from_csv(&fs::read_to_string(out.join("counts.csv")).unwrap()).unwrap();
    assert_eq!(report.total(), 0);

    let missing = vcount(&["--out", s(&out), "count", "--tracks", s(&empty), "--zones", "/nonexistent/zones.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("zones.json"));
}

#[test]
fn evaluate_identical_counts_is_one_hundred_percent() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    simulate(&sim, &[]);
    let gt = sim.join("gt_counts.csv");
    let out = tmp.path().join("e");
    let table = ok(&["--out", s(&out), "evaluate", "--auto", s(&gt), "--gt", s(&gt), "--label", "GT and IOU"]);
    let rows = parse_comparison_csv(&fs::read_to_string(out.join("comparison.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].northbound_pct, Some(100.0));
    assert_eq!(rows[0].southbound_pct, Some(100.0));
    assert!(table.contains("GT and IOU | 100.0 | 100.0"));
}

#[test]
fn heatmap_of_stream_against_itself_has_no_errors() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    simulate(&sim, &[]);
    let dets = sim.join("detections.ndjson");
    let out = tmp.path().join("h");
    ok(&["--out", s(&out), "heatmap", "--input", s(&dets), "--gt", s(&dets)]);
    for name in ["fn", "fp"] {
        let csv = fs::read_to_string(out.join(format!("{name}.csv"))).unwrap();
        assert!(csv.split([',', '\n']).filter(|c| !c.is_empty()).all(|c| c.parse::<f64>().unwrap() == 0.0));
        assert!(fs::read_to_string(out.join(format!("{name}.pgm"))).unwrap().starts_with("P2"));
    }
    let tp: f64 = fs::read_to_string(out.join("tp.csv"))
        .unwrap()
        .split([',', '\n'])
        .filter(|c| !c.is_empty())
        .map(|c| c.parse::<f64>().unwrap())
        .sum();
    let frames = ingest_bytes(&fs::read(&dets).unwrap()).unwrap();
    let area: f64 = frames
        .iter()
        .flat_map(|f| &f.detections)
        .map(|d| {
            let w = d.bbox.x_max().min(1280.0) - d.bbox.x_min().max(0.0);
            let h = d.bbox.y_max().min(736.0) - d.bbox.y_min().max(0.0);
            w.max(0.0) * h.max(0.0) / (32.0 * 32.0)
        })
        .sum();
    assert!((tp - area).abs() < 1e-6 * area.max(1.0), "{tp} vs {area}");
}

#[test]
fn matrix_two_streams_by_four_trackers() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    simulate(&sim, &["--zero-noise"]);
    let cfg = tmp.path().join("matrix.json");
    let manifest = json!({
        "zones": s(&sim.join("zones.json")),
        "streams": [
            { "label": "clean", "condition": "Daylight",
              "detections": s(&sim.join("detections.ndjson")), "gt_counts": s(&sim.join("gt_counts.csv")) },
            { "label": "night", "condition": "Night",
              "simulate": { "preset": "night_sparse" } }
        ]
    });
    fs::write(&cfg, manifest.to_string()).unwrap();
    let out = tmp.path().join("m");
    ok(&["--config", s(&cfg), "--out", s(&out), "--jobs", "3", "matrix"]);
    let rows = parse_comparison_csv(&fs::read_to_string(out.join("comparison.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows.iter().filter(|r| r.condition == "Daylight") {
        assert_eq!((r.northbound_pct, r.southbound_pct), (Some(100.0), Some(100.0)), "{}", r.combination);
    }
    assert_eq!(rows[0].combination, "clean and IOU");
    assert!(out.join("runs/00-clean/03-deepsort/counts.csv").exists());
}

#[test]
fn matrix_needs_a_manifest() {
    assert_eq!(vcount(&["matrix"]).status.code(), Some(1));
}

#[test]
fn bench_reports_and_gates() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("b");
    let line = ok(&["--out", s(&out), "bench", "--frames", "2000", "--repeat", "2", "--min-fps", "0"]);
    assert!(line.contains("dets_per_frame=8.00"));
    let m: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(m["measurements"]["best_fps"].as_f64().unwrap() > 0.0);
    let gated = vcount(&["bench", "--frames", "200", "--repeat", "1", "--min-fps", "1e15"]);
    assert_eq!(gated.status.code(), Some(2));
}

#[test]
fn defaults_lists_every_parameter_block() {
    let v: Value = serde_json::from_str(&ok(&["defaults"])).unwrap();
    for key in ["trackers", "kalman", "nms_iou", "count", "match_iou", "heatmap", "noise", "presets", "bench"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["trackers"].as_array().unwrap().len(), 4);
    assert_eq!(vcount(&["defaults", "--preset", "nope"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(vcount(&["--help"]).status.code(), Some(0));
    assert_eq!(vcount(&["--version"]).status.code(), Some(0));
}
