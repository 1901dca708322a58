use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use avbench_core::detection::DetectionMetrics;
use avbench_core::io::parse_json;
use avbench_core::tracking::TrackingMetrics;

fn avbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avbench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, spec: &str) -> PathBuf {
    fs::write(dir.join("spec.json"), spec).unwrap();
    let out = avbench(&["synth", "spec.json", "data"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("data")
}

const PERFECT: &str = r#"{"scenario": {"n_scenes": 2, "n_frames_per_scene": 8, "n_objects": 12, "sweeps_per_keyframe": 2, "seed": 4}}"#;

#[test]
fn self_evaluation_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let out = avbench(&["eval-detection", "data/gt.json", "data/detections.json", "--output", "det.json"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("NDS:  1.0000"), "{stdout}");
    let m: DetectionMetrics = parse_json(&fs::read_to_string(dir.path().join("det.json")).unwrap()).unwrap();
    assert_eq!(m.nds, 1.0);

    let out = avbench(&["eval-tracking", "data/gt.json", "data/tracks.json", "--output", "trk.json"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("AMOTA: 1.0000"));
    let m: TrackingMetrics = parse_json(&fs::read_to_string(dir.path().join("trk.json")).unwrap()).unwrap();
    assert_eq!((m.amota, m.ids), (1.0, 0));
}

#[test]
fn default_output_names() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    assert!(avbench(&["eval-detection", "data/gt.json", "data/detections.json"], dir.path()).status.success());
    assert!(avbench(&["eval-tracking", "data/gt.json", "data/tracks.json"], dir.path()).status.success());
    assert!(avbench(&["compare-matchers", "data/gt.json", "data/detections.json"], dir.path()).status.success());
    for name in ["detection_metrics.json", "tracking_metrics.json", "matching_study.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn malformed_submission_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let text = fs::read_to_string(dir.path().join("data/detections.json")).unwrap();
    let broken = text.replacen("\"detection_score\"", "\"score\"", 1);
    fs::write(dir.path().join("broken.json"), broken).unwrap();
    let out = avbench(&["eval-detection", "data/gt.json", "broken.json", "--output", "res.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("results["));
    assert!(!dir.path().join("res.json").exists());
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 3, "{leftovers:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let missing = avbench(&["eval-detection", "data/gt.json", "nope.json"], dir.path());
    assert_eq!(missing.status.code(), Some(3));
    let wrong_task = avbench(&["eval-tracking", "data/gt.json", "data/detections.json"], dir.path());
    assert_eq!(wrong_task.status.code(), Some(2));
    fs::write(dir.path().join("cfg.json"), r#"{"min_recall": 2.0}"#).unwrap();
    let bad_config = avbench(&["eval-detection", "data/gt.json", "data/detections.json", "--config", "cfg.json"], dir.path());
    assert_eq!(bad_config.status.code(), Some(2));
    let bad_class = avbench(&["eval-detection", "data/gt.json", "data/detections.json", "--categories", "car,ufo"], dir.path());
    assert_eq!(bad_class.status.code(), Some(2));
    let unwritable = avbench(&["eval-detection", "data/gt.json", "data/detections.json", "--output", "no/such/dir/x.json"], dir.path());
    assert_eq!(unwritable.status.code(), Some(3));
}

#[test]
fn bad_thread_setting_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let out = Command::new(env!("CARGO_BIN_EXE_avbench"))
        .args(["eval-detection", "data/gt.json", "data/detections.json"])
        .env("AVBENCH_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_matchers_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    synth(
        dir.path(),
        r#"{"scenario": {"n_scenes": 2, "n_frames_per_scene": 8, "n_objects": 30, "sweeps_per_keyframe": 1, "seed": 9},
            "detection_noise": {"sigma_translation": 0.3}}"#,
    );
    let out = avbench(
        &["compare-matchers", "data/gt.json", "data/detections.json", "--output", "study.csv", "--matcher", "iou_bev"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert_eq!(csv, String::from_utf8(out.stdout).unwrap());
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    let classes: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    // |C| x (|D| + 1)
    assert_eq!(rows.len(), classes.len() * 5);
    assert_eq!(rows.iter().filter(|r| r.contains(",iou_bev,")).count(), classes.len());
}

fn write_mask(dir: &Path, name: &str, cell: char) {
    let row = format!("\"{}\"", cell.to_string().repeat(200));
    let mask = format!(
        r#"{{"origin": [-100, -100], "resolution": 1, "width": 200, "height": 200, "rows": [{}]}}"#,
        vec![row; 200].join(",")
    );
    fs::write(dir.join(name), mask).unwrap();
}

#[test]
fn map_mask_flag() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    write_mask(dir.path(), "full.json", '1');
    write_mask(dir.path(), "empty.json", '0');
    let run = |mask: &str| {
        avbench(
            &["eval-detection", "data/gt.json", "data/detections.json", "--map-mask", mask, "--output", "m.json"],
            dir.path(),
        )
    };
    let out = run("full.json");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: DetectionMetrics = parse_json(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(m.nds, 1.0);
    fs::remove_file(dir.path().join("m.json")).unwrap();
    // nothing is on the map, so no class keeps any ground truth
    let out = run("empty.json");
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("m.json").exists());
}
