use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attrib_core::dataio::read_features;
use attrib_core::featurespace::FeatureKind;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_attrib-encode"))
}

fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/toy")
}

/// The toy config pointed at `out`, with absolute input paths and a shorter
/// training run.
fn write_config(dir: &Path, out: &Path, patch: impl FnOnce(&mut Value)) -> PathBuf {
    let text = fs::read_to_string(toy_dir().join("../toy.json")).unwrap();
    let mut cfg: Value = serde_json::from_str(&text).unwrap();
    let toy = toy_dir();
    cfg["paths"] = json!({
        "transcript": toy.join("story.tsv"),
        "output_dir": out,
        "roi_labels": toy.join("rois.tsv"),
        "pos_tags": toy.join("pos.tsv"),
    });
    cfg["model"]["train_steps"] = json!(60);
    patch(&mut cfg);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path, extra_env: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--config").arg(config);
    for (k, v) in extra_env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Every artifact under `root` except run manifests, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            let rel = path.strip_prefix(root).unwrap().to_path_buf();
            if rel.starts_with("manifests") {
                continue;
            }
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn assert_same_artifacts(a: &Path, b: &Path) {
    let (sa, sb) = (snapshot(a), snapshot(b));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (k, v) in &sa {
        assert!(v == &sb[k], "{} differs", k.display());
    }
}

#[test]
fn missing_transcript_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &tmp.path().join("out"), |c| {
        c["paths"]["transcript"] = json!("/nonexistent/story.tsv");
    });
    let out = run(&["train-lm"], &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/story.tsv"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &tmp.path().join("out"), |_| {});
    assert_eq!(bin().arg("no-such-command").output().unwrap().status.code(), Some(2));
    assert_eq!(run(&["train-lm"], &tmp.path().join("absent.json"), &[]).status.code(), Some(2));
    assert_eq!(
        run(&["features", "--kind", "attention", "--method", "erasure"], &cfg, &[]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["features", "--kind", "bogus"], &cfg, &[]).status.code(), Some(2));
    assert_eq!(run(&["train-lm", "--override", "encoder.n_folds=1"], &cfg, &[]).status.code(), Some(2));
    assert_eq!(run(&["train-lm"], &cfg, &[("ATTRIB_ENCODE_WORKERS", "zero")]).status.code(), Some(2));
    // a stage whose inputs were never produced
    assert_eq!(run(&["encode"], &cfg, &[]).status.code(), Some(2));
    assert!(bin().arg("--help").output().unwrap().status.success());
}

#[test]
fn erasure_features_for_a_short_transcript() {
    let tmp = tempfile::tempdir().unwrap();
    let story = tmp.path().join("short.tsv");
    let mut text = String::from("word\tonset_s\toffset_s\n");
    let words = "the cat sat on the mat and the dog ran to the park where the bird sang a song all day";
    for (i, w) in words.split(' ').enumerate() {
        text.push_str(&format!("{w}\t{}\t{}\n", i as f64 * 0.5, i as f64 * 0.5 + 0.4));
    }
    fs::write(&story, text).unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &out_dir, |c| {
        c["paths"]["transcript"] = json!(story);
    });
    ok(&run(&["train-lm"], &cfg, &[]));
    ok(&run(&["features", "--kind", "attribution", "--method", "erasure"], &cfg, &[]));
    let f = read_features(&out_dir.join("features/attribution_erasure.feat")).unwrap();
    assert_eq!((f.n_rows(), f.n_cols()), (1, 10));
    assert_eq!(f.word_indices, vec![10]);
    assert!(matches!(f.kind, FeatureKind::Attribution { .. }));
    assert!(!out_dir.join("features/attention.feat").exists());
}

#[test]
fn override_changes_the_effective_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &out_dir, |_| {});
    ok(&run(&["train-lm", "--override", "model.train_steps=5"], &cfg, &[]));
    let training: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("training.json")).unwrap()).unwrap();
    assert_eq!(training["steps"], json!(5));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifests/train-lm.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["model"]["train_steps"], json!(5));
    assert_eq!(manifest["artifacts"], json!(["model.bin", "training.json"]));
}

#[test]
fn attribution_dump_has_one_row_per_token() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &out_dir, |_| {});
    ok(&run(&["train-lm"], &cfg, &[]));
    let out = run(&["attributions", "--method", "grad_x_input", "--max-windows", "3"], &cfg, &[]);
    ok(&out);
    let path = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("window_index,token_index,word_index,method,score"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let windows: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(windows.len(), 3);
    assert!(rows.iter().all(|r| r[3] == "grad_x_input" && r[4].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn toy_data_writes_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["toy-data", "--out"])
        .arg(tmp.path())
        .args(["--words", "50", "--voxels", "20", "--rois", "2"])
        .output()
        .unwrap();
    ok(&out);
    let story = fs::read_to_string(tmp.path().join("story.tsv")).unwrap();
    assert_eq!(story.lines().count(), 51);
    let pos = attrib_core::dataio::parse_pos_tags(&tmp.path().join("pos.tsv")).unwrap();
    assert_eq!(pos.keys().copied().collect::<Vec<_>>(), (0..50).collect::<Vec<_>>());
    let rois = attrib_core::dataio::parse_roi_labels(&tmp.path().join("rois.tsv")).unwrap();
    assert_eq!(rois.len(), 20);
    assert_eq!(rois[&0], "roi_0");
    assert_eq!(rois[&19], "roi_1");
}

#[test]
fn pipeline_is_deterministic_and_matches_stage_by_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|n| tmp.path().join(n)).collect();
    for (i, out_dir) in runs.iter().enumerate() {
        fs::create_dir_all(out_dir).unwrap();
        let cfg = write_config(out_dir, &out_dir.join("out"), |_| {});
        match i {
            0 => ok(&run(&["pipeline"], &cfg, &[("ATTRIB_ENCODE_WORKERS", "1")])),
            1 => ok(&run(&["pipeline"], &cfg, &[("ATTRIB_ENCODE_WORKERS", "4")])),
            _ => {
                for stage in ["train-lm", "features", "synth", "encode", "ceiling", "stats", "layers"] {
                    ok(&run(&[stage], &cfg, &[]));
                }
            }
        }
    }
    let outs: Vec<PathBuf> = runs.iter().map(|r| r.join("out")).collect();
    assert!(outs[0].join("layers/alignment.json").exists());
    assert!(outs[0].join("stats/friedman.csv").exists());
    assert_same_artifacts(&outs[0], &outs[1]);
    assert_same_artifacts(&outs[0], &outs[2]);
    let manifests: Vec<String> = fs::read_dir(outs[0].join("manifests"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(manifests.len(), 7);
}
