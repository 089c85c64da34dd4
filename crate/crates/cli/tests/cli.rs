use std::path::Path;
use std::process::{Command, Output};

fn seld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seld")).args(args).output().unwrap()
}

fn synth(dir: &Path, format: &str) {
    let cfg = dir.join("synth.cfg");
    std::fs::write(&cfg, "clips=4\nclip_seconds=2\nsplit=0.5,0.25,0.25\n").unwrap();
    let out = seld(&[
        "synth-data", "--seed", "2", "--format", format, "--config", cfg.to_str().unwrap(), "--out-dir",
        dir.join("data").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "clips=4\nlearning_rate=0.1\n").unwrap();
    let out = seld(&["synth-data", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));
}

#[test]
fn missing_out_dir_is_a_validation_error() {
    assert_eq!(seld(&["synth-data"]).status.code(), Some(1));
}

#[test]
fn train_evaluate_infer_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "mic");
    let data = tmp.path().join("data");
    let run = tmp.path().join("run");
    let cfg = tmp.path().join("train.cfg");
    std::fs::write(&cfg, "epochs=2\n").unwrap();
    let out = seld(&[
        "train", "--data-dir", data.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out-dir",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loss = std::fs::read_to_string(run.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 1 + 2 * 2);
    assert!(run.join("model.ckpt").exists() && run.join("last/model.ckpt").exists());

    let out = seld(&[
        "evaluate", "--checkpoint", run.to_str().unwrap(), "--data-dir", data.to_str().unwrap(), "--out-dir",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run.join("eval_test.csv").exists());

    let wav = data.join("clip0000.wav");
    let out = seld(&[
        "infer", "--checkpoint", run.to_str().unwrap(), "--input", wav.to_str().unwrap(), "--out-dir",
        tmp.path().join("pred").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pred = std::fs::read_to_string(tmp.path().join("pred/clip0000_pred.csv")).unwrap();
    assert!(pred.starts_with("clip_id,frame_idx,class_idx,x,y,z"));

    // a FOA request against the MIC checkpoint is rejected
    let out = seld(&[
        "infer", "--format", "foa", "--checkpoint", run.to_str().unwrap(), "--input", wav.to_str().unwrap(),
        "--out-dir", tmp.path().join("pred2").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diverging_training_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "foa");
    let cfg = tmp.path().join("train.cfg");
    std::fs::write(&cfg, "epochs=5\nwarmup_epochs=0\nlr_init=1e200\n").unwrap();
    let out = seld(&[
        "train", "--data-dir", tmp.path().join("data").to_str().unwrap(), "--config", cfg.to_str().unwrap(),
        "--out-dir", tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn featurize_reports_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "foa");
    let out = seld(&[
        "featurize", "--data-dir", tmp.path().join("data").to_str().unwrap(), "--out-dir",
        tmp.path().join("feat").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("clip0000: 100x64x7"));
}
