//! End-to-end CLI behavior: artifact layout, config/flag precedence and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn veracity(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veracity"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, expected: i32) {
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stderr: {stderr}"
    );
}

#[test]
fn generate_train_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = veracity(
        &[
            "generate",
            "--observers",
            "3",
            "--videos",
            "4",
            "--min-len",
            "60",
            "--max-len",
            "70",
            "--out",
            "gen",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let csv = dir.path().join("gen/dataset.csv");
    assert!(csv.exists());
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("sample_id,observer_id,video_id,t,left_mm,right_mm,label\n"));

    let out = veracity(
        &[
            "train",
            "--data",
            "gen/dataset.csv",
            "--hidden",
            "4",
            "--epochs",
            "30",
            "--learning-rate",
            "1e-3",
            "--seeds",
            "1000,2000",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    for artifact in ["run/summary.csv", "run/model_1000.ckpt", "run/model_2000.ckpt"] {
        assert!(dir.path().join(artifact).exists(), "{artifact} missing");
    }
    let summary = std::fs::read_to_string(dir.path().join("run/summary.csv")).unwrap();
    assert!(summary.starts_with("seed,accuracy,"));
    assert_eq!(summary.lines().count(), 4, "2 seeds + header + mean");

    let out = veracity(
        &[
            "report",
            "--model",
            "run/model_1000.ckpt",
            "--data",
            "gen/dataset.csv",
            "--out",
            "rep",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Accuracy:"));
    assert!(dir.path().join("rep/report.csv").exists());
}

#[test]
fn gfs_writes_masks_and_history() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &veracity(
            &[
                "generate",
                "--observers",
                "4",
                "--videos",
                "4",
                "--max-len",
                "70",
                "--file",
                "data.csv",
            ],
            dir.path(),
        ),
        0,
    );
    let out = veracity(
        &[
            "gfs",
            "--data",
            "data.csv",
            "--hidden",
            "4",
            "--epochs",
            "20",
            "--seed",
            "1000",
            "--population",
            "5",
            "--tournament-size",
            "3",
            "--generations",
            "2",
            "--fitness-epochs",
            "5",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let mask = std::fs::read_to_string(dir.path().join("run/best_mask_1000.txt")).unwrap();
    assert_eq!(mask.trim().len(), 186);
    assert!(mask.trim().chars().all(|c| c == '0' || c == '1'));
    let history = std::fs::read_to_string(dir.path().join("run/ga_history_1000.csv")).unwrap();
    assert!(history.starts_with("generation,best_fitness,mean_fitness,best_mask_hex\n"));
    assert_eq!(history.lines().count(), 3);

    // The checkpoint records the mask; report accepts it.
    let out = veracity(
        &[
            "report",
            "--model",
            "run/model_1000.ckpt",
            "--data",
            "data.csv",
            "--out",
            "rep",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
}

#[test]
fn config_file_sets_values_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        r#"
scenario = "right-only"
run_seeds = [1000]

[data]
kind = "synthetic"

[data.config]
n_observers = 3
n_videos = 4
length_range = [60, 70]

[train]
epochs = 20
hidden_units = 4
learning_rate = 1e-3
"#,
    )
    .unwrap();
    let out = veracity(
        &["train", "--config", "exp.toml", "--out", "a"],
        dir.path(),
    );
    assert_code(&out, 0);

    // flag overrides the config scenario; both runs succeed and differ
    let out = veracity(
        &[
            "train",
            "--config",
            "exp.toml",
            "--scenario",
            "left-only",
            "--out",
            "b",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let a = std::fs::read_to_string(dir.path().join("a/summary.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/summary.csv")).unwrap();
    assert_ne!(a, b, "scenario flag must change the experiment");
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // unknown scenario value
    let out = veracity(
        &["train", "--synthetic", "--scenario", "sideways"],
        dir.path(),
    );
    assert_code(&out, 1);

    // malformed CSV names the line
    std::fs::write(
        dir.path().join("bad.csv"),
        "sample_id,observer_id,video_id,t,left_mm,right_mm,label\ns1,1,2,0,oops,3.6,genuine\n",
    )
    .unwrap();
    let out = veracity(&["train", "--data", "bad.csv"], dir.path());
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.csv:2"), "stderr: {stderr}");

    // missing file
    let out = veracity(&["report", "--model", "nope.ckpt", "--data", "bad.csv"], dir.path());
    assert_code(&out, 1);

    // clap usage errors are validation errors too
    let out = veracity(&["train", "--no-such-flag"], dir.path());
    assert_code(&out, 1);

    // --help is not an error
    let out = veracity(&["--help"], dir.path());
    assert_code(&out, 0);
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &veracity(
            &[
                "generate",
                "--observers",
                "3",
                "--videos",
                "4",
                "--max-len",
                "70",
                "--noise-sd",
                "0",
                "--blink-rate",
                "0",
                "--file",
                "data.csv",
            ],
            dir.path(),
        ),
        0,
    );
    // An enormous learning rate with huge weight decay drives the loss
    // non-finite within a few epochs.
    let out = veracity(
        &[
            "train",
            "--data",
            "data.csv",
            "--hidden",
            "4",
            "--epochs",
            "2000",
            "--learning-rate",
            "1e155",
            "--weight-decay",
            "1e150",
            "--seed",
            "1000",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("numerical failure"), "stderr: {stderr}");
}
