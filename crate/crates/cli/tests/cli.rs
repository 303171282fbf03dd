//! Exit codes and output schemas of the binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mscale-fno"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn count_prints_published_totals() {
    for (file, total) in [
        ("ex4.1-normal.toml", "1164001"),
        ("ex4.1-mscale.toml", "1035544"),
        ("ex4.2-m200-normal.toml", "4641169"),
        ("ex4.2-m200-mscale.toml", "4127128"),
    ] {
        let o = run(&["count", configs().join(file).to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.lines().next().unwrap().contains(&format!("{total} parameters")), "{text}");
        let sum: usize = text
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().last().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(sum.to_string(), total);
    }
}

#[test]
fn unknown_preset_lists_valid_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--preset", "ex7", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("ex4.1") && err.contains("desk"), "{err}");
}

#[test]
fn missing_files_exit_with_path() {
    let o = run(&["eval", "--checkpoint", "/missing/ck", "--data", "/missing/data"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/missing/ck"), "{}", stderr(&o));
    let o = run(&["count", "/missing/exp.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_config_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.toml");
    fs::write(&p, "[model]\nkind = \"normal-fno\"\nwidth = 4\nmodes = [3]\n").unwrap();
    let o = run(&["count", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn gen_train_eval_spectrum_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let data = dir.join("data");
    let o = run(&[
        "gen", "--preset", "desk", "--seed", "3", "--out", data.to_str().unwrap(),
        "--train", "6", "--val", "2", "--test", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("10 samples on 257 grid points"));

    let cfg = dir.join("exp.toml");
    fs::write(
        &cfg,
        "[model]\nkind = \"mscale-fno\"\nwidth = 3\nmodes = 8\nlayers = 1\nscales = [1.0, 4.0]\n\n\
         [train]\nepochs = 1\nbatch_size = 3\nrecord_time = false\n\n\
         [data]\npath = \"data\"\n\n[output]\ndir = \"run\"\n",
    )
    .unwrap();
    let o = run(&["train", cfg.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = fs::read_to_string(dir.join("run/metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next(), Some("epoch,train_loss,val_err,test_err,seconds"));
    assert_eq!(metrics.lines().count(), 2);

    let per = dir.join("per.csv");
    let summary = dir.join("summary.json");
    let ck = dir.join("run/best");
    let o = run(&[
        "eval", "--checkpoint", ck.to_str().unwrap(), "--data", data.to_str().unwrap(),
        "--split", "val", "--per-sample", per.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let per = fs::read_to_string(per).unwrap();
    assert_eq!(per.lines().next(), Some("sample,rel_err"));
    assert_eq!(per.lines().count(), 3);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(summary).unwrap()).unwrap();
    for key in ["split", "samples", "mean", "median", "max"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }

    let o = run(&[
        "spectrum", "--checkpoint", ck.to_str().unwrap(), "--data", data.to_str().unwrap(),
        "--sample", "1", "--branches",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("mode,target,prediction,branch0,branch1"));
    assert_eq!(csv.lines().count(), 1 + 129);

    let o = run(&[
        "spectrum", "--checkpoint", ck.to_str().unwrap(), "--data", data.to_str().unwrap(),
        "--sample", "99",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
