use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn draggn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_draggn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_corpus_is_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (
        dir.path().join("a.jsonl"),
        dir.path().join("b.jsonl"),
        dir.path().join("c.jsonl"),
    );
    assert!(draggn(&["gen-corpus", "--seed", "4", "--out", path(&a)])
        .status
        .success());
    assert!(draggn(&["gen-corpus", "--seed", "4", "--out", path(&b)])
        .status
        .success());
    assert!(draggn(&["gen-corpus", "--seed", "5", "--out", path(&c)])
        .status
        .success());
    let (a, b, c) = (
        std::fs::read(a).unwrap(),
        std::fs::read(b).unwrap(),
        std::fs::read(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.iter().filter(|&&x| x == b'\n').count(), 3734);
}

#[test]
fn holdout_that_removes_a_unit_is_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    let holdout: Vec<String> = (1..=5)
        .map(|n| format!(r#"{{"unit":"goUp","arg":"{n}"}}"#))
        .collect();
    std::fs::write(&spec, format!(r#"{{"holdout":[{}]}}"#, holdout.join(","))).unwrap();
    let out = draggn(&[
        "gen-corpus",
        "--spec",
        path(&spec),
        "--split",
        "unseen",
        "--out",
        path(&dir.path().join("x")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.path().join("x").exists());
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(draggn(&["train", "--model", "lstm"]).status.code(), Some(1));
    assert_eq!(draggn(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        draggn(&["ground", "--model", "/nonexistent.ckpt", "go up"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(draggn(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_eval_ground_and_exec_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = path(dir.path());
    let small = [
        "--model",
        "j-draggn",
        "--seeds",
        "0",
        "--epochs",
        "2",
        "--embedding",
        "8",
        "--hidden",
        "8",
        "--ff-hidden",
        "8",
        "--out-dir",
        out,
    ];
    let train = draggn(&[&["train"][..], &small].concat());
    assert!(
        train.status.success(),
        "{}",
        String::from_utf8_lossy(&train.stderr)
    );
    let ckpt = dir.path().join("j-draggn-seed0.ckpt");
    assert!(ckpt.exists());
    assert!(dir.path().join("manifest-train.json").exists());

    let eval = draggn(&[&["eval"][..], &small].concat());
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    let table = String::from_utf8(eval.stdout).unwrap();
    assert!(table.contains("j-draggn"), "{table}");
    assert!(dir.path().join("report.json").exists());

    let ground = draggn(&["ground", "--model", path(&ckpt), "go up two steps"]);
    assert!(
        ground.status.success(),
        "{}",
        String::from_utf8_lossy(&ground.stderr)
    );
    let text = String::from_utf8(ground.stdout).unwrap();
    assert!(text.starts_with("pair: ") && text.contains("task: "), "{text}");

    let exec = draggn(&[
        "exec",
        "--model",
        path(&ckpt),
        "--agent",
        "4,1",
        "go right three spaces",
    ]);
    assert!(exec.status.success(), "{}", String::from_utf8_lossy(&exec.stderr));
    assert!(String::from_utf8(exec.stdout).unwrap().contains("agent (4,1)"));

    let bad_start = draggn(&["exec", "--model", path(&ckpt), "--agent", "0,0", "go up"]);
    assert_eq!(bad_start.status.code(), Some(1));
}
