use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attention-crop"))
        .args(args)
        .output()
        .unwrap()
}

fn write_blob(path: &Path) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    image::RgbImage::from_fn(64, 48, |x, y| {
        if (20..36).contains(&x) && (12..24).contains(&y) {
            image::Rgb([240, 30, 30])
        } else {
            image::Rgb([30, 90, 40])
        }
    })
    .save(path)
    .unwrap();
}

fn manifest_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn augment_with_fraction_lambda_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let out = dir.path().join("out");
    write_blob(&input.join("tulip/a.png"));

    let o = run(&[
        "--input", input.to_str().unwrap(),
        "--output", out.to_str().unwrap(),
        "--mode", "augment",
        "--lambda", "2/3",
        "--target-size", "32x24",
        "--workers", "2",
        "--seed", "9",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 processed"));

    let records = manifest_lines(&out.join("manifest.jsonl"));
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["label"], "tulip");
    assert_eq!(records[0]["th"], 2.0);
    assert_eq!(records[0]["target_size"], serde_json::json!([32, 24]));
    let crop = image::open(out.join("tulip/a.ac.png")).unwrap();
    assert_eq!((crop.width(), crop.height()), (32, 24));
    assert!(out.join("tulip/a.orig.png").exists());
}

#[test]
fn per_image_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    write_blob(&input.join("ok.png"));
    fs::write(input.join("bad.jpg"), b"nope").unwrap();
    let manifest = dir.path().join("m/records.jsonl");

    let o = run(&[
        "--input", input.to_str().unwrap(),
        "--output", dir.path().join("out").to_str().unwrap(),
        "--manifest", manifest.to_str().unwrap(),
        "--no-labels",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.jpg"));
    let records = manifest_lines(&manifest);
    assert_eq!(records.len(), 1);
    assert!(records[0]["label"].is_null());
}

#[test]
fn fatal_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let o = run(&["--input", missing.to_str().unwrap(), "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    let o = run(&[
        "--input", input.to_str().unwrap(),
        "--output", dir.path().join("out").to_str().unwrap(),
        "--lambda", "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_arguments_are_rejected() {
    for args in [
        &["--input", "a", "--output", "b", "--target-size", "32"][..],
        &["--input", "a", "--output", "b", "--lambda", "1/0"],
        &["--input", "a", "--output", "b", "--mode", "zoom"],
    ] {
        let o = run(args);
        assert!(!o.status.success());
        assert_ne!(o.status.code(), Some(0));
    }
}
