use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn keyframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keyframe"))
        .args(args)
        .env_remove("KEYFRAME_ENDPOINT")
        .output()
        .expect("spawn keyframe")
}

fn gen(dir: &Path, extra: &[&str]) -> String {
    let out = dir.join("corpus");
    let mut args = vec!["gen-corpus", "--out", out.to_str().unwrap(), "--videos", "3"];
    args.extend_from_slice(extra);
    let o = keyframe(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.jsonl").to_str().unwrap().to_string()
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn select_writes_reports_and_clips() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    let out = dir.path().join("out");
    let o = keyframe(&[
        "select",
        "--manifest",
        &manifest,
        "--out",
        out.to_str().unwrap(),
        "--emit-video",
        "--encoder",
        "apng",
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("success_rate: 1.0000"));
    let r = report(&out);
    assert_eq!(r["aggregate"]["jobs"], 3);
    assert_eq!(r["per_job"][0]["mode"], "qa");
    assert!(out.join("vid0000#0/keyframes.apng").is_file());
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn unsupported_selector_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    let o = keyframe(&[
        "select",
        "--manifest",
        &manifest,
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--selector",
        "dsnet",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn threshold_miss_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    fs::write(dir.path().join("corpus/videos/vid0001.apng"), b"junk").unwrap();
    let out = dir.path().join("o");
    let args = ["select", "--manifest", &manifest, "--out", out.to_str().unwrap(), "--decoder", "native"];
    assert!(keyframe(&args).status.success());
    let mut strict = args.to_vec();
    strict.extend_from_slice(&["--min-success-rate", "0.9"]);
    let o = keyframe(&strict);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("failed vid0001#0"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    let out = dir.path().join("o");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!("manifest = {manifest:?}\nout = {:?}\nselector = \"uniform\"\nk = 4\n", out.to_str().unwrap()),
    )
    .unwrap();
    let o = keyframe(&["select", "--config", cfg.to_str().unwrap(), "--k", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["aggregate"]["k"], 6);
    assert_eq!(r["per_job"][0]["selector"], "uniform");
    assert_eq!(r["per_job"][0]["n_selected"], 6);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "manifest = \"m\"\nout = \"o\"\nbogus = 1\n").unwrap();
    let o = keyframe(&["select", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn remote_without_endpoint_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    let o = keyframe(&[
        "select",
        "--manifest",
        &manifest,
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--provider",
        "remote",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn endpoint_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    // port 9 refuses connections, so the provider fails at connect time
    let o = Command::new(env!("CARGO_BIN_EXE_keyframe"))
        .args([
            "select",
            "--manifest",
            &manifest,
            "--out",
            dir.path().join("o").to_str().unwrap(),
            "--provider",
            "remote",
        ])
        .env("KEYFRAME_ENDPOINT", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("127.0.0.1:9"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_subcommand_rebuilds_reports() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &["--noise", "4"]);
    let out = dir.path().join("o");
    assert!(keyframe(&["select", "--manifest", &manifest, "--out", out.to_str().unwrap()]).status.success());
    let before = report(&out);
    fs::remove_file(out.join("report.json")).unwrap();
    fs::remove_file(out.join("report.csv")).unwrap();
    let o = keyframe(&["report", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let after = report(&out);
    assert_eq!(after["aggregate"]["compression"], before["aggregate"]["compression"]);
    assert_eq!(after["aggregate"]["success_rate"], before["aggregate"]["success_rate"]);
    assert!(out.join("report.csv").is_file());
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen(dir.path(), &[]);
    let out = dir.path().join("b");
    let o = keyframe(&[
        "bench",
        "--manifest",
        &manifest,
        "--out",
        out.to_str().unwrap(),
        "--selectors",
        "clip,cluster",
        "--repetitions",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "selector,videos,repetitions,mean_s,p95_s");
    assert!(lines[1].starts_with("clip,3,2,") && lines[2].starts_with("cluster,3,2,"));
}
