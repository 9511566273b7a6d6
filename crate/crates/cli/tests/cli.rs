use std::path::Path;
use std::process::{Command, Output};

fn sandcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandcast"))
        .args(args)
        .current_dir(dir)
        .env("SANDCAST_LOG", dir.join("run.log"))
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = sandcast(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL: &[&str] = &["--inlines", "14", "--xlines", "14", "--n-wells", "4"];

fn synth(dir: &Path, out: &str) {
    let mut args = vec!["synth", "--seed", "42", "--out", out];
    args.extend_from_slice(SMALL);
    ok(dir, &args);
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn synth_writes_every_input_file() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "data");
    for f in [
        "well_logs.csv",
        "checkshots.csv",
        "locations.csv",
        "tops.csv",
        "attributes.csv",
        "horizons.csv",
        "ground_truth.csv",
        "manifest.txt",
    ] {
        assert!(tmp.path().join("data").join(f).is_file(), "{f}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sandcast(tmp.path(), &["synth", "--seed", "1", "--out", "d", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = sandcast(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let out = sandcast(tmp.path(), &["filter", "--input", "missing.csv", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));

    let out = sandcast(tmp.path(), &["selftest", "--only", "42"]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(sandcast(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "data");
    let out = sandcast(
        tmp.path(),
        &["train", "--data", "data", "--blind", "W99", "--hidden", "2", "--max-epoch", "5", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("W99"));

    let out = sandcast(tmp.path(), &["filter", "--input", "data/ground_truth.csv", "--window", "4", "--out", "f.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = sandcast(
        tmp.path(),
        &["section", "--input", "data/ground_truth.csv", "--inline", "999", "--out", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(2));

    let log = std::fs::read_to_string(tmp.path().join("run.log")).unwrap();
    let last: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
    assert_eq!(last["exit_code"], 2);
    assert_eq!(last["command"], "section");
}

#[test]
fn pipeline_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, "a");
    synth(d, "b");
    assert_eq!(read(d, "a/manifest.txt"), read(d, "b/manifest.txt"));

    ok(d, &["ingest", "--data", "a"]);
    assert!(d.join("a/wells_integrated.csv").is_file());
    for (data, model) in [("a", "m1.json"), ("b", "m2.json")] {
        ok(
            d,
            &["train", "--data", data, "--blind", "W2", "--hidden", "2,3,2", "--max-epoch", "30", "--seed", "7", "--out", model],
        );
    }
    assert_eq!(read(d, "m1.json"), read(d, "m2.json"));
    assert!(d.join("m1.json.meta.json").is_file());

    for (model, out) in [("m1.json", "v1.csv"), ("m2.json", "v2.csv")] {
        ok(d, &["volume-predict", "--model", model, "--data", "a", "--out", out]);
    }
    assert_eq!(read(d, "v1.csv"), read(d, "v2.csv"));
    ok(d, &["--threads", "1", "volume-predict", "--model", "m1.json", "--data", "a", "--out", "v3.csv"]);
    assert_eq!(read(d, "v1.csv"), read(d, "v3.csv"));

    ok(d, &["filter", "--input", "v1.csv", "--out", "f1.csv"]);
    ok(d, &["filter", "--input", "v1.csv", "--window", "3", "--out", "f2.csv"]);
    assert_eq!(read(d, "f1.csv"), read(d, "f2.csv"));

    ok(d, &["section", "--input", "f1.csv", "--inline", "105", "--format", "pgm", "--out", "s.pgm"]);
    assert!(read(d, "s.pgm").starts_with(b"P2\n"));
    assert!(d.join("s.pgm.meta.txt").is_file());

    let log = std::fs::read_to_string(d.join("run.log")).unwrap();
    let entries: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let train = entries.iter().find(|e| e["command"] == "train").unwrap();
    assert_eq!(train["seed"], 7);
    assert!(train["inputs"]["a/wells_integrated.csv"].is_string());
    assert!(train["metrics"]["Z1"]["final_rmse"].is_number());
}

#[test]
fn blind_test_reports_every_scope() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, "data");
    ok(
        d,
        &["train", "--data", "data", "--blind", "W3", "--hidden", "2", "--max-epoch", "20", "--seed", "3", "--out", "m.json"],
    );
    let out = ok(d, &["blind-test", "--data", "data", "--model", "m.json", "--max-epoch", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let scopes: Vec<&str> = text.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scopes, ["scope", "Z1", "Z2", "Z3", "average", "weighted_average", "single_ann"]);

    ok(
        d,
        &["train-single", "--data", "data", "--blind", "W3", "--match-capacity", "m.json", "--max-epoch", "20", "--out", "s.json"],
    );
    let single: serde_json::Value = serde_json::from_slice(&read(d, "s.json")).unwrap();
    assert_eq!(single["hidden"], 6);
    ok(d, &["compare", "--data", "data", "--model", "m.json", "--single", "s.json", "--out", "r.csv"]);
    assert_eq!(String::from_utf8(read(d, "r.csv")).unwrap().lines().count(), 7);

    ok(
        d,
        &["train-single", "--data", "data", "--blind", "W1", "--hidden", "3", "--max-epoch", "5", "--out", "other.json"],
    );
    let out = sandcast(d, &["compare", "--data", "data", "--model", "m.json", "--single", "other.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_runs_selected_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["selftest", "--only", "5,6,8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
