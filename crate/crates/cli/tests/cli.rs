use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fgrand(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgrand"))
        .current_dir(dir)
        .env_remove("FGRAND_WORKERS")
        .args(args)
        .output()
        .expect("spawn fgrand")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fgrand(dir, args);
    assert!(
        out.status.success(),
        "fgrand {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = fgrand(dir, args);
    assert!(
        !out.status.success(),
        "fgrand {args:?} unexpectedly succeeded"
    );
    String::from_utf8(out.stderr).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn make_code_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let stdout = ok(
        d,
        &[
            "make-code",
            "rlc",
            "128",
            "104",
            "--seed",
            "1",
            "--out",
            "a.json",
        ],
    );
    assert!(
        stdout.contains("n = 128") && stdout.contains("k = 104") && stdout.contains("R = 0.8125")
    );
    ok(
        d,
        &[
            "make-code",
            "rlc",
            "128",
            "104",
            "--seed",
            "1",
            "--out",
            "b.json",
        ],
    );
    assert_eq!(
        fs::read(d.join("a.json")).unwrap(),
        fs::read(d.join("b.json")).unwrap()
    );
    ok(
        d,
        &[
            "make-code",
            "rlc",
            "128",
            "104",
            "--seed",
            "2",
            "--out",
            "c.json",
        ],
    );
    assert_ne!(
        fs::read(d.join("a.json")).unwrap(),
        fs::read(d.join("c.json")).unwrap()
    );

    ok(d, &["make-code", "bch", "127", "113"]);
    assert!(d.join("bch-127-113.json").exists());
    let crc = ok(d, &["make-code", "crc", "128", "104", "--poly", "0xB2B117"]);
    assert!(crc.contains("family = crc"));
}

#[test]
fn make_code_rejects_unsupported_parameters() {
    let dir = TempDir::new().unwrap();
    let err = fails(dir.path(), &["make-code", "bch", "127", "100"]);
    assert!(err.contains("127,100"), "{err}");
    fails(dir.path(), &["make-code", "turbo", "128", "104"]);
    fails(
        dir.path(),
        &["make-code", "crc", "128", "104", "--poly", "0x1F"],
    );
    assert!(!dir.path().join("bch-127-100.json").exists());
}

#[test]
fn simulate_writes_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "crc", "128", "104"]);
    ok(
        d,
        &[
            "simulate",
            "--code",
            "crc-128-104.json",
            "--decoder",
            "fading-grand",
            "--L",
            "1",
            "--ebn0",
            "6:2:14",
            "--min-errors",
            "20",
            "--max-frames",
            "200",
            "--out",
            "fg.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("fg.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "ebn0_db,fer,ber,avg_queries,frames,frame_errors,abandonments,stderr_fer"
    );
    let rows = rows(&csv);
    assert_eq!(rows.len(), 5);
    let ebn0: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ebn0, vec![6.0, 8.0, 10.0, 12.0, 14.0]);
    for r in &rows {
        let fer: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&fer));
        assert!(!r[3].is_empty());
    }

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("fg.json")).unwrap()).unwrap();
    assert_eq!(json["provenance"]["command"], "simulate");
    assert_eq!(json["jobs"].as_array().unwrap().len(), 5);
    assert_eq!(json["results"].as_array().unwrap().len(), 5);
}

#[test]
fn fixed_delta_overrides_the_calibration_line() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "rlc", "128", "104"]);
    let base = [
        "simulate",
        "--code",
        "rlc-128-104.json",
        "--ebn0",
        "12",
        "--min-errors",
        "30",
        "--max-frames",
        "300",
    ];
    let mut fixed = base.to_vec();
    fixed.extend([
        "--decoder",
        "fading-grand",
        "--delta",
        "inf",
        "--out",
        "fixed.csv",
    ]);
    ok(d, &fixed);
    let mut plain = base.to_vec();
    plain.extend(["--decoder", "grandab", "--out", "plain.csv"]);
    ok(d, &plain);
    // With an infinite threshold nothing is reliable, so it is GRANDAB.
    assert_eq!(
        fs::read_to_string(d.join("fixed.csv")).unwrap(),
        fs::read_to_string(d.join("plain.csv")).unwrap()
    );
}

#[test]
fn bm_requires_a_bch_code() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "crc", "128", "104"]);
    let err = fails(
        d,
        &[
            "simulate",
            "--code",
            "crc-128-104.json",
            "--decoder",
            "bm",
            "--ebn0",
            "10",
            "--out",
            "bm.csv",
        ],
    );
    assert!(err.contains("BCH"), "{err}");
    assert!(!d.join("bm.csv").exists());

    ok(d, &["make-code", "bch", "127", "106"]);
    ok(
        d,
        &[
            "simulate",
            "--code",
            "bch-127-106.json",
            "--decoder",
            "bm",
            "--ebn0",
            "10",
            "--max-frames",
            "200",
            "--out",
            "bm.csv",
        ],
    );
    let rows = rows(&fs::read_to_string(d.join("bm.csv")).unwrap());
    assert_eq!(rows[0][3], "");
}

#[test]
fn missing_calibration_names_the_key() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "rlc", "128", "104"]);
    let err = fails(
        d,
        &[
            "simulate",
            "--code",
            "rlc-128-104.json",
            "--decoder",
            "fading-grand",
            "--combiner",
            "mrc",
            "--L",
            "3",
            "--ebn0",
            "10",
            "--out",
            "x.csv",
        ],
    );
    assert!(
        err.contains("rlc-128-104") && err.contains("mrc") && err.contains("L=3"),
        "{err}"
    );
    assert!(!d.join("x.csv").exists());
}

#[test]
fn calibrate_needs_two_points() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "rlc", "128", "104"]);
    let err = fails(
        d,
        &[
            "calibrate",
            "--code",
            "rlc-128-104.json",
            "--ebn0",
            "15",
            "--max-frames",
            "100",
        ],
    );
    assert!(err.contains("need ≥2"), "{err}");
    assert!(!d.join("calibration.json").exists());
}

#[test]
fn calibrate_writes_a_usable_store() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "crc", "128", "104"]);
    let out = fgrand(
        d,
        &[
            "calibrate",
            "--code",
            "crc-128-104.json",
            "--ebn0",
            "10,12",
            "--grid",
            "0",
            "--max-frames",
            "200",
            "--store",
            "cal.json",
        ],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let store: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("cal.json")).unwrap()).unwrap();
    let line = &store["entries"][0];
    assert_eq!(line["code"], "crc-128-104");
    assert_eq!(line["m"].as_f64().unwrap(), 0.0);
    assert_eq!(line["b"].as_f64().unwrap(), 0.0);

    ok(
        d,
        &[
            "simulate",
            "--code",
            "crc-128-104.json",
            "--decoder",
            "fading-grand",
            "--calibration",
            "cal.json",
            "--ebn0",
            "10",
            "--max-frames",
            "50",
            "--out",
            "s.csv",
        ],
    );
}

#[test]
fn sweep_threshold_reports_the_grid() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["make-code", "crc", "128", "104"]);
    let stdout = ok(
        d,
        &[
            "sweep-threshold",
            "--code",
            "crc-128-104.json",
            "--ebn0",
            "10",
            "--grid",
            "0:0.5:1.5",
            "--max-frames",
            "100",
            "--out",
            "sw.csv",
        ],
    );
    assert!(stdout.contains("optimal threshold"));
    assert_eq!(
        rows(&fs::read_to_string(d.join("sw.csv")).unwrap()).len(),
        4
    );
    assert!(d.join("sw.json").exists());
}
