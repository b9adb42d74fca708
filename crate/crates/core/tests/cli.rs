use std::process::{Command, Output};

use serde_json::Value;

fn relaytree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaytree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = relaytree(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&args)).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn code(args: &[&str]) -> Option<i32> {
    relaytree(args).status.code()
}

#[test]
fn evolve_examples() {
    let text = stdout(&["evolve", "--alpha0", "0.1", "--beta0", "0.2", "--levels", "2", "--format", "csv"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        ["k", "alpha", "beta", "log2_alpha", "log2_beta", "log2_L", "side", "b_index", "in_R", "in_S"]
    );
    assert_eq!(rows.len(), 3);
    let last = &rows[2];
    assert!((last[1].parse::<f64>().unwrap() - 0.0361).abs() < 1e-12);
    assert!((last[2].parse::<f64>().unwrap() - 0.0784).abs() < 1e-12);

    let (_, rows) = csv_rows(&stdout(&["evolve", "--alpha0", "0", "--beta0", "0", "--levels", "1"]));
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!((&row[1][..], &row[2][..], &row[5][..]), ("0", "0", "-inf"));
    }
}

#[test]
fn validation_errors_exit_2() {
    let out = relaytree(&["evolve", "--alpha0", "1.5", "--beta0", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");

    assert_eq!(code(&["regions", "--resolution", "1"]), Some(2));
    assert_eq!(code(&["regions", "--resolution", "5000"]), Some(2));
    assert_eq!(code(&["ratios", "--region", "Bm", "--kind", "step2_sq"]), Some(2));
    assert_eq!(code(&["ratios", "--region", "Q", "--kind", "step2_sq"]), Some(2));
    assert_eq!(code(&["bounds", "--alpha0", "0.1", "--beta0", "0.2", "--leaves", "6"]), Some(2));
    assert_eq!(code(&["bounds", "--alpha0", "0.1", "--beta0", "0.2"]), Some(2));
    assert_eq!(
        code(&["bounds", "--alpha0", "0.1", "--beta0", "0.2", "--leaves", "4", "--height", "2"]),
        Some(2)
    );
    assert_eq!(code(&["min-sensors", "--alpha0", "0.1", "--beta0", "0.2", "--epsilon", "0"]), Some(2));
    assert_eq!(
        code(&["montecarlo", "--alpha0", "0.1", "--beta0", "0.2", "--height", "30"]),
        Some(2)
    );
    assert_eq!(code(&["crummy", "--c", "4", "--height-min", "11", "--height-max", "21"]), Some(2));
    assert_eq!(code(&["crummy", "--c", "64", "--height-min", "10", "--height-max", "12"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
}

#[test]
fn domain_errors_exit_3() {
    assert_eq!(code(&["bounds", "--alpha0", "0.6", "--beta0", "0.5", "--leaves", "4"]), Some(3));
    assert_eq!(code(&["bounds", "--alpha0", "0.5", "--beta0", "0.5", "--leaves", "4"]), Some(3));
    assert_eq!(code(&["min-sensors", "--alpha0", "0.6", "--beta0", "0.5", "--epsilon", "0.1"]), Some(3));
}

#[test]
fn regions_grid() {
    let (_, rows) = csv_rows(&stdout(&["regions", "--resolution", "3"]));
    assert_eq!(rows.len(), 9);
    let find = |a: &str, b: &str| rows.iter().find(|r| r[0] == a && r[1] == b).unwrap().clone();
    assert_eq!(find("0.25", "0.25")[3], "1");
    assert_eq!(find("0", "0")[3..], ["1", "true", "true"]);
    let edge = find("0.5", "0.5");
    assert_eq!(edge[2], "DiagonalSum1");
    assert_eq!(edge[3], "");

    let text = stdout(&["regions", "--resolution", "400"]);
    assert_eq!(text.lines().count(), 160_001);
}

fn ratio_range(region: &str, kind: &str) -> (usize, f64, f64) {
    let (_, rows) = csv_rows(&stdout(&["ratios", "--region", region, "--kind", kind, "--resolution", "200"]));
    let values: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (values.len(), lo, hi)
}

#[test]
fn ratio_figures() {
    let slack = 1e-12;
    let (n, lo, hi) = ratio_range("Bm", "step1_sq");
    assert!(n > 0 && lo >= 1.0 - slack && hi <= 2.0 + slack);
    let (n, lo, hi) = ratio_range("B1", "step2_sq");
    assert!(n > 0 && lo >= 1.0 - slack && hi <= 2.0 + slack);
    let (n, lo, hi) = ratio_range("B2RU", "step2_sq");
    assert!(n > 0 && lo >= 1.0 - slack && hi <= 2.0 + slack);
    let (n, lo, _) = ratio_range("U", "step1_sq");
    assert!(n > 0 && lo >= 1.0 - slack);
    let (n, _, hi) = ratio_range("U", "step1_lin");
    assert!(n > 0 && hi <= 1.0 + slack);
    let (n, lo, hi) = ratio_range("fB2RU", "step1_lin");
    assert!(n > 0 && lo >= 0.5 - slack && hi <= 1.0 + slack);
}

#[test]
fn bounds_examples() {
    let doc = json(&["bounds", "--alpha0", "0.1", "--beta0", "0.2", "--leaves", "4"]);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "bounds");
    let r = &doc["result"];
    assert_eq!(r["theorem"], "Theorem1");
    assert!((r["exact_log2_inv_PN"].as_f64().unwrap() - 3.127).abs() < 1e-3);
    assert!((r["lower"].as_f64().unwrap() - 2.474).abs() < 1e-3);
    assert!((r["upper"].as_f64().unwrap() - 3.474).abs() < 1e-3);
    assert_eq!(r["ok"], true);

    let doc = json(&["bounds", "--alpha0", "0.05", "--beta0", "0.9", "--leaves", "4"]);
    assert_eq!(doc["result"]["theorem"], "Corollary1");
    assert_eq!(doc["result"]["m"], 4);

    let doc = json(&["bounds", "--alpha0", "0.05", "--beta0", "0.9", "--height", "7"]);
    assert_eq!(doc["result"]["theorem"], "Theorem4OddGap");
    assert_eq!(doc["result"]["leaves"], 128);
}

#[test]
fn min_sensors_examples() {
    let doc = json(&["min-sensors", "--alpha0", "0.1", "--beta0", "0.2", "--epsilon", "0.01"]);
    assert_eq!(doc["result"]["n_min"], 64);
    assert_eq!(doc["result"]["height"], 6);
    let doc = json(&["min-sensors", "--alpha0", "0.1", "--beta0", "0.2", "--epsilon", "0.5"]);
    assert_eq!(doc["result"]["n_min"], 1);
}

#[test]
fn montecarlo_examples() {
    let doc = json(&[
        "montecarlo", "--alpha0", "0.1", "--beta0", "0.2", "--height", "10", "--trials", "100000",
        "--seed", "7", "--hypothesis", "H0",
    ]);
    assert!(doc["result"]["z"].as_f64().unwrap().abs() <= 4.0);
    let doc = json(&[
        "montecarlo", "--alpha0", "0", "--beta0", "0", "--height", "5", "--trials", "1000", "--seed", "1",
    ]);
    assert_eq!(doc["result"]["error_rate"], 0.0);
    let doc = json(&[
        "montecarlo", "--alpha0", "0.3", "--beta0", "0.3", "--leaves", "8", "--trials", "50000", "--seed",
        "2", "--hypothesis", "H1",
    ]);
    assert!(doc["result"]["errors"].as_u64().unwrap() > 0);
    assert!(doc["result"]["z"].as_f64().unwrap().abs() <= 4.0);
}

fn crummy(schedule: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(&stdout(&[
        "crummy", "--c", "4", "--height-min", "10", "--height-max", "22", "--schedule", schedule,
    ]));
    assert_eq!(header, ["N", "height", "eta", "log2_PN"]);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "1024");
    rows.iter().map(|r| r[3].parse().unwrap()).collect()
}

#[test]
fn crummy_schedules() {
    let fast = crummy("inv-linear");
    assert!(fast.windows(2).all(|w| w[1] > w[0]));
    assert!(*fast.last().unwrap() > -0.01);
    let slow = crummy("inv-quarter");
    assert!(slow.iter().all(|v| *v < -40.0));
    let critical = crummy("inv-sqrt");
    assert!(critical.iter().all(|v| *v < 0.0 && v.is_finite()));
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["evolve", "--alpha0", "0.05", "--beta0", "0.9", "--levels", "30"];
    let (header, rows) = csv_rows(&stdout(&args));
    let doc = json(&args);
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), json_rows.len());
    for (row, obj) in rows.iter().zip(json_rows) {
        for (name, cell) in header.iter().zip(row) {
            let v = &obj[name.as_str()];
            match v {
                Value::Number(n) => assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{name}"),
                Value::String(s) => assert_eq!(cell, s),
                Value::Bool(b) => assert_eq!(cell, &b.to_string()),
                Value::Null => assert_eq!(cell, ""),
                _ => panic!("unexpected {v}"),
            }
        }
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("relaytree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("evolve.csv");
    let out = relaytree(&[
        "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--levels", "3", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&["evolve", "--alpha0", "0.1", "--beta0", "0.2", "--levels", "3"]));
    std::fs::remove_dir_all(dir).unwrap();
}
