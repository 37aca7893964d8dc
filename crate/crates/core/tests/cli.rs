use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use bursty_pot::distribution::{ml_pdf, MlParams};
use bursty_pot::io::{execute, parse_events, parse_events_str, write_events, Cell, RunConfig, SCAN_COLUMNS};
use bursty_pot::sim::{simulate_mrp, SimConfig};

fn ctre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctre")).args(args).output().unwrap()
}

fn simulated_file(dir: &Path, n: usize) -> String {
    let path = dir.join("events.csv");
    let out = ctre(&["simulate", "--n", &n.to_string(), "--seed", "7", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_then_parse_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_file(dir.path(), 3000);
    let (parsed, report) = parse_events(Path::new(&path)).unwrap();
    let direct = simulate_mrp(&SimConfig::new(0.8, 3000, 7)).unwrap();
    assert_eq!(parsed, direct);
    assert!(report.warnings().is_empty());
}

#[test]
fn scan_table_has_fixed_columns_and_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated_file(dir.path(), 2000);
    let out = ctre(&["scan", "-i", &input, "--kmin", "20", "--kmax", "60"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SCAN_COLUMNS.join(","));
    assert_eq!(lines.count(), 41);

    let out = ctre(&["scan", "-i", &input, "--kmin", "20", "--kmax", "60", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["scan"].as_array().unwrap();
    assert_eq!(rows.len(), 41);
    assert_eq!(rows[0]["k"], 20);
    assert!(doc["stable"]["beta0"].as_f64().unwrap() > 0.0);
}

#[test]
fn scan_is_deterministic_and_order_insensitive() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated_file(dir.path(), 1500);
    let text = fs::read_to_string(&input).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let body = lines.split_off(2);
    let mut shuffled = lines.join("\n") + "\n";
    for l in body.iter().rev() {
        shuffled.push_str(l);
        shuffled.push('\n');
    }
    let reversed = dir.path().join("reversed.csv");
    fs::write(&reversed, shuffled).unwrap();

    let a = ctre(&["scan", "-i", &input, "--kmin", "10", "--kmax", "40"]);
    let b = ctre(&["scan", "-i", reversed.to_str().unwrap(), "--kmin", "10", "--kmax", "40"]);
    let c = ctre(&["scan", "-i", &input, "--kmin", "10", "--kmax", "40"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(String::from_utf8_lossy(&b.stderr).contains("sorted"));
}

#[test]
fn fit_reports_likelihood_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated_file(dir.path(), 5000);
    let out = ctre(&["fit", "-i", &input, "--k", "100", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["threshold"]["n_durations"], 99);
    assert_eq!(doc["fit"]["method"], "mle");
    let dev = doc["lrt"]["deviance"].as_f64().unwrap();
    let p = doc["lrt"]["p_value"].as_f64().unwrap();
    assert!(dev > 0.0 && (0.0..=1.0).contains(&p));
}

#[test]
fn diagnose_writes_one_file_per_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated_file(dir.path(), 3000);
    let out_path = dir.path().join("diag.csv");
    let out = ctre(&["diagnose", "-i", &input, "--ell", "3.0", "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (name, header) in [("acf", "lag,acf_durations,acf_excesses,band"), ("copula", "u,v"), ("qq", "theoretical,empirical")] {
        let t = fs::read_to_string(dir.path().join(format!("diag.{name}.csv"))).unwrap();
        assert_eq!(t.lines().next().unwrap(), header);
    }
}

#[test]
fn predict_at_zero_elapsed_time_is_unconditional() {
    let mut cfg = RunConfig::new(bursty_pot::io::Command::Predict);
    cfg.threshold = Some(bursty_pot::io::ThresholdSpec::K(10));
    cfg.stable_params = Some((0.8, 1e4));
    cfg.points = 25;
    let out = execute(&cfg).unwrap();
    let p = MlParams::new(0.8, 1e4 * 10f64.powf(-1.0 / 0.8)).unwrap();
    for row in &out.tables[0].rows {
        let (Cell::Num(t), Cell::Num(d)) = (&row[0], &row[1]) else { panic!() };
        assert_eq!(*d, ml_pdf(*t, &p).unwrap());
    }
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0,1\nfoo,2\n3,4\n").unwrap();
    let out = ctre(&["fit", "-i", bad.to_str().unwrap(), "--k", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = ctre(&["fit", "-i", bad.to_str().unwrap(), "--k", "2", "--ell", "1"]);
    assert!(!out.status.success());
    let out = ctre(&["simulate", "--beta", "1.5"]);
    assert!(!out.status.success());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn event_csv_round_trip(beta in 0.2f64..0.99, n in 2usize..400, seed in any::<u64>()) {
        let s = simulate_mrp(&SimConfig::new(beta, n, seed)).unwrap();
        let mut buf = Vec::new();
        write_events(&s, &mut buf).unwrap();
        let (back, _) = parse_events_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}
