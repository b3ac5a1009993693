use std::process::{Command, Output};

use fevkit::cli::OutputEnvelope;

fn fevkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fevkit")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = fevkit(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const EXAMPLE: [&str; 7] = ["--family", "normal-known", "--sigma", "1", "--summary", "100,0.2", "--mu0=0"];

#[test]
fn test_command_reports_the_tail_area() {
    let mut args = vec!["test"];
    args.extend(EXAMPLE);
    let v = json(&args);
    let p = v["results"]["p_reported"].as_f64().unwrap();
    assert!((p - 0.022_750_131_948_179_195).abs() < 1e-12);
    assert_eq!(v["display"]["p"], "0.02275");
    assert_eq!(v["command"], "test");
}

#[test]
fn values_and_csv_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.csv");
    std::fs::write(&path, "y\n1.5\n2.5\n0.5\n3.0\n").unwrap();
    let from_csv = json(&["test", "--family", "normal-unknown", "--data", path.to_str().unwrap()]);
    let from_values = json(&["test", "--family", "normal-unknown", "--values", "1.5,2.5,0.5,3.0"]);
    assert_eq!(from_csv["results"], from_values["results"]);
}

#[test]
fn hunting_adjustment() {
    let v = json(&["adjust", "hunting", "--k", "20", "--pmin", "0.05"]);
    assert!((v["results"]["adjusted_p"].as_f64().unwrap() - 0.641_514_077_591_458).abs() < 1e-12);
    assert_eq!(v["display"]["adjusted_p"], "0.6415");
}

#[test]
fn invalid_delta_max_exits_with_structured_error() {
    let mut args = vec!["severity"];
    args.extend(EXAMPLE);
    args.extend(["--delta-max", "0"]);
    let out = fevkit(&args);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out) + &String::from_utf8_lossy(&out.stderr);
    let line = text.lines().find(|l| l.starts_with('{')).expect("error line");
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn json_output_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ci.json");
    let mut args = vec!["--json", "--output", path.to_str().unwrap(), "ci"];
    args.extend(EXAMPLE);
    args.extend(["--sided", "lower", "--levels", "0.95"]);
    assert!(fevkit(&args).status.success());
    let bytes = std::fs::read_to_string(&path).unwrap();
    let env: OutputEnvelope = serde_json::from_str(&bytes).unwrap();
    assert_eq!(env.to_json(), bytes);
    let lower = env.results["confidence_set"]["intervals"][0]["region"]["lower"].as_f64().unwrap();
    assert!((lower - 0.035_514_637_304_852_8).abs() < 1e-9);
    assert_eq!(env.results["confidence_set"]["intervals"][0]["region"]["upper"], "inf");
}

#[test]
fn severity_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let mut args = vec!["severity"];
    args.extend(EXAMPLE);
    args.extend(["--delta-max", "0.5", "--points", "6", "--curve-csv", path.to_str().unwrap()]);
    assert!(fevkit(&args).status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("delta,beta\n") && text.ends_with('\n'));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (d, b) = l.split_once(',').unwrap();
            (d.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[2], (0.2, 0.5));
    assert!((rows[3].1 - 0.841_344_746_068_542_9).abs() < 1e-12);
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "y\n1\n2\nabc\n").unwrap();
    let out = fevkit(&["test", "--family", "normal-unknown", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out) + &String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(text.lines().find(|l| l.starts_with('{')).unwrap()).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 4);
}

#[test]
fn simulate_from_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.toml");
    std::fs::write(&path, "scenario = \"hunting_fwer\"\nreplicates = 20000\nseed = 3\n\n[params]\nk = 20\nalpha = 0.05\n")
        .unwrap();
    let a = json(&["simulate", "--config", path.to_str().unwrap()]);
    let b = json(&["simulate", "--config", path.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(a["results"], b["results"]);
    assert!((a["results"]["target"].as_f64().unwrap() - 0.641_514_077_591_458).abs() < 1e-12);

    std::fs::write(&path, "scenario = \"hunting_fwer\"\nreplicates = -4\n").unwrap();
    let out = fevkit(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("\"line\":2") || String::from_utf8_lossy(&out.stderr).contains("\"line\":2"));
}

#[test]
fn interpret_cites_its_rule() {
    let v = json(&["interpret", "--family", "normal-known", "--sigma", "1", "--summary", "100,0.0", "--null-type", "embedded-formal"]);
    assert_eq!(v["results"]["verdict"], "evidence_of_absence_up_to_delta");
    let cites: Vec<&str> = v["citations"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cites, ["D2", "FEV-II"]);
}

#[test]
fn search_and_classify() {
    let v = json(&["adjust", "search", "--database-size", "1000", "--fp", "1e-6", "--nonmatches", "999"]);
    assert_eq!(v["results"]["report"]["evidence_grade"], "strong");
    assert_eq!(v["results"]["report"]["hunting_adjustment"], false);
    let v = json(&["adjust", "classify", "--context", "spec-search-by-significance"]);
    assert_eq!(v["results"]["method"], "simulation");
}

#[test]
fn test_command_from_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let rows: String = (0..100).map(|i| if i % 2 == 0 { "0.25\n" } else { "0.15\n" }).collect();
    std::fs::write(&path, format!("y\n{rows}")).unwrap();
    let v = json(&[
        "test", "--family", "normal-known", "--mu0", "0", "--sigma", "1", "--data", path.to_str().unwrap(), "--alt", "greater",
    ]);
    assert!((v["results"]["p_reported"].as_f64().unwrap() - 0.022_750_131_948_179_195).abs() < 1e-9);
}
