use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridledger"))
        .args(args)
        .env_remove("GRIDLEDGER_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_three_bus_table() {
    let o = run(&["solve", path(&fixture("three_bus.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("30.00") && text.contains("15.00"));
    assert!(text.contains("2-3") && text.contains("20.00"));
    assert!(text.contains("total scope1 27.00 ton"));
}

#[test]
fn solve_before_new_load_has_no_emissions() {
    let o = run(&["solve", path(&fixture("responsiveness_before.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("total scope1 0.00 ton"));
}

#[test]
fn negative_capacity_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("three_bus.json")).unwrap().replacen("\"capacity\": 100", "\"capacity\": -100", 1);
    assert!(text.contains("-100"));
    std::fs::write(&bad, text).unwrap();
    let o = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("generator:g1"));
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_json_names_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"buses\": [{\"id\": \"1\", \"nmae\": \"x\"}]}").unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("nmae") && err.contains("line 1"), "{err}");
}

#[test]
fn shortfall_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.json");
    let text = std::fs::read_to_string(fixture("single_bus_clean.json")).unwrap().replace("\"demand\": 60", "\"demand\": 160");
    assert!(text.contains("160"));
    std::fs::write(&short, text).unwrap();
    let o = run(&["solve", short.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn rates_three_bus() {
    let o = run(&["rates", path(&fixture("three_bus.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for want in ["0.9000", "1.8000", "-2.7000", "AER 0.6000"] {
        assert!(text.contains(want), "missing {want}");
    }
    let o = run(&["rates", path(&fixture("three_bus.json")), "--format", "csv"]);
    let csv = stdout(&o);
    assert!(csv.starts_with("element,kind,period,rate\n"));
    assert!(csv.contains("2-3,line,0,-2.7"));
}

#[test]
fn rates_all_clean_grid_are_zero() {
    let o = run(&["rates", path(&fixture("single_bus_clean.json")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let set = &v[0];
    for kind in ["buses", "lines", "generators"] {
        for e in set[kind].as_array().unwrap() {
            assert_eq!(e["rate"]["value"].as_f64().unwrap(), 0.0);
        }
    }
    assert_eq!(set["aer"].as_f64().unwrap(), 0.0);
}

#[test]
fn rejects_bad_epsilon() {
    let o = run(&["rates", path(&fixture("three_bus.json")), "--epsilon", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn footprint_carbon_matching_passes_audit() {
    let o = run(&["footprint", path(&fixture("three_bus.json")), "--regime", "mer"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("81.00") && text.contains("-54.00") && text.contains("audit PASS"));
}

#[test]
fn footprint_market_modes() {
    let net = fixture("responsiveness_after.json");
    let o = run(&["footprint", path(&net), "--regime", "market", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("kind,id,period,rate,footprint,regime\n"));
    assert!(csv.contains("load,existing,0,0.333"));

    let o = run(&["footprint", path(&net), "--regime", "market", "--rate-mode", "average"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("audit FAIL"));
}

#[test]
fn contracts_file_replaces_network_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("contracts.json");
    std::fs::write(&c, "[]").unwrap();
    let o = run(&[
        "footprint",
        path(&fixture("responsiveness_after.json")),
        "--regime",
        "market",
        "--rate-mode",
        "average",
        "--contracts",
        c.to_str().unwrap(),
    ]);
    // Without contracts the average-rate market ledger is the location one.
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tolerance_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_gridledger"))
        .args(["footprint", path(&fixture("responsiveness_after.json")), "--regime", "market", "--rate-mode", "average"])
        .env("GRIDLEDGER_TOL", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_gridledger"))
        .args(["footprint", path(&fixture("three_bus.json"))])
        .env("GRIDLEDGER_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scenario_reports_predicted_and_realized() {
    let o = run(&["scenario", path(&fixture("three_bus.json")), path(&fixture("expansion_5mw.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("27.00") && text.contains("36.00"));
    assert!(text.contains("0.6000") && text.contains("0.7200"));
    assert!(text.contains("predicted from base rates 9.00"));

    let o = run(&["scenario", path(&fixture("three_bus.json")), path(&fixture("empty_scenario.json")), "--format", "csv"]);
    let csv = stdout(&o);
    let scope1 = csv.lines().find(|l| l.starts_with("scope1,")).unwrap();
    assert_eq!(scope1, "scope1,27.0,27.0");
}

#[test]
fn scenario_line_relief_lowers_emissions() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("relief.json");
    std::fs::write(&s, r#"{"deltas":[{"op":"increment","kind":"line","id":"2-3","field":"capacity","amount":10}]}"#).unwrap();
    let o = run(&["scenario", path(&fixture("three_bus.json")), s.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["scope1_delta"].as_f64().unwrap() < 0.0);
}

#[test]
fn compare_columns_and_budget() {
    let o = run(&["compare", path(&fixture("responsiveness_after.json")), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let row = |id: &str| -> Vec<f64> {
        csv.lines()
            .find(|l| l.starts_with(&format!("{id},")))
            .unwrap()
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect()
    };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6);
    assert!(close(&row("existing"), &[8.0, 10.0 / 3.0, 80.0]));
    assert!(close(&row("new"), &[2.0, 20.0 / 3.0, 20.0]));

    let o = run(&["compare", path(&fixture("three_bus.json")), "--bus", "3"]);
    let text = stdout(&o);
    assert!(text.contains("1.6667 MWh") && text.contains("0.5556 MWh"));

    let o = run(&["compare", path(&fixture("single_bus_clean.json")), "--format", "csv"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("town,0.0,0.0,0.0"));
}

#[test]
fn csv_output_is_deterministic_and_out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["footprint", path(&fixture("synth_ercot20.json")), "--format", "csv", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn every_bundled_fixture_round_trips() {
    for name in ["three_bus.json", "responsiveness_before.json", "responsiveness_after.json", "storage_two_period.json", "single_bus_clean.json", "synth_ercot20.json"] {
        let o = run(&["validate", path(&fixture(name))]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let o = run(&["solve", path(&fixture(name)), "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let text = stdout(&o);
        let parsed: gridledger::DispatchSolution = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        assert_eq!(again, text, "{name}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["footprint", "x.json", "--regime", "bogus"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "/nonexistent/net.json"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
