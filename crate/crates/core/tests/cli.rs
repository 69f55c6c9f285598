use std::process::{Command, Output};

const HEADER: &str = "system,n,l,m,a,L,eta,nonlinearity,delta_e,delta_e_dimless,err,method,seed,status";

fn nlse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlse")).args(args).output().expect("run nlse")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column<'a>(line: &'a str, name: &str) -> &'a str {
    let i = HEADER.split(',').position(|c| c == name).unwrap();
    line.split(',').nth(i).unwrap()
}

#[test]
fn shift_prints_header_and_row() {
    let o = nlse(&["shift", "well", "--n", "1", "--a", "1000", "--L", "1", "--eta", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 2);
    let d: f64 = column(lines[1], "delta_e_dimless").parse().unwrap();
    assert!((d + 1.0e-3).abs() < 0.1e-3, "{d}");
    assert_eq!(column(lines[1], "status"), "ok");
}

#[test]
fn negative_length_gives_the_same_shift() {
    let plus = stdout(&nlse(&["shift", "well", "--n", "1", "--a", "1000", "--L", "1"]));
    let minus = stdout(&nlse(&["shift", "well", "--n", "1", "--a", "1000", "--L", "-1"]));
    let p: f64 = column(plus.lines().nth(1).unwrap(), "delta_e").parse().unwrap();
    let m: f64 = column(minus.lines().nth(1).unwrap(), "delta_e").parse().unwrap();
    let err: f64 = column(plus.lines().nth(1).unwrap(), "err").parse().unwrap();
    assert!((p - m).abs() <= 2.0 * err.max(1e-300));
}

#[test]
fn sho_ground_state_value() {
    let o = nlse(&["shift", "sho", "--n", "0", "--a", "100", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rec = if v.is_array() { v[0].clone() } else { v };
    let d = rec["delta_e_dimensionless"].as_f64().unwrap();
    assert!((d + 1.5625e-6).abs() < 1e-9, "{d}");
    assert_eq!(rec["seed"].as_u64(), Some(42));
}

#[test]
fn exit_codes() {
    assert_eq!(nlse(&["shift", "well", "--n", "0", "--a", "1000"]).status.code(), Some(2));
    assert_eq!(nlse(&["shift", "well", "--n", "1", "--a", "1000", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(nlse(&["shift", "well", "--n", "1", "--a", "1000", "--L", "0"]).status.code(), Some(2));
    assert_eq!(nlse(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(nlse(&["figure", "3"]).status.code(), Some(2));
    assert_eq!(nlse(&["--help"]).status.code(), Some(0));
}

#[test]
fn scan_rows_rerun_bit_identically() {
    let o = nlse(&["scan", "sho", "--n-range", "0..3", "--a", "100,1000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let args = [
            "--seed",
            column(row, "seed"),
            "shift",
            column(row, "system"),
            "--n",
            column(row, "n"),
            "--a",
            column(row, "a"),
            "--L",
            column(row, "L"),
            "--eta",
            column(row, "eta"),
        ];
        let again = stdout(&nlse(&args));
        assert_eq!(again.lines().nth(1).unwrap(), row);
    }
}

#[test]
fn scan_then_fit_recovers_the_well_law() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("well.csv");
    let o = nlse(&["scan", "well", "--n-range", "1", "--a-range", "1000:10000", "--a-points", "6"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, &o.stdout).unwrap();
    let fit = nlse(&["fit", path.to_str().unwrap(), "--x-col", "a", "--y-col", "delta_e_dimless"]);
    assert_eq!(fit.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    let k = v["exponent"].as_f64().unwrap();
    let c = v["coefficient"].as_f64().unwrap();
    assert!((k + 1.0).abs() < 0.02, "{k}");
    assert!((0.99..=1.07).contains(&c), "{c}");
    assert_eq!(v["sign"].as_f64(), Some(-1.0));
}

#[test]
fn well_scan_to_fifty() {
    let o = nlse(&["scan", "well", "--n-range", "1..50", "--a", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| column(r, "delta_e_dimless").parse::<f64>().unwrap() < 0.0));
}

#[test]
fn critical_eta_command() {
    let o = nlse(&["critical-eta", "well", "--n", "2", "--a", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let eta = v["eta"].as_f64().unwrap();
    assert!((eta - 0.25).abs() < 0.01);
    let o = nlse(&["critical-eta", "sho", "--n", "0", "--a", "2000"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["eta"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.01);
    assert_eq!(v["nodeless"].as_bool(), Some(true));
}

#[test]
fn figure_one_refits_to_inverse_a() {
    let o = nlse(&["figure", "1", "--fit"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,a,delta_e_dimless"));
    let fit: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() + 1.0).abs() < 0.003);
}

#[test]
fn figure_two_slope() {
    let o = nlse(&["figure", "2", "--fit"]);
    assert_eq!(o.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 1.41).abs() < 0.05);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# tighter quadrature\nrel_tol = 1e-11\nrng_seed = 7\n").unwrap();
    let o = nlse(&["--config", path.to_str().unwrap(), "shift", "well", "--n", "2", "--a", "500", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rec = if v.is_array() { v[0].clone() } else { v };
    assert_eq!(rec["seed"].as_u64(), Some(7));
    assert_eq!(rec["rel_tol"].as_f64(), Some(1e-11));

    let o = nlse(&["--config", path.to_str().unwrap(), "--set", "rng_seed=9", "shift", "well", "--n", "2", "--a", "500"]);
    assert_eq!(column(stdout(&o).lines().nth(1).unwrap(), "seed"), "9");

    std::fs::write(&path, "rel_tol = -1\n").unwrap();
    let o = nlse(&["--config", path.to_str().unwrap(), "shift", "well", "--n", "2", "--a", "500"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hydrogen_scan_is_reproducible() {
    let args = ["--seed", "42", "--mc-samples", "10000", "scan", "hydrogen", "--n-range", "1..2", "--l", "0", "--a", "100"];
    let first = stdout(&nlse(&args));
    let second = stdout(&nlse(&args));
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 3);
}
