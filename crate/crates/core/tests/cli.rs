use std::process::{Command, Output};

use levopt::emit::{parse_csv, DIVERGES};

fn levopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levopt")).args(args).output().expect("run levopt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn pressure_sweep_gives_one_row_per_point() {
    let o = levopt(&["cavity", "--scenario", "kiesel", "--sweep", "pressure=1e-10:1e-3:40,log"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 40);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows[0][col("pressure_mbar")].parse::<f64>().unwrap(), 1e-10);
    assert_eq!(rows[39][col("pressure_mbar")].parse::<f64>().unwrap(), 1e-3);
    assert_eq!(rows[0][col("phonons")], DIVERGES);
    assert_eq!(rows[0][col("escaped")], "true");
    assert_eq!(rows[39][col("escaped")], "false");
    assert!(rows[39][col("phonons")].parse::<f64>().is_ok());
}

#[test]
fn optimize_sweep_columns() {
    let o = levopt(&["optimize", "--scenario", "gieseler", "--sweep", "pressure=1e-11:1e-6:4,log"]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(header, ["pressure_mbar", "gain_rad_s", "n_total", "rms_m", "mod_index"]);
    let gains: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(gains.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn exit_codes() {
    assert_eq!(levopt(&["cavity", "--scenario", "kiesel", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(levopt(&["nonsense"]).status.code(), Some(2));
    assert_eq!(levopt(&["cavity", "--scenario", "missing-file.json"]).status.code(), Some(3));
    assert_eq!(levopt(&["feedback", "--scenario", "kiesel"]).status.code(), Some(3));
    assert_eq!(levopt(&["cavity", "--scenario", "kiesel", "--sweep", "pressure=1:2"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(levopt(&["coeffs", "--scenario", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn json_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = levopt(&["temperature", "--scenario", "gieseler", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["particle_temperature_k"].as_f64().unwrap() > 293.0);
}

#[test]
fn trajectory_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = levopt(&[
        "simulate", "--scenario", "kiesel", "--ensemble", "4", "--seed", "1", "--trajectory", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(header, ["t_s", "z_m", "v_m_s"]);
    assert!(rows.len() > 100);
}

#[test]
fn psd_is_csv() {
    let o = levopt(&["psd", "--scenario", "kiesel"]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(header, ["omega_rad_s", "value", "kind"]);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn quick_reproduce_passes() {
    let o = levopt(&["reproduce", "--quick", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let (header, rows) = parse_csv(&stdout(&o)).unwrap();
    let pass = header.iter().position(|h| h == "pass").unwrap();
    assert!(rows.iter().all(|r| r[pass] == "true"));
}
