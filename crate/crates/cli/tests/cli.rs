use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn dualband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualband"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const GOLDEN: &[&str] = &[
    "--device",
    "rrc",
    "--f1",
    "1e9",
    "--f2",
    "2.4e9",
    "--n1",
    "2",
    "--n2",
    "0.5",
    "--topology",
    "c",
];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn design_golden_json() {
    let o = dualband(&with(&["design"], GOLDEN));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for (path, want) in [
        ("/solution/theta_alpha_deg", 46.04),
        ("/solution/theta_beta_deg", 60.61),
        ("/shifter/theta_delta_deg", 52.94),
        ("/solution/z_alpha_ohm", 44.80),
        ("/solution/z_beta_ohm", 52.34),
        ("/shifter/z_even_ohm", 59.32),
        ("/shifter/z_odd_ohm", 33.83),
    ] {
        assert!(
            (v.pointer(path).unwrap().as_f64().unwrap() - want).abs() <= 0.01,
            "{path}"
        );
    }
    assert!(v["feasibility"]["feasible"].as_bool().unwrap());
}

#[test]
fn design_db_flags_accept_negative_values() {
    let o = dualband(&[
        "design",
        "--f1",
        "1e9",
        "--f2",
        "2.4e9",
        "--n1-db",
        "3",
        "--n2-db",
        "-3",
        "--topology",
        "c",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["spec"]["n2_db"].as_f64().unwrap(), -3.0);
}

#[test]
fn divider_resistors() {
    let o = dualband(&[
        "design",
        "--device",
        "gpd",
        "--f1",
        "1e9",
        "--f2",
        "2.4e9",
        "--n1",
        "2",
        "--n2",
        "0.5",
        "--topology",
        "c",
        "--r-choice",
        "n=1",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["resistors"]["r2_ohm"].as_f64().unwrap(), 100.0);
    assert_eq!(v["resistors"]["r3_ohm"].as_f64().unwrap(), 100.0);
}

#[test]
fn output_is_byte_identical() {
    let a = dualband(&with(&["design"], GOLDEN));
    let b = dualband(&with(&["design"], GOLDEN));
    assert_eq!(a.stdout, b.stdout);
    let a = dualband(&with(
        &["simulate", "--points", "31", "--out", "csv"],
        GOLDEN,
    ));
    let b = dualband(&with(
        &["simulate", "--points", "31", "--out", "csv"],
        GOLDEN,
    ));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dualband(&["design", "--f1", "1e9"]).status.code(), Some(2));
    assert_eq!(dualband(&["nonsense"]).status.code(), Some(2));
    assert_eq!(dualband(&["design", "--f1", "abc"]).status.code(), Some(2));
    assert_eq!(
        dualband(&["sweep-space", "--figure", "shifter"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dualband(&["sweep-space", "--figure", "lengths", "--k", "1,,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dualband(&with(&["design", "--n1-db", "3"], GOLDEN))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn solver_errors_exit_1_with_json() {
    let o = dualband(&[
        "design",
        "--f1",
        "1e9",
        "--f2",
        "1e9",
        "--n1",
        "1",
        "--n2",
        "1",
        "--topology",
        "c",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["code"], "RatioOutOfRange");
    assert!(o.stdout.is_empty());

    let o = dualband(&[
        "design",
        "--f1",
        "1e9",
        "--f2",
        "3e9",
        "--n1",
        "1",
        "--n2",
        "1",
        "--topology",
        "t",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().trim()).unwrap();
    assert!(v["code"].is_string() && v["message"].is_string());
}

#[test]
fn simulate_touchstone_has_nulls_at_design_bands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("golden.s4p");
    let o = dualband(&with(
        &[
            "simulate",
            "--fstart",
            "0.5e9",
            "--fstop",
            "3e9",
            "--points",
            "201",
            "--out",
            "touchstone",
            "-o",
            path.to_str().unwrap(),
        ],
        GOLDEN,
    ));
    assert!(o.stdout.is_empty());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mats = dualband::sim::parse_touchstone(&text, 4).unwrap();
    assert_eq!(mats.len(), 201);
    let s11_at = |f: f64| {
        let m = mats
            .iter()
            .min_by(|a, b| (a.freq_hz - f).abs().total_cmp(&(b.freq_hz - f).abs()))
            .unwrap();
        20.0 * m.s(1, 1).norm().log10()
    };
    assert!(s11_at(1e9) < -100.0);
    assert!(s11_at(2.4e9) < -100.0);
    assert!(s11_at(1.7e9) > -60.0);
}

#[test]
fn simulate_from_saved_design_csv() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("design.json");
    let o = dualband(&with(&["design", "-o", design.to_str().unwrap()], GOLDEN));
    assert!(o.status.success());
    let o = dualband(&[
        "simulate",
        "--design",
        design.to_str().unwrap(),
        "--points",
        "11",
        "--out",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("frequency_hz,"));
    assert!(csv.lines().next().unwrap().contains("imbalance_db"));
    assert_eq!(csv.lines().count(), 12);

    let o = dualband(&with(
        &["simulate", "--design", design.to_str().unwrap()],
        GOLDEN,
    ));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_space_csv() {
    let o = dualband(&["sweep-space", "--figure", "lengths", "--k", "1,2,4,10"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 1 + 4 * 191);
    let o = dualband(&[
        "sweep-space",
        "--figure",
        "shifter",
        "--topology",
        "pi",
        "--k",
        "1",
        "--m-start",
        "2",
        "--m-stop",
        "2.5",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o)
        .lines()
        .next()
        .unwrap()
        .ends_with("z_2pi_ohm,feasible,flag"));
}

#[test]
fn polarization_report() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.json");
    fs::write(
        &design,
        r#"{"topology": "c", "f1": 2.4e9, "f2": 5.2e9, "n1_db": 0, "n2_db": 20}"#,
    )
    .unwrap();
    let o = dualband(&[
        "polarization",
        "--design",
        design.to_str().unwrap(),
        "--port",
        "1",
        "--quarter-wave",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v[0]["axial_ratio_db"].as_f64().unwrap().abs() < 0.01);
    assert_eq!(v[0]["handedness"], "LHCP");
    assert!((v[1]["axial_ratio_db"].as_f64().unwrap() + 20.0).abs() < 0.01);

    let o = dualband(&[
        "polarization",
        "--design",
        design.to_str().unwrap(),
        "--port",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
