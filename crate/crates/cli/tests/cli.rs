use nhil::model::{classify_static, CRITICAL_TOL};
use nhil::ModelParams;
use serde_json::Value;
use std::process::{Command, Output};

fn nhil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhil")).args(args).env_remove("NHIL_THREADS").output().unwrap()
}

fn report(args: &[&str]) -> Value {
    let out = nhil(&[&["report"], args].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gapless_report() {
    let r = report(&["--h", "0.5", "--gamma", "1", "--x", "2,4"]);
    assert_eq!(r["static_region"], "I");
    assert_eq!(r["dynamical_phase"], "gapless-none");
    assert!(r.get("kbar").is_none());
    assert!(r["times"].is_null());
    assert_eq!(r["fidelity"].as_array().unwrap().len(), 0);
    let q = r["q"].as_f64().unwrap();
    assert!((q - 0.5f64.acos()).abs() < 1e-15);
    assert!((r["gamma_c"].as_f64().unwrap() - 12f64.sqrt()).abs() < 1e-14);
    let czz = r["czz"].as_array().unwrap();
    assert_eq!(czz.len(), 2);
    assert_eq!(czz[0]["regime"], "oscillatory-gapless");
    for key in ["x", "quadrature", "asymptotic", "regime"] {
        assert!(czz[1].get(key).is_some(), "{key}");
    }
}

#[test]
fn hermitian_report_spread() {
    let r = report(&["--h", "0.5", "--gamma", "0", "--x", "2"]);
    let closed = r["spread"]["closed"].as_f64().unwrap();
    assert_eq!(format!("{closed:.6}"), "0.818310");
    assert_eq!(r["static_region"], "hermitian");
    assert!(r["czz"][0]["asymptotic"].is_null());
}

#[test]
fn gapped_report_routes_agree() {
    let r = report(&["--h", "0.5", "--gamma", "6", "--x", "2", "--t", "0,1,3"]);
    let s = &r["spread"];
    let c = s["closed"].as_f64().unwrap();
    assert!((s["quadrature"].as_f64().unwrap() - c).abs() < 1e-8);
    assert!((s["contraction"].as_f64().unwrap() - c).abs() < 1e-8);
    assert!(r["kbar"].as_f64().is_some());
    for key in ["t1", "t2", "t3", "t1s", "t2s", "t3s"] {
        assert!(r["times"][key].as_f64().unwrap() > 0.0, "{key}");
    }
    let fid = r["fidelity"].as_array().unwrap();
    assert_eq!(fid.len(), 3);
    assert!((fid[0]["exact"].as_f64().unwrap() - c).abs() < 1e-9);
    assert!(fid[0]["i0"].is_null());
    for key in ["t", "exact", "i0", "ipi", "ib1", "ib2"] {
        assert!(fid[2][key].as_f64().is_some(), "{key}");
    }
    assert_ne!(r["dynamical_phase"], "gapless-none");
}

#[test]
fn report_is_in_units_of_j() {
    let a = report(&["--h", "0.5", "--gamma", "6", "--x", "2", "--t", "1"]);
    let b = report(&["--J", "2", "--h", "0.5", "--gamma", "6", "--x", "2", "--t", "1"]);
    assert_eq!(b["params"]["J"], 2.0);
    assert_eq!(a["spread"], b["spread"]);
    assert_eq!(a["times"], b["times"]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["report", "--h=-1", "--gamma", "1"][..],
        &["report", "--h", "0.5", "--gamma", "1", "--J", "0"],
        &["report", "--h", "0.5", "--gamma", "1", "--x", "3"],
        &["report", "--h", "0.5"],
        &["report", "--h", "0.5", "--gamma", "1", "--eps", "2"],
        &["scan", "--h", "0:1:1", "--gamma", "0:5:3"],
        &["scan", "--h", "0:1:3"],
        &["oracle", "--n", "7", "--h", "0.5", "--gamma", "1"],
        &["frobnicate"],
    ] {
        assert_eq!(nhil(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_failure_exits_three() {
    let h = std::f64::consts::FRAC_PI_4.cos();
    let gc = ModelParams::new(1.0, h, 0.0).unwrap().gamma_critical();
    let out = nhil(&["oracle", "--n", "4", "--h", &h.to_string(), "--gamma", &gc.to_string()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exceptional"), "{err}");
}

#[test]
fn small_scan_shape() {
    let out = nhil(&["scan", "--h", "0:1:3", "--gamma", "0:5:3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# J="));
    assert_eq!(lines[1], "h,gamma,region,dyn_phase,spread,xi,t1_star,t2_star,t3_star");
    assert_eq!(lines.len(), 11);
    let rows: Vec<Vec<&str>> = lines[2..].iter().map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 9));
    let hs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(hs, vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]);
    let gs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(&gs[..3], &[0.0, 2.5, 5.0]);
    for r in &rows {
        let mantissa = r[4].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{}", r[4]);
    }
    let gapless = &rows[1];
    assert_eq!(gapless[3], "gapless-none");
    assert!(gapless[5..].iter().all(|c| c.is_empty()));
    let gapped = &rows[2];
    assert!(gapped[5..].iter().all(|c| c.parse::<f64>().unwrap() > 0.0));
}

#[test]
fn scan_regions_match_static_classifier() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.json");
    std::fs::write(&cfg, r#"{"h_range": [0, 3, 13], "gamma_range": [0, 8, 17], "quantities": ["phase"]}"#).unwrap();
    let csv = dir.path().join("out.csv");
    let out = nhil(&["scan", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut n = 0;
    for line in text.lines().skip(2) {
        let r: Vec<&str> = line.split(',').collect();
        let p = ModelParams::new(1.0, r[0].parse().unwrap(), r[1].parse().unwrap()).unwrap();
        assert_eq!(r[2], classify_static(&p, CRITICAL_TOL).region.label(), "{line}");
        assert!(r[3..].iter().all(|c| c.is_empty()));
        n += 1;
    }
    assert_eq!(n, 13 * 17);
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let args = ["scan", "--h", "0:3:21", "--gamma", "0:8:21"];
    let one = nhil(&[&args[..], &["--threads", "1"]].concat());
    let four = nhil(&[&args[..], &["--threads", "4"]].concat());
    let again = nhil(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_nhil")).args(args).env("NHIL_THREADS", "3").output().unwrap();
    assert_eq!(env.stdout, one.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_nhil")).args(args).env("NHIL_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"h_range\": [0, 1, 3],\n  \"gamma_range\": [0, 5, 3,\n}").unwrap();
    let out = nhil(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    std::fs::write(&cfg, r#"{"h_range": [0, 1, 3], "gamma_range": [0, 5, 1]}"#).unwrap();
    let out = nhil(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_range"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.json");
    std::fs::write(&cfg, r#"{"h_range": [0, 1, 5], "gamma_range": [0, 5, 5], "J": 2}"#).unwrap();
    let out = nhil(&["scan", "--config", cfg.to_str().unwrap(), "--h", "0:1:2", "--J", "1"]);
    let text = stdout(&out);
    assert!(text.starts_with("# J=1.0000000000000000e0\n"));
    assert_eq!(text.lines().count(), 2 + 2 * 5);
}

#[test]
fn oracle_table_passes() {
    let out = nhil(&["oracle", "--n", "6", "--h", "0.5", "--gamma", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().skip(2).all(|l| l.ends_with("pass")), "{text}");
    assert!(text.contains("even spectrum") && text.contains("Wick correlator"));
}

#[test]
fn oracle_tolerance_flag_can_fail_checks() {
    let out = nhil(&["oracle", "--n", "6", "--h", "0.5", "--gamma", "6", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("FAIL"));
}
