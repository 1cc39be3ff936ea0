use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cdlaplace"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cdlaplace-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn transform_writes_one_row_per_point() {
    let out = scratch("transform");
    let cfg = configs().join("transform.json");
    let o = run(&["transform", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("transform.csv"));
    assert_eq!(header, ["p0", "p1", "f0", "f1", "error"]);
    assert_eq!(rows.len(), 5);
    // 1 / (1 + p) for exp_decay
    for r in &rows {
        let (a, b): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let d = (1.0 + a) * (1.0 + a) + b * b;
        let (re, im): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((re - (1.0 + a) / d).abs() < 1e-9 && (im + b / d).abs() < 1e-9);
    }
}

#[test]
fn out_of_strip_point_exits_two() {
    let out = scratch("strip");
    let cfg = write_config(&out, r#"{"kernel":{"n":1},"original":{"name":"exp_decay"},"p":{"points":[[-2.0,1.0]]}}"#);
    let o = run(&["transform", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strip"));
}

#[test]
fn kernel_modes_coincide_for_one_dimension() {
    let cfg = configs().join("transform.json");
    let (a, b) = (scratch("mode-s"), scratch("mode-c"));
    assert!(run(&["transform", "--config", cfg.to_str().unwrap(), "--mode", "spherical"], &a).status.success());
    assert!(run(&["transform", "--config", cfg.to_str().unwrap(), "--mode", "cartesian"], &b).status.success());
    assert_eq!(std::fs::read(a.join("transform.csv")).unwrap(), std::fs::read(b.join("transform.csv")).unwrap());
}

#[test]
fn verify_algebra_passes() {
    let out = scratch("verify");
    let o = run(&["verify", "algebra", "--seed", "3"], &out);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["verdict"] != "FAIL"));
    assert_eq!(v["summary"]["fail"], 0);
}

#[test]
fn verify_derivative_reports_residuals() {
    let out = scratch("verify-deriv");
    let o = run(&["verify", "derivative-cartesian"], &out);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verify.json")).unwrap()).unwrap();
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["verdict"], "PASS");
        assert!(c["residual"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn unknown_check_id_exits_one() {
    let out = scratch("unknown");
    let o = run(&["verify", "no-such-check"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("verify.json").exists());
}

#[test]
fn fundsol_matches_the_newtonian_kernel() {
    let out = scratch("fundsol");
    let cfg = configs().join("fundsol.json");
    let o = run(&["fundsol", "--config", cfg.to_str().unwrap(), "--svg"], &out);
    assert!(o.status.success());
    let (header, rows) = read_csv(&out.join("fundsol.csv"));
    assert_eq!(header, ["r", "psi", "error"]);
    assert_eq!(rows.len(), 16);
    for r in rows {
        let (x, v): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!((v + 1.0 / (4.0 * PI * x)).abs() < 1e-14);
    }
    let svg = std::fs::read_to_string(out.join("fundsol.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline") && !svg.contains("href"));
}

#[test]
fn fundsol_reports_both_constants_in_four_dimensions() {
    let out = scratch("fundsol4");
    let cfg = write_config(&out, r#"{"fundsol":{"n":4,"radii":{"points":[[1.0],[2.0]]},"convention":"scaled"}}"#);
    assert!(run(&["fundsol", "--config", &cfg], &out).status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fundsol.json")).unwrap()).unwrap();
    let s = &v["sigma"];
    let ratio = s["constant_standard"].as_f64().unwrap() / s["constant_scaled"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);
}

#[test]
fn ode_solve_has_small_residuals() {
    let out = scratch("ode");
    let cfg = configs().join("ode.json");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--svg"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("solve.csv"));
    assert_eq!(header.last().unwrap(), "residual");
    let res: Vec<f64> = rows.iter().filter(|r| !r.last().unwrap().is_empty()).map(|r| r.last().unwrap().parse().unwrap()).collect();
    assert!(res.len() >= 9);
    assert!(res.iter().all(|&x| x <= 1e-3));
    assert!(out.join("solve.svg").exists());
}

#[test]
fn missing_operator_terms_exit_one() {
    let out = scratch("terms");
    let cfg = write_config(&out, r#"{"operator":{"mode":"t"},"source":{"name":"exp_decay"},"grid":{"points":[[1.0]]}}"#);
    assert_eq!(run(&["solve", "--config", &cfg], &out).status.code(), Some(1));
    let cfg = write_config(&out, r#"{"operator":{"terms":[]},"source":{"name":"exp_decay"},"grid":{"points":[[1.0]]}}"#);
    assert_eq!(run(&["solve", "--config", &cfg], &out).status.code(), Some(1));
}

#[test]
fn residual_above_tolerance_exits_three() {
    let out = scratch("restol");
    let body = std::fs::read_to_string(configs().join("ode.json")).unwrap().replace("\"residual_tol\": 1e-3", "\"residual_tol\": 1e-9");
    let cfg = write_config(&out, &body);
    assert_eq!(run(&["solve", "--config", &cfg], &out).status.code(), Some(3));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let out = scratch("fields");
    let cfg = write_config(&out, r#"{"kernel":{"n":1},"orignal":{"name":"exp_decay"}}"#);
    assert_eq!(run(&["transform", "--config", &cfg], &out).status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = configs().join("ode.json");
    let (a, b) = (scratch("rep-a"), scratch("rep-b"));
    for d in [&a, &b] {
        assert!(run(&["solve", "--config", cfg.to_str().unwrap(), "--svg"], d).status.success());
    }
    for f in ["solve.csv", "solve.json", "solve.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
