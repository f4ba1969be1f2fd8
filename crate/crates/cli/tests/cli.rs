use std::io::Write;
use std::process::{Command, Output};

fn tmgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmgeom")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const RN: [&str; 6] = ["--catalog", "reissner_nordstrom", "--param", "M=1", "--param", "Q=0.3"];

#[test]
fn verify_reissner_nordstrom_passes() {
    let mut args = vec!["verify"];
    args.extend(RN);
    args.extend(["--alpha", "star", "--seed", "42", "--samples", "4"]);
    let o = tmgeom(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = reports.as_array().unwrap();
    assert!(reports.iter().any(|r| r["check"] == "conservation"));
    assert!(reports.iter().all(|r| r["pass"] == true && r["seed"] == 42));
}

#[test]
fn verify_output_is_reproducible() {
    let mut args = vec!["verify"];
    args.extend(RN);
    args.extend(["--seed", "7", "--samples", "3", "--format", "csv"]);
    let a = tmgeom(&args);
    let b = tmgeom(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("check,model,seed"));
}

#[test]
fn failing_checks_exit_one() {
    let o = tmgeom(&[
        "verify", "--catalog", "uniform_field", "--param", "E0=0.1", "--field-equations", "on",
        "--check", "generalized_einstein", "--samples", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("generalized_einstein"));
}

#[test]
fn theorem1_uniform_field_example() {
    let o = tmgeom(&[
        "theorem1", "--catalog", "uniform_field", "--param", "E0=0.1", "--alpha", "1", "--x", "0,0,0,0", "--y", "2,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["R", "r", "div_term", "quad_term", "residual"] {
        assert!(t[key].is_number(), "{key}");
    }
    assert!((t["quad_term"].as_f64().unwrap() + 0.03).abs() < 1e-14);
    assert!(t["residual"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn geodesic_in_flat_space_is_a_straight_line() {
    let o = tmgeom(&[
        "geodesic", "--catalog", "minkowski", "--alpha", "0", "--x0", "0,0,0,0", "--y0", "1,0,0,0", "--t-end", "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x0,x1,x2,x3,y0,y1,y2,y3");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    for r in rows {
        assert!((r[1] - r[0]).abs() < 1e-12);
        assert_eq!(&r[2..5], &[0.0, 0.0, 0.0]);
    }
}

#[test]
fn deviation_reports_w_columns() {
    let o = tmgeom(&[
        "deviation", "--catalog", "schwarzschild", "--param", "M=1", "--x0", "0,10,1.5,0", "--y0", "1.2,0,0,0.03",
        "--w0", "0,0.1,0,0", "--dw0", "0,0,0,0", "--t-end", "5", "--samples", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("t,x0,x1,x2,x3,y0,y1,y2,y3,w0,w1,w2,w3,W0,W1,W2,W3\n"));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn model_file_is_loaded() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"name": "flat_file", "coords": ["t", "x", "y", "z"],
            "metric": [["1","0","0","0"],["0","-1","0","0"],["0","0","-1","0"],["0","0","0","-1"]],
            "potential": ["-0.1*x", "0", "0", "0"], "alpha": 1}}"#
    )
    .unwrap();
    let path = f.path().to_str().unwrap();
    let o = tmgeom(&["inspect", "--model", path, "--x", "0,0,0,0", "--y", "2,0,0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"]["name"], "flat_file");
    let lorentz = v["tensors"].as_array().unwrap().iter().find(|t| t["name"] == "lorentz_term").unwrap();
    assert!((lorentz["components"][1].as_f64().unwrap() + 0.2).abs() < 1e-15);
}

#[test]
fn parse_errors_carry_spans_and_exit_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"name": "bad", "coords": ["t", "x", "y", "z"],
            "metric": [["1 +* x","0","0","0"],["0","-1","0","0"],["0","0","-1","0"],["0","0","0","-1"]]}}"#
    )
    .unwrap();
    let o = tmgeom(&["inspect", "--model", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("metric[0][0]") && stderr(&o).contains("3..4"), "{}", stderr(&o));
}

#[test]
fn singular_points_exit_three() {
    let o = tmgeom(&["theorem1", "--catalog", "schwarzschild", "--param", "M=1", "--x", "0,1,1,0", "--y", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(3));
    let o = tmgeom(&["theorem1", "--catalog", "minkowski", "--x", "0,0,0,0", "--y", "1,1,0,0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["inspect", "--catalog", "minkowski", "--bogus"],
        vec!["inspect"],
        vec!["inspect", "--catalog", "minkowski", "--model", "m.json"],
        vec!["theorem1", "--catalog", "minkowski", "--x", "0,0,0", "--y", "1,0,0,0"],
        vec!["inspect", "--catalog", "kerr"],
        vec!["inspect", "--catalog", "minkowski", "--alpha", "half"],
        vec!["nonsense"],
    ] {
        let o = tmgeom(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn help_lists_every_flag() {
    let common = ["--catalog", "--model", "--param", "--alpha"];
    let cases: [(&str, &[&str]); 7] = [
        ("inspect", &["--x", "--y", "--format"]),
        ("verify", &["--seed", "--samples", "--tol-tier1", "--tol-tier2", "--tol-tier3", "--field-equations", "--check", "--format"]),
        ("geodesic", &["--x0", "--y0", "--t-end", "--samples", "--tol", "--format"]),
        ("deviation", &["--x0", "--y0", "--w0", "--dw0", "--t-end", "--samples", "--format"]),
        ("theorem1", &["--x", "--y", "--format"]),
        ("efe", &["--x", "--y", "--format"]),
        ("integrate-volume", &["--x", "--nodes", "--format"]),
    ];
    for (cmd, flags) in cases {
        let o = tmgeom(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in common.iter().chain(flags) {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
}

#[test]
fn integrate_volume_reports_unit_volume() {
    let o = tmgeom(&["integrate-volume", "--catalog", "schwarzschild", "--param", "M=1", "--x", "0,6,1,0", "--nodes", "4,12,12,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["volume"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((v["det_v"].as_f64().unwrap() + v["det_g"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn efe_vanishes_on_reissner_nordstrom() {
    let mut args = vec!["efe"];
    args.extend(RN);
    args.extend(["--x", "0,5,1,0"]);
    let o = tmgeom(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let worst = v["field_equations"]["variational"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap().iter().map(|c| c.as_f64().unwrap().abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-14);
}
