use std::path::PathBuf;
use std::process::{Command, Output};

fn detsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detsurf")).args(args).output().expect("run detsurf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("detsurf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn detpoly_of_quaternion_fixture() {
    let o = detsurf(&["detpoly", "Q1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "x^4 + 2x^2y^2 + 2x^2z^2 + y^4 + 2y^2z^2 + z^4");
}

#[test]
fn check_exit_codes() {
    let o = detsurf(&["check", "T001"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "positive definite");

    // second slice zero: f = det(xI + zC) vanishes on the y-axis
    let text = "4 3 degenerate\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n\n0 1 0 0\n-1 0 0 0\n0 0 0 1\n0 0 -1 0\n";
    let p = scratch("degenerate.txt", text);
    let o = detsurf(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = detsurf(&["invariants", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn indefinite_tensor_exit_code() {
    // det(xI + y diag(1,-1)) = x^2 - y^2
    let text = "2 3 indefinite\n1 0\n0 1\n\n1 0\n0 -1\n\n0 0\n0 0\n";
    let p = scratch("indefinite.txt", text);
    let o = detsurf(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("indefinite"));
}

#[test]
fn parse_error_exit_code() {
    let p = scratch("broken.txt", "2 2\n1 0\n0 1\n");
    let o = detsurf(&["detpoly", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(detsurf(&["detpoly", "no-such-thing"]).status.code(), Some(2));
    assert_eq!(detsurf(&["orbit", "T001", "--group", "so3"]).status.code(), Some(2));
}

#[test]
fn accuracy_exit_code() {
    let o = detsurf(&["invariants", "T020", "--tol", "1e-12", "--max-cells", "2000", "--lattice-s", "8", "--lattice-t", "8"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invariants_csv_report() {
    let o = detsurf(&["invariants", "T001"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("label,volume,affine_area,centro_affine_area"));
    assert!(lines[1].starts_with("T001,2.91977940"), "{}", lines[1]);
}

#[test]
fn reports_are_byte_deterministic() {
    let a = detsurf(&["invariants", "T001", "Q1", "--format", "json"]);
    let b = detsurf(&["invariants", "T001", "Q1", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_detsurf"))
        .args(["invariants", "T001", "Q1", "--format", "json"])
        .env("RAYON_NUM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn compare_reports_verdict() {
    let o = detsurf(&["compare", "T001", "Q1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("left,right,verdict,evidence"));
    assert!(out.contains("T001,Q1,not_gl_equivalent"), "{out}");
    let same = stdout(&detsurf(&["compare", "T001", "T001"]));
    assert!(same.contains("T001-a,T001-b,inconclusive"), "{same}");
}

#[test]
fn orbit_rows_are_labelled() {
    let o = detsurf(&["orbit", "T001", "--group", "sl443", "--count", "2", "--seed", "5"]);
    assert!(o.status.success());
    let labels: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(labels, ["T001-0", "T001-1", "T001-2"]);
}

#[test]
fn census_and_singular_points() {
    let o = detsurf(&["census", "Q1", "--res-s", "32", "--res-t", "64"]);
    assert_eq!(stdout(&o), "k_plus,k_minus,k_zero,convex\n2048,0,0,true\n");
    let o = detsurf(&["census", "Q2", "--res-s", "33", "--res-t", "64", "--singular-tol", "1e-2"]);
    let out = stdout(&o);
    let mut sections = out.split("\n\n");
    let counts = sections.next().unwrap().lines().nth(1).unwrap();
    assert!(!counts.ends_with(",0,true"), "{counts}");
    assert!(sections.next().unwrap().lines().count() > 1);
}

#[test]
fn mesh_output() {
    let o = detsurf(&["mesh", "Q1", "--res-s", "8", "--res-t", "8"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("v ")).count(), 66);
    assert_eq!(out.lines().filter(|l| l.starts_with("f ")).count(), 128);
}

#[test]
fn fixtures_round_trip_through_files() {
    let list = stdout(&detsurf(&["fixtures"]));
    assert!(list.lines().any(|l| l == "T237"));
    for fmt in ["json", "text"] {
        let body = stdout(&detsurf(&["fixtures", "T001", "--format", fmt]));
        let p = scratch(&format!("t001.{fmt}"), &body);
        let from_file = stdout(&detsurf(&["detpoly", p.to_str().unwrap()]));
        assert_eq!(from_file, stdout(&detsurf(&["detpoly", "T001"])));
    }
}

#[test]
fn design_backend_from_file() {
    let ico = detsurf::quadrature::design_text(&detsurf::quadrature::icosahedron());
    let p = scratch("ico.txt", &ico);
    let o = detsurf(&["invariants", "Q1", "--backend", "design", "--design-file", p.to_str().unwrap(), "--design-strength", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Q1,4.188790204786,12.56637061436,12.56637061436"), "{}", stdout(&o));
    let o = detsurf(&["invariants", "Q1", "--backend", "design", "--design-file", p.to_str().unwrap(), "--design-strength", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(detsurf(&["invariants", "Q1", "--backend", "design"]).status.code(), Some(1));
}

#[test]
fn monte_carlo_backend() {
    let args = ["invariants", "T001", "--backend", "mc", "--mc-samples", "200000", "--seed", "3", "--format", "json"];
    let a = detsurf(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, detsurf(&args).stdout);
    let v: f64 = stdout(&a).split("\"volume\": ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((v - 2.9197794).abs() < 0.02, "{v}");
}
