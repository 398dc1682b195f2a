use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn input(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "inputs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn hpfem(prob: &str, geometry: &str, extra: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hpfem"))
        .args(["-file-control", &input("control")])
        .args(["-file-phys", &input(&format!("physics_{prob}"))])
        .args(["-file-geometry", &input(geometry)])
        .args(["-prob", prob])
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_flag_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_hpfem"))
        .args(["-file-phys", &input("physics_galerkin")])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("file-control"));
}

#[test]
fn missing_file_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_hpfem"))
        .args(["-file-control", "/nonexistent/control"])
        .args(["-file-phys", &input("physics_galerkin")])
        .args(["-file-geometry", &input("cube")])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/control"));
}

#[test]
fn physics_mismatch_fails() {
    let o = Command::new(env!("CARGO_BIN_EXE_hpfem"))
        .args(["-file-control", &input("control")])
        .args(["-file-phys", &input("physics_galerkin")])
        .args(["-file-geometry", &input("cube")])
        .args(["-prob", "uw", "-job", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_job_fails() {
    let o = hpfem("galerkin", "cube", &["-job", "7"], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown job 7"));
}

#[test]
fn menu_href_then_quit() {
    let o = hpfem("galerkin", "cube", &[], "20\n0\n");
    assert!(o.status.success());
    assert!(stdout(&o).trim_end().ends_with("NRELES = 8"));
}

#[test]
fn menu_eof_quits() {
    let o = hpfem("galerkin", "cube", &[], "30\n40\n");
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("H1 error"));
    assert!(s.trim_end().ends_with("NRELES = 1"));
}

#[test]
fn menu_residual_unsupported_for_galerkin() {
    let o = hpfem("galerkin", "cube", &[], "30\n41\n31\n0\n");
    let s = stdout(&o);
    assert!(s.contains("unsupported"));
    assert!(s.contains("option 31 is unavailable"));
}

#[test]
fn patch_job_passes() {
    let o = hpfem("uw", "cube", &["-job", "3"], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).matches("PASS").count(), 6);
}

#[test]
fn uniform_job_rates() {
    let o = hpfem("galerkin", "cube", &["-job", "1", "-p", "1", "-maxsteps", "4"], "");
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "step,nreles,ndof,h1_error,l2_error,rate_h1,rate_l2,residual");
    assert_eq!(lines.len(), 5);
    let last: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(last[1], "512");
    let rate: f64 = last[5].parse().unwrap();
    assert!((rate - 1.0).abs() < 0.2, "rate {rate}");
}

#[test]
fn adaptive_job_writes_history_and_vtu() {
    let dir = tempfile::tempdir().unwrap();
    let o = hpfem(
        "primal",
        "cube2",
        &["-job", "2", "-maxsteps", "2", "-paraview-dir", dir.path().to_str().unwrap(), "-workers", "1"],
        "",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(s.lines().next(), Some("step,nreles,ndof,estimator,exact_error"));
    assert_eq!(rows.len(), 3);
    let nvtu = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "vtu"))
        .count();
    assert_eq!(nvtu, rows.len());
}

#[test]
fn quit_prints_menu_once() {
    let o = hpfem("galerkin", "cube", &["-job", "0"], "0\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("QUIT").count(), 1);
}

#[test]
fn uniform_job_p2_three_meshes() {
    let o = hpfem("galerkin", "cube", &["-job", "1", "-p", "2", "-maxsteps", "3"], "");
    assert!(o.status.success());
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let rate: f64 = rows[2].split(',').nth(5).unwrap().parse().unwrap();
    assert!((1.8..=2.2).contains(&rate), "rate {rate}");
}

#[test]
fn batch_output_is_reproducible() {
    let args = ["-job", "2", "-maxsteps", "2", "-solution", "layer"];
    let a = hpfem("uw", "cube2", &args, "");
    let b = hpfem("uw", "cube2", &[&args[..], &["-workers", "1"]].concat(), "");
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let est: Vec<f64> = stdout(&a)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(est.windows(2).all(|w| w[1] < w[0]), "{est:?}");
}
