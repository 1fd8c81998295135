use std::process::Command;

use polyheat::closed_form::{star_kernel, LegPoint};

fn polyheat(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_polyheat")).args(args).output().expect("binary runs")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tripod_kernel_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("tripod.json");
    let b = polyheat(&["build", "--library", "star:3", "--format", "json", "--out", spec.to_str().unwrap()]);
    assert!(b.status.success());
    let o = polyheat(&["kernel", "--spec", spec.to_str().unwrap(), "--t", "0.05", "--p", "v:center", "--q", "e1:0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p,q,value,trunc_error");
    assert_eq!(lines.len(), 2);
    let f: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&f[..3], ["0.05", "v:center", "e1:0.3"]);
    let v: f64 = f[3].parse().unwrap();
    let exact = star_kernel(3, LegPoint::center(), LegPoint::new(0, 0.3), 0.05);
    assert!((v - exact).abs() < 0.005 * exact, "{v} vs {exact}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(polyheat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(polyheat(&["kernel", "--library", "star", "--t", "0.1", "--p", "v:nope", "--q", "e1:0.3"]).status.code(), Some(2));
    assert_eq!(polyheat(&["build", "--library", "moebius"]).status.code(), Some(2));
    assert_eq!(polyheat(&["compare", "--library", "z1", "--rho", "4", "--times", "50"]).status.code(), Some(2));
    assert_eq!(polyheat(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(polyheat(&["--help"]).status.code(), Some(0));
}

#[test]
fn twostar_suite_passes() {
    let o = polyheat(&["verify", "--suite", "twostar"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C3") && stdout(&o).contains("PASS"));
}

#[test]
fn group_walk_is_exact_and_deterministic() {
    let a = polyheat(&["group-walk", "--group", "f2", "--steps", "4"]);
    let b = polyheat(&["group-walk", "--group", "f2", "--steps", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let last = stdout(&a).lines().last().unwrap().to_string();
    assert_eq!(last, format!("4,{:.15e}", 7.0 / 64.0));
}

#[test]
fn verify_report_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("r{k}.csv"))).collect();
    for p in &paths {
        let o = polyheat(&["verify", "--suite", "group", "--quick", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("suite,id,check,measured,bound,status,detail\n"));
}

#[test]
fn compare_ratio_window() {
    let o = polyheat(&["compare", "--library", "z1", "--rho", "20", "--times", "10,20,50", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let (lo, hi) = (v["ratio_min"].as_f64().unwrap(), v["ratio_max"].as_f64().unwrap());
    assert!(lo >= 1.6 && hi <= 2.4, "{lo} {hi}");
}

#[test]
fn whitney_and_poincare_audits() {
    let o = polyheat(&["whitney", "--library", "star", "--center", "v:center", "--r", "0.5", "--points", "50", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = polyheat(&["poincare", "--group", "z2", "--r", "3", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = polyheat(&["poincare", "--library", "interval", "--center", "e1:0.5", "--r", "0.3", "--h", "0.01", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
