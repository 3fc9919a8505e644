use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn folner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folner")).args(args).output().expect("run folner")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn verify_passes_at_fifty_with_five_percent() {
    let o = folner(&["verify", "--config", &config("verify_laplacian.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.starts_with("n,pass,violated,ratio,phi_dev\n"));
    assert!(report.contains("50,true,"), "{report}");
    assert!(report.contains("9801/10201"), "{report}");
}

#[test]
fn verify_fails_at_fifty_with_one_percent_and_passes_at_two_hundred() {
    let o = folner(&["verify", "--config", &config("verify_laplacian.json"), "--eps", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("50,false,ratio"), "{}", stdout(&o));
    let o = folner(&["verify", "--config", &config("verify_laplacian.json"), "--eps", "0.01", "--n", "200"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn kernel_on_cyclic_two_reports_one_half() {
    let o = folner(&["kernel", "--config", &config("kernel_c2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,dim_P,dim_S,ratio,a_n,b_n,phi_dev,seconds\n1,2,2,1,1/2,1/2,0,0.000000\n");
}

#[test]
fn kernel_json_carries_backend_metadata() {
    let op = fixture("diag_one_minus_u_z.json");
    let o = folner(&["kernel", "--model", "z", "--operator", op.to_str().unwrap(), "--n", "1..3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["a_n"], "5/7");
    assert_eq!(rows[2]["backend"], "exact");
}

#[test]
fn density_mass_is_one() {
    let o = folner(&["density", "--config", &config("density_shift.json")]);
    assert_eq!(o.status.code(), Some(0));
    let report = stdout(&o);
    let lines: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(lines.len(), 64);
    let total: f64 = lines.iter().map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "total mass {total}");
}

#[test]
fn dimreport_lists_lattice_ratios() {
    let o = folner(&["dimreport", "--config", &config("dimreport_boxes.json")]);
    assert_eq!(o.status.code(), Some(0));
    let ratios: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(3).unwrap().to_string()).collect();
    assert_eq!(ratios, ["9/25", "25/49", "49/81", "81/121", "121/169"]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["kernel", "--config", &config("kernel_c2.json")],
        vec!["density", "--config", &config("density_shift.json"), "--jobs", "2"],
        vec!["dimreport", "--config", &config("dimreport_boxes.json"), "--format", "json"],
    ] {
        let a = folner(&args);
        let b = folner(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = folner(&["dimreport", "--model", "z", "--n", "1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("n,dim_P,dim_S,ratio,rel_dim\n1,3,1,1/3,1/3\n"), "{text}");
}

#[test]
fn missing_operator_file_is_a_config_error() {
    let o = folner(&["kernel", "--model", "z", "--operator", "/nonexistent/op.json", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("operators"), "{}", stderr(&o));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"model": "z2", "schedule": [4, 2]}"#).unwrap();
    let o = folner(&["dimreport", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`schedule`"), "{}", stderr(&o));
    std::fs::write(&path, r#"{"model": "z2", "schedule": [2], "colour": 1}"#).unwrap();
    let o = folner(&["dimreport", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_windows_come_with_advice() {
    let o = folner(&["verify", "--config", &config("verify_laplacian.json"), "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("smallest admissible window is n = 1"), "{}", stderr(&o));
}

#[test]
fn inexact_phases_are_numerical_failures() {
    let op = fixture("laplacian_z2.json");
    let o = folner(&["kernel", "--model", "rotation:0.3819", "--operator", op.to_str().unwrap(), "--n", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = folner(&["kernel", "--model", "rotation:0.3819", "--operator", op.to_str().unwrap(), "--n", "2", "--backend", "float"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2,13.000000000000,5.000000000000,"), "{}", stdout(&o));
}

#[test]
fn operator_documents_can_name_their_model() {
    let op = fixture("one_plus_u_c2.json");
    let o = folner(&["kernel", "--operator", op.to_str().unwrap(), "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("1,2,2,1,1/2,1/2,0,0.000000\n"));
    let o = folner(&["kernel", "--model", "z", "--operator", op.to_str().unwrap(), "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("different model"), "{}", stderr(&o));
}
