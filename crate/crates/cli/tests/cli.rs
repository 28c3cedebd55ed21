use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gncgcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gncgcp")).args(args).output().unwrap()
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(gncgcp(&["--help"]).status.code(), Some(0));
    assert_eq!(gncgcp(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(gncgcp(&[]).status.code(), Some(1));
    assert_eq!(gncgcp(&["qap"]).status.code(), Some(1));
    assert_eq!(gncgcp(&["synthetic", "--family", "XYZ"]).status.code(), Some(1));
    assert_eq!(gncgcp(&["--dzeta", "0", "qap", "x.dat"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let one = write(&dir, "one.dat", "1 5 3\n");
    assert_eq!(gncgcp(&["qap", &one, "--algorithm", "sgm"]).status.code(), Some(1));
}

#[test]
fn input_errors_exit_2_with_context() {
    let missing = gncgcp(&["qap", "does-not-exist.dat"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.dat", "2\n1 2\n3 x\n\n1 2\n3 4\n");
    let out = gncgcp(&["qap", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.dat") && err.contains("line 3"), "{err}");
}

#[test]
fn overflow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let big = write(&dir, "big.dat", "2\n1e200 1e200\n1e200 1e200\n1e200 1e200\n1e200 1e200\n");
    assert_eq!(gncgcp(&["qap", &big]).status.code(), Some(3));
}

#[test]
fn single_facility_costs_fifteen() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(&dir, "one.dat", "1 5 3\n");
    let out = gncgcp(&["qap", &one]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(col("cost"), "15.0");
    assert_eq!(col("opt"), "15.0");
    assert_eq!(col("solution"), "0");
}

#[test]
fn qaplib_run_reports_the_known_optimum() {
    let path = data("qaplib/chr12c.dat");
    let out = gncgcp(&["--format", "json", "qap", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rec = &v[0];
    assert_eq!(rec["opt"], 11156.0);
    assert!(rec["cost"].as_f64().unwrap() >= 11156.0);
    assert!(rec["trace"].as_array().unwrap().len() > 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("awar"));
}

#[test]
fn match_finds_the_embedded_path() {
    let path = data("pairs/path_in_square.txt");
    let out = gncgcp(&["match", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",0.0,0.0,0.0,"), "{row}");
}

#[test]
fn synthetic_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = gncgcp(&[
            "synthetic", "--family", "UPL", "--sizes", "6", "--betas", "0,0.3", "--trials", "3", "--seed", "9",
            "--algorithm", "gm", "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn synthetic_summary_has_one_row_per_cell() {
    let out = gncgcp(&[
        "synthetic", "--family", "DBN", "--mode", "subgraph", "--sizes", "7", "--n-model", "3", "--betas", "0,0.5",
        "--trials", "2", "--summary",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("family,algorithm,n_model,n_data,beta"));
    assert_eq!(text.lines().count(), 3);
}
