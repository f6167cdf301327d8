use std::path::Path;
use std::process::{Command, Output};

fn rectpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rectpack"))
        .args(args)
        .env_remove("RECTPACK_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_instance(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn squares_seven_lists_both_boxes() {
    let o = rectpack(&["solve", "--family", "consecutive-squares", "--n", "7", "--mode", "all-optimal", "--emit", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("11×14, 7×22"), "{}", stdout(&o));
}

#[test]
fn first_optimal_area_matches_all_optimal() {
    let all = rectpack(&["solve", "--family", "equal-perimeter", "--n", "8", "--emit", "json"]);
    let first = rectpack(&["solve", "--family", "equal-perimeter", "--n", "8", "--mode", "first-optimal", "--emit", "json"]);
    let a: serde_json::Value = serde_json::from_slice(&all.stdout).unwrap();
    let f: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(a["optimal_area"], 128);
    assert_eq!(a["optimal_area"], f["optimal_area"]);
}

#[test]
fn contain_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "i.txt", "o\n2 2\n");
    let o = rectpack(&["solve", "--instance", &path, "--mode", "contain", "--box", "1x1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rectpack(&["solve", "--instance", &path, "--mode", "contain", "--box", "2x3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["solve", "--family", "consecutive-squares"][..],
        &["solve", "--family", "consecutive-squares", "--n", "3", "--mode", "contain"],
        &["solve", "--family", "nonsense", "--n", "3"],
        &["solve", "--family", "consecutive-squares", "--n", "3", "--c", "0"],
        &["solve", "--family", "consecutive-squares", "--n", "3", "--box", "2x2"],
    ] {
        let o = rectpack(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "bad.txt", "o\n2 x\n");
    let o = rectpack(&["solve", "--instance", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn time_limit_exits_three() {
    let o = rectpack(&["solve", "--family", "consecutive-squares", "--n", "20", "--time-limit", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn overflow_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "huge.txt", "o\n4294967296 4294967296\n4294967296 4294967296\n");
    let o = rectpack(&["solve", "--instance", &path]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_is_deterministic() {
    let args = ["solve", "--family", "unoriented-double-perimeter", "--n", "6", "--emit", "json"];
    let a = rectpack(&args);
    let b = rectpack(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let mut par = args.to_vec();
    par.push("--parallel");
    assert_eq!(rectpack(&par).stdout, a.stdout);
}

#[test]
fn high_precision_reports_rationals() {
    let o = rectpack(&["solve", "--family", "high-precision", "--n", "6", "--emit", "json", "--compare"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["instance"]["scale"], 420);
    assert_eq!(v["boxes"][0]["w"], 210);
    assert_eq!(v["boxes"][0]["h"], 749);
    assert_eq!(v["boxes"][0]["exact"], "1/2 × 107/60");
    assert!(String::from_utf8_lossy(&o.stderr).contains("reference PASS"));
}

#[test]
fn anytime_streams_improvements() {
    let o = rectpack(&["solve", "--family", "consecutive-squares", "--n", "6", "--mode", "anytime", "--emit", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("improved:"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["optimal_area"], 99);
}

#[test]
fn svg_files_and_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sq.svg");
    let o = rectpack(&[
        "solve", "--family", "consecutive-squares", "--n", "7", "--emit", "svg", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    // One drawing per optimal box.
    let first = std::fs::read_to_string(&out).unwrap();
    let second = std::fs::read_to_string(dir.path().join("sq-2.svg")).unwrap();
    assert_eq!(first.matches("<rect").count(), 8);
    assert_eq!(second.matches("<rect").count(), 8);

    let o = Command::new(env!("CARGO_BIN_EXE_rectpack"))
        .args(["solve", "--family", "squares", "--n", "4", "--emit", "json"])
        .env("RECTPACK_OUTPUT_DIR", dir.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("runs/consecutive-squares-4.json")).unwrap();
    assert!(text.contains("\"optimal_area\": 35"));
}

#[test]
fn generate_round_trips_through_solve() {
    let o = rectpack(&["generate", "--family", "oriented-equal-perimeter", "--n", "3"]);
    assert_eq!(stdout(&o), "o\n1 3\n2 2\n3 1\n");
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "ep3.txt", &stdout(&o));
    let o = rectpack(&["solve", "--instance", &path, "--emit", "text"]);
    assert!(stdout(&o).contains("3×4"), "{}", stdout(&o));
}
