use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_cbs-complexity");
const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn recurrence_small_value() {
    assert_eq!(stdout(&["recurrence", "--r", "2", "--s", "1"]), "5\n");
    assert_eq!(stdout(&["recurrence", "--r", "2", "--s", "1", "--backend", "log"]), "2.321928\n");
}

#[test]
fn recurrence_over_ceiling_is_a_domain_error() {
    let out = run(&["recurrence", "--r", "2000", "--s", "100", "--exact-ceiling", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--n", "5", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["plot", "--mode", "log", "--n-min", "2", "--n-max", "8"]).status.code(), Some(2));
}

#[test]
fn bounds_row_one() {
    let text = stdout(&["bounds", "--n", "9776", "--k", "8", "--c", "120"]);
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["org_log2", "9384960.000000"]));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["bounds", "--n", "9776", "--k", "8", "--c", "120", "--json"])).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["report"]["org"], 9_384_960.0);
}

#[test]
fn bounds_reject_tiny_graphs() {
    assert_eq!(run(&["bounds", "--n", "3", "--k", "1", "--c", "2"]).status.code(), Some(1));
}

#[test]
fn table_keeps_input_order() {
    let input = "name,n,k,C\nfirst,9776,8,120\nsecond,2304,64,70\nthird,3687,128,100\n";
    let mut child = Command::new(BIN)
        .arg("table")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "name,n,k,C,org_log2,rec_ind_log2,rec_gf_log2,ratio_log2,org_exp10,rec_ind_exp10,rec_gf_exp10"
    );
    let rows = csv_rows(&text);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["first", "second", "third"]);
    assert_eq!(rows[0][4..].join(","), "9384960.000000,22237.027361,14109.814666,9370850.185334,7,5,5");
}

#[test]
fn plot_log_mode_is_monotone() {
    let rows = csv_rows(&stdout(&["plot", "--mode", "log", "--n-min", "16", "--n-max", "64"]));
    assert_eq!(rows.len(), 49);
    let org: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(org.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn plot_rows_are_ordered() {
    for mode in ["log", "sqrt", "linear"] {
        for row in csv_rows(&stdout(&["plot", "--mode", mode, "--n-min", "16", "--n-max", "40"])) {
            let v: Vec<f64> = row[2..6].iter().map(|x| x.parse().unwrap()).collect();
            assert!(v[2] <= v[1] && v[1] <= v[0], "{mode}: {row:?}");
            assert!(v[3] <= v[2], "{mode}: {row:?}");
            assert!(row[1..6].iter().skip(1).all(|x| x.split('.').nth(1).unwrap().len() == 6));
        }
    }
    let linear = csv_rows(&stdout(&["plot", "--mode", "linear", "--n-min", "16", "--n-max", "16"]));
    assert_eq!(linear[0][1], "16");
}

#[test]
fn mdd_layers_for_the_center() {
    let text = stdout(&["mdd", "--open", "5", "--start", "2,2", "--goal", "2,2", "--cost", "2"]);
    assert_eq!(text, "t,exact,eq1_bound\n0,1,0\n1,5,4\n2,1,0\n");
    assert_eq!(
        run(&["mdd", "--open", "5", "--start", "0,0", "--goal", "4,4", "--cost", "3"]).status.code(),
        Some(1)
    );
}

#[test]
fn genfunc_modes() {
    let text = stdout(&["genfunc", "--r", "10", "--s", "2"]);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("q2,multiple,1.000000000,1.000000000,0.000000"));
    let out = run(&["genfunc", "--r", "3", "--s", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("q3"));
    let series = stdout(&["genfunc", "--series", "2", "1"]);
    assert!(series.contains("\n2,1,5\n"));
    assert!(stdout(&["genfunc", "--linear", "10", "--s", "20"]).trim().parse::<f64>().is_ok());
}

#[test]
fn solve_fixture_in_both_modes() {
    let map = format!("{FIXTURES}/small.map");
    let scen = format!("{FIXTURES}/small.scen");
    let text = stdout(&["solve", "--map", &map, "--scen", &scen, "--agents", "3"]);
    assert!(text.starts_with("cost 7\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("bound ")).count(), 3);
    let json: serde_json::Value = serde_json::from_str(&stdout(&[
        "solve", "--map", &map, "--scen", &scen, "--agents", "3", "--disjoint", "--json",
    ]))
    .unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["cost"], 7);
    assert_eq!(json["paths"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["solve", "--map", &map, "--scen", &scen, "--agents", "0"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["plot", "--mode", "sqrt", "--n-min", "4", "--n-max", "200"];
    assert_eq!(stdout(&args), stdout(&args));
}
