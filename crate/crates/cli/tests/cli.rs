use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel).to_string_lossy().into_owned()
}

fn cnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnp")).args(args).output().expect("cnp runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn lub_in_n2() {
    let out = cnp(&["qlo", "lub", "--monoid", "n2", "--x", "(1,0)", "--y", "(0,1)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"lub":"(1,1)"}"#);
}

#[test]
fn lub_in_free_monoid_is_infinite() {
    let out = cnp(&["qlo", "lub", "--monoid", &data("raag/free2.json"), "--x", "a", "--y", "b"]);
    assert_eq!(json_of(&out), json!({"lub": "infinity"}));
}

#[test]
fn mce_on_square_graph() {
    let out = cnp(&["kgraph", "mce", &data("kgraphs/square.json"), "--mu", "e", "--nu", "f"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out), json!(["ef"]));
}

#[test]
fn counterexample_scenario() {
    let out = cnp(&["scenario", "counterexample", "--format", "pretty"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(r#""phi_tilde_injective": false"#));
    let v = json_of(&out);
    let steps = v["steps"].as_array().unwrap();
    assert!(steps.iter().all(|s| s["reproduced"] == json!(true)));
    assert_eq!(steps[1]["detail"]["q"], json!("(1,0)"));
    assert_eq!(steps[1]["detail"]["phi_tilde_injective"], json!(false));
}

#[test]
fn late_source_is_not_exhaustive() {
    let out = cnp(&["kgraph", "exhaustive", &data("kgraphs/late_source.json"), "--vertex", "v", "--set", "e"]);
    assert_eq!(json_of(&out), json!({"exhaustive": false, "counterexample": "fk"}));
}

#[test]
fn ck_exit_codes() {
    let square = data("kgraphs/square.json");
    assert_eq!(code(&cnp(&["kgraph", "ck", &square])), 0);
    let out = cnp(&["kgraph", "ck", &square, "--family", "toeplitz"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_of(&out)["pass"], json!(false));
    assert_eq!(code(&cnp(&["kgraph", "ck", &square, "--family", "toeplitz", "--toeplitz-only"])), 0);
}

#[test]
fn rep_check_passes_on_swap() {
    let out = cnp(&[
        "rep",
        "check",
        "--system",
        &data("systems/swap_n2.json"),
        "--rep",
        &data("reps/swap_n2.json"),
        "--axioms",
        "T,N,CP,Fowler",
    ]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 6);
}

#[test]
fn malformed_json_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"k\": 2,\n \"vertices\": [\"v\"\n}").unwrap();
    let out = cnp(&["kgraph", "info", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:1"), "{err}");
}

#[test]
fn invalid_graph_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, r#"{"k": 2, "vertices": ["v"], "edges": [{"id": "e", "color": 1, "range": "v", "source": "z"}], "squares": []}"#)
        .unwrap();
    let out = cnp(&["kgraph", "info", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("g.json"));
}

#[test]
fn bad_element_exits_two() {
    let out = cnp(&["qlo", "lub", "--monoid", "n2", "--x", "(1,0,0)", "--y", "(0,1)"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn violated_hypotheses_exit_three() {
    let out = cnp(&["boundary", "relation", "--raag", &data("raag/free2.json"), "--foundation", "a"]);
    assert_eq!(code(&out), 3);
    assert!(json_of(&out)["reason"].as_str().unwrap().contains("not a foundation set"));

    let out = cnp(&[
        "psys",
        "vanish",
        &data("systems/counterexample.json"),
        "--family",
        &data("families/lex_second_vertex.json"),
    ]);
    assert_eq!(code(&out), 3);
    assert!(json_of(&out)["violated_hypothesis"].as_str().unwrap().contains("not injective"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.json");
    std::fs::write(&path, r#"{"vertices": ["u"], "basis": [{"id": "a", "source": "u", "range": "u"}]}"#).unwrap();
    let out = cnp(&["scenario", "tensor-power", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("acyclic"));
}

#[test]
fn injectivity_failure_exits_one() {
    let out = cnp(&["psys", "injective", &data("systems/counterexample.json"), "--q", "(1,0)"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_of(&out)["points"][0]["kernel"], json!(["2"]));
}

#[test]
fn boundary_commands() {
    let path3 = data("raag/path3.json");
    let out = cnp(&["boundary", "defect", "--raag", &path3, "--foundation", "a,c", "--s", "ab"]);
    let v = json_of(&out);
    assert_eq!(v["value"], json!(0));
    assert_eq!(v["inclusion_exclusion"], json!(0));
    let out = cnp(&["boundary", "check", "--raag", &path3, "--radius", "3", "--relations", "1,2,3"]);
    assert_eq!(code(&out), 0);
    let out = cnp(&["boundary", "check", "--family", &data("reps/n2_unitaries.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["relations"].as_array().unwrap().len(), 4);
}

#[test]
fn scenarios_reproduce() {
    for args in [
        vec!["scenario".to_string(), "kgraph".into(), data("kgraphs/late_source.json")],
        vec!["scenario".into(), "kgraph".into(), data("kgraphs/square.json")],
        vec!["scenario".into(), "raag".into(), data("raag/square4.json")],
        vec!["scenario".into(), "tensor-power".into(), data("bimodules/chain.json")],
        vec!["scenario".into(), "trivial-cp".into(), "n2".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = cnp(&args);
        assert_eq!(code(&out), 0, "{args:?}");
        assert_eq!(json_of(&out)["reproduced"], json!(true));
    }
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["scenario".to_string(), "counterexample".into()],
        vec!["kgraph".into(), "exhaustive-sets".into(), data("kgraphs/twisted.json"), "--vertex".into(), "v".into()],
        vec!["scenario".into(), "trivial-cp".into(), data("raag/square4.json")],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = cnp(&args);
        let b = cnp(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn text_format_is_plain() {
    let out = cnp(&["qlo", "components", "--monoid", &data("raag/path3.json"), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("- a, c"), "{text}");
}
