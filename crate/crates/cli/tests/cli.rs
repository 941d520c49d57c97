use std::process::{Command, Output};

use serde_json::{json, Value};

fn k3tk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3tk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = k3tk(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_code(args: &[&str]) -> i32 {
    let out = k3tk(args);
    let body: Value = serde_json::from_slice(&out.stdout).expect("errors are JSON");
    assert!(body.get("error").is_some());
    out.status.code().unwrap()
}

#[test]
fn pair_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let v = dir.path().join("v.json");
    std::fs::write(&s, r#"{"rank": 1, "gram": [[2]]}"#).unwrap();
    std::fs::write(&v, r#"{"r": 1, "c1": [0], "a": 1}"#).unwrap();
    let (s, v) = (s.to_str().unwrap(), v.to_str().unwrap());
    assert_eq!(ok_json(&["pair", "--surface", s, "--x", v, "--y", v]), json!({"pairing": -2}));
}

#[test]
fn gottsche_head() {
    assert_eq!(ok_json(&["gottsche", "--order", "4"]), json!({"coeffs": [1, 24, 324, 3200]}));
    let out = k3tk(&["gottsche", "--order", "3", "--lines"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1\n24\n324\n");
}

#[test]
fn gottsche_large_coefficients_are_exact() {
    let v = ok_json(&["gottsche", "--order", "60"]);
    let last = v["coeffs"][59].to_string();
    assert!(last.len() > 20 && last.chars().all(|c| c.is_ascii_digit()));
}

#[test]
fn invariants_of_ideal_sheaf_of_a_point() {
    let v = ok_json(&["invariants", "--v", r#"{"r": 1, "c1": [0], "a": 0}"#]);
    assert_eq!(v["exists"], json!(true));
    assert_eq!(v["dim"], json!(2));
    assert_eq!(v["euler"], json!(24));
    assert_eq!(v["non_locally_free"]["kind"], json!("rank_one"));
}

#[test]
fn chivirtual_of_a_multiple() {
    let v = ok_json(&["chivirtual", "--v", r#"{"r": 2, "c1": [0], "a": 2}"#]);
    // <(2,0,2)²> = -8 → index -3; a = 2: w = (1,0,1), index 0 → 1/4
    assert_eq!(v["chi_virtual"], json!({"num": 1, "den": 4}));
}

#[test]
fn dual_round_trips() {
    let v = r#"{"r": 3, "c1": [2, -1], "a": 5}"#;
    let s = r#"{"rank": 2, "gram": [[2, 1], [1, -4]]}"#;
    let once = ok_json(&["dualize", "--surface", s, "--v", v]);
    let twice = ok_json(&["dualize", "--surface", s, "--v", &once.to_string()]);
    assert_eq!(twice, serde_json::from_str::<Value>(v).unwrap());
}

#[test]
fn word_matches_stepwise() {
    let v = r#"{"r": 2, "c1": [1], "a": 3}"#;
    let word = r#"[{"type": "translate", "N": [1]}, {"type": "reflect", "u": {"r": 1, "c1": [0], "a": 1}}, {"type": "dual"}]"#;
    let direct = ok_json(&["word", "--word", word, "--v", v]);
    let step = ok_json(&["dualize", "--v", v]);
    let step = ok_json(&["reflect", "--u", r#"{"r": 1, "c1": [0], "a": 1}"#, "--v", &step.to_string()]);
    let step = ok_json(&["translate", "--n", "[1]", "--v", &step.to_string()]);
    assert_eq!(direct, step);
}

#[test]
fn surface_schema_round_trips() {
    let s = r#"{"rank":2,"gram":[[2,1],[1,-4]]}"#;
    let lattice: k3tk::EvenLattice = serde_json::from_str(s).unwrap();
    assert_eq!(serde_json::to_string(&lattice).unwrap(), s);
    let word: Vec<k3tk::IsometryElem> =
        serde_json::from_str(r#"[{"type":"translate","N":[1,0]},{"type":"ns_auto","M":[[1,0],[0,1]]},{"type":"negate"}]"#)
            .unwrap();
    let again: Vec<k3tk::IsometryElem> = serde_json::from_str(&serde_json::to_string(&word).unwrap()).unwrap();
    assert_eq!(word, again);
}

#[test]
fn zseries_methods_agree() {
    let args = |m: &str| ["zseries", "--rank", "2", "--alpha", "[1]", "--order", "3", "--method", m].map(String::from);
    let direct = ok_json(&args("direct").iter().map(String::as_str).collect::<Vec<_>>());
    let hecke = ok_json(&args("hecke").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(direct, hecke);
    assert_eq!(direct["terms"][0], json!({"exponent": {"num": -1, "den": 2}, "coeff": {"num": 1, "den": 1}}));
}

#[test]
fn zfull_routes_agree() {
    let v = ok_json(&[
        "zfull", "--surface", r#"{"rank":1,"gram":[[-2]]}"#, "--tau", "0", "1", "--rank", "1", "--radius", "6",
        "--cutoff", "8",
    ]);
    let d = v["direct"]["value"]["re"].as_f64().unwrap();
    let f = v["factorized"]["value"]["re"].as_f64().unwrap();
    assert!((d - f).abs() < 1e-6 * d.abs());
    assert!(v["direct"]["tail_bound"].as_f64().unwrap() < 1e-8);
}

#[test]
fn theta_at_the_origin() {
    let v = ok_json(&[
        "theta", "--surface", r#"{"rank":1,"gram":[[-2]]}"#, "--tau", "0", "1", "--rank", "1", "--radius", "0.5",
    ]);
    assert_eq!(v["points"], json!(1));
    assert_eq!(v["value"]["re"], json!(1.0));
}

#[test]
fn construct_and_verify() {
    let aux = ok_json(&["construct", "--l", "2", "--r", "3", "--s", "2", "--a", "1"]);
    assert_eq!((aux["r1"].clone(), aux["q"].clone(), aux["k"].clone()), (json!(11), json!(-5), json!(68)));
    let t = ok_json(&["verify", "triangle", "--bound", "10"]);
    assert_eq!(t["counterexamples"], json!(0));
    let f = ok_json(&["verify", "farey", "--bound", "10"]);
    assert_eq!(f["counterexamples"], json!(0));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(error_code(&["frobnicate"]), 2);
    assert_eq!(error_code(&["pair", "--x", "{not json", "--y", "{}"]), 2);
    assert_eq!(error_code(&["dualize", "--v", "/nonexistent/v.json"]), 2);
    assert_eq!(error_code(&["construct", "--l", "1", "--r", "2", "--s", "1", "--a", "1"]), 2);
    assert_eq!(error_code(&["reflect", "--u", r#"{"r":1,"c1":[0],"a":0}"#, "--v", r#"{"r":1,"c1":[0],"a":0}"#]), 2);
    assert_eq!(error_code(&["pair", "--surface", r#"{"rank":1,"gram":[[3]]}"#, "--x", "{}", "--y", "{}"]), 2);
    assert_eq!(error_code(&["zseries", "--rank", "13", "--order", "2", "--method", "literal"]), 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["zseries", "--rank", "4", "--alpha", "[2]", "--order", "4", "--method", "literal"];
    assert_eq!(k3tk(&args).stdout, k3tk(&args).stdout);
    let sweep = ["verify", "farey", "--bound", "25"];
    let one = Command::new(env!("CARGO_BIN_EXE_k3tk")).args(sweep).env("K3TK_THREADS", "1").output().unwrap();
    assert_eq!(one.stdout, k3tk(&sweep).stdout);
}
