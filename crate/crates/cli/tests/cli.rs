use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use rmono::continuation::TracePoint;
use rmono::sl2z::FamilyMember;
use rmono::{is_rsl, MonodromyRep, NumericMonodromy, RealizationWitness, RiemannEquation, Sl2zVerdict};
use serde_json::{json, Value};

const IDENTITY: &str = "[[1,0],[0,0],[0,0],[1,0]]";
const JORDAN: &str = "[[1,0],[1,0],[0,0],[1,0]]";

fn identity_rep() -> String {
    format!(r#"{{"divisor":[[-1,0],[1,0],"inf"],"G1":{IDENTITY},"G2":{IDENTITY}}}"#)
}

fn hypergeometric_eq() -> String {
    r#"{"divisor":[[0,0],[1,0],"inf"],"exponents":[[[0,0],[0.3,0]],[[0,0],[0.2,0]],[[0.1,0],[0.4,0]]]}"#.into()
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rmono"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn rmono");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("rmono-cli-{}-{name}", std::process::id()))
}

#[test]
fn classify_identity() {
    let out = run(&["classify"], &identity_rep());
    assert_eq!(
        json_of(&out),
        json!({"class": "Decomposable", "scalar_indices": [1, 2, 3], "realizable": true})
    );
    assert!(out.stderr.is_empty());
}

#[test]
fn classify_reads_a_file_argument() {
    let path = scratch("identity.json");
    std::fs::write(&path, identity_rep()).unwrap();
    let out = run(&["classify", path.to_str().unwrap()], "");
    std::fs::remove_file(&path).ok();
    assert_eq!(json_of(&out)["class"], "Decomposable");
}

#[test]
fn rsl_on_identity_gives_the_golden_equation() {
    let out = run(&["rsl"], &identity_rep());
    let v = json_of(&out);
    let w: RealizationWitness = serde_json::from_value(v).unwrap();
    let eq = &w.witness().expect("found").equation;
    assert!(is_rsl(eq));
    for z in [rmono::c(0.3, 0.7), rmono::c(-2.0, 0.1), rmono::c(5.0, -3.0)] {
        let expected = -8.0 / (z * z - 1.0).powi(2);
        assert!((eq.q_at(z) - expected).norm() < 1e-12 * expected.norm());
    }
}

#[test]
fn hyp_check_reports_the_rejected_example() {
    let v = json_of(&run(&["hyp-check", "--alpha", "0.2", "--beta", "-0.2", "--gamma", "0"], ""));
    assert_eq!(v["in_sl2c"], true);
    assert_eq!(v["in_sl2z"], false);
    let verdict: Sl2zVerdict = serde_json::from_value(v).unwrap();
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    assert!((verdict.integer_defect - (1.0 - golden)).abs() < 1e-12);
}

#[test]
fn hyp_check_attaches_an_integer_conjugator() {
    let v = json_of(&run(&["hyp-check", "--alpha", "0.5", "--beta", "-0.5", "--gamma", "1"], ""));
    let verdict: Sl2zVerdict = serde_json::from_value(v).unwrap();
    assert!(verdict.in_sl2z);
    assert_eq!(verdict.k, Some(-2));
    assert!(verdict.conjugator.is_some());
}

#[test]
fn realize_refuses_jordan_blocks_with_exit_zero() {
    let rep = format!(r#"{{"G1":{JORDAN},"G2":{JORDAN}}}"#);
    let v = json_of(&run(&["realize"], &rep));
    assert_eq!(v["refusal"]["realizable"], false);
    assert_eq!(v["refusal"]["theorem"], "nowhere-diagonalizable");
}

#[test]
fn search_exhaustion_exits_one() {
    // No numerical witness meets a residual this small.
    let rep = r#"{"G1":[[0.3,0.2],[1.1,-0.4],[0.5,0.1],[-0.7,0.6]],"G2":[[0.9,-0.3],[0.2,0.8],[-1.2,0.1],[0.4,0.5]]}"#;
    let out = run(&["realize", "--tol", "1e-300", "--max-candidates", "3"], rep);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn monodromy_round_trips_and_dumps_paths() {
    let dump = scratch("paths.jsonl");
    let out = run(&["monodromy", "--verify-infinity", "--dump-paths", dump.to_str().unwrap()], &hypergeometric_eq());
    let m: NumericMonodromy = serde_json::from_value(json_of(&out)).unwrap();
    assert!(m.residual < 1e-8);
    let lines = std::fs::read_to_string(&dump).unwrap();
    std::fs::remove_file(&dump).ok();
    let points: Vec<TracePoint> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(points.len(), m.steps);
    for g in 1..=3 {
        assert!(points.iter().any(|p| p.generator == g), "no steps for generator {g}");
    }
}

#[test]
fn output_flag_writes_the_same_document() {
    let path = scratch("out.json");
    let direct = run(&["fuchs"], &hypergeometric_eq());
    let out = run(&["fuchs", "--output", path.to_str().unwrap()], &hypergeometric_eq());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, direct.stdout);
}

#[test]
fn fuchs_reports_sum_and_equation() {
    let v = json_of(&run(&["fuchs"], &hypergeometric_eq()));
    assert_eq!(v["satisfied"], true);
    let eq: RiemannEquation = serde_json::from_value(v["equation"].clone()).unwrap();
    assert!(!eq.resonant());
    let bad = r#"{"exponents":[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]}"#;
    let v = json_of(&run(&["fuchs"], bad));
    assert_eq!(v["satisfied"], false);
    assert_eq!(v["fuchs_sum"], json!([0.0, 0.0]));
    assert!(v.get("equation").is_none());
}

#[test]
fn family_members_reparse() {
    let v = json_of(&run(&["sl2z-family", "--k", "-3", "--l", "1"], ""));
    let m: FamilyMember = serde_json::from_value(v).unwrap();
    assert_eq!((m.k, m.l), (-3, 1));
    let all = json_of(&run(&["sl2z-family", "--k-max", "1", "--l-max", "1"], ""));
    let members: Vec<FamilyMember> = serde_json::from_value(all).unwrap();
    assert_eq!(members.len(), 9);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cases: Vec<(Vec<&str>, String)> = vec![
        (vec!["classify"], identity_rep()),
        (vec!["rsl"], identity_rep()),
        (vec!["monodromy"], hypergeometric_eq()),
        (vec!["hyp-check", "--alpha", "0.5", "--beta", "-0.5", "--gamma", "1"], String::new()),
    ];
    for (args, input) in cases {
        let a = run(&args, &input);
        let b = run(&args, &input);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn library_rep_output_is_accepted_by_classify() {
    // The identity rep written by the library is accepted back by the CLI.
    let rep: MonodromyRep = serde_json::from_str(&identity_rep()).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    assert_eq!(json_of(&run(&["classify"], &text))["realizable"], true);
}

#[test]
fn malformed_input_exits_two() {
    for (args, input) in [
        (vec!["classify"], "not json"),
        (vec!["classify"], r#"{"G1":1}"#),
        (vec!["monodromy"], r#"{"divisor":[[0,0],[1,0],"inf"],"exponents":[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]}"#),
        (vec!["rsl"], r#"{"G1":[[2,0],[0,0],[0,0],[1,0]],"G2":[[1,0],[0,0],[0,0],[1,0]]}"#),
        (vec!["classify", "--bogus"], ""),
        (vec!["classify", "--dump-paths", "x"], ""),
        (vec!["nonsense"], ""),
        (vec!["monodromy", "--tol", "0"], ""),
    ] {
        let out = run(&args, input);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_one() {
    let out = run(&["monodromy", "--tol", "1e-30"], &hypergeometric_eq());
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}
