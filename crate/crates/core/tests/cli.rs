use std::path::PathBuf;
use std::process::{Command, Output};

use xbiv::compute::{compute, ComputeArgs, ComputeResult, Target};
use xbiv::problem::{ProblemFile, Resolved};
use xbiv::suites::{registered_checks, run_suite, RunConfig, Status, Suite, SuiteReport};
use xbiv::Error;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xbiv"))
}

fn demo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems/index_demo.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xbiv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bott_suite_exits_zero_with_table() {
    let o = run(&["run", "--suite", "bott", "--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: SuiteReport = serde_json::from_str(&stdout(&o)).unwrap();
    let table = r.checks.iter().find(|c| c.name == "bott.pairing_normalized").unwrap().detail.clone().unwrap();
    assert_eq!(table, serde_json::json!({"1": "1", "2": "1", "3": "1", "4": "1"}));
}

#[test]
fn compute_bott_text_and_json() {
    let out = scratch("bott.json");
    let o = run(&["compute", "--target", "bott", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agree: true"));
    let r: ComputeResult = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.schema_version, 1);
}

#[test]
fn compute_pairing_on_index_one_fixture() {
    let o = run(&["compute", "--target", "pairing", "--triple", "fixture1", "--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["value"]["im"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["fredholm_index"], 1);
}

#[test]
fn compute_ch_idempotent_coefficients() {
    let o = run(&["compute", "--target", "ch_idempotent", "--trunc", "4", "--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // e, (de)², e(de)², (de)⁴, e(de)⁴ in the bB picture
    let coeffs: Vec<&str> = v["bb"]["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["1", "1", "-2", "-6", "12"]);
    let coeffs: Vec<&str> = v["x_complex"]["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["1", "-1", "2", "-3", "6"]);
}

#[test]
fn parity_mismatch_exits_two() {
    let o = run(&["compute", "--target", "jlo", "--triple", "fixture1", "--chain", "e d[e]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parity"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["run", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--target", "jlo"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--config", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--target", "pairing", "--triple", "nowhere"]).status.code(), Some(2));
}

#[test]
fn corrupted_structure_constants_exit_two() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"algebras":{"bad":{"dim":2,"basis":["a","b"],"constants":[[0,0,1,1,1,0,1],[0,1,0,1,1,0,1]]}}}"#).unwrap();
    let o = run(&["run", "--config", path.to_str().unwrap(), "--suite", "bott"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not associative"));
    let err = ProblemFile::load(&path).unwrap().resolve().unwrap_err();
    assert!(matches!(err, Error::NonAssociative(..)), "{err:?}");
}

#[test]
fn failing_check_exits_one() {
    // a Monte-Carlo estimate with 100 samples cannot meet 1e-6
    let o = run(&["run", "--suite", "jlo", "--samples", "100", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));
    assert!(stdout(&o).contains("counterexample"));
}

#[test]
fn problem_file_checks_are_registered() {
    let p = ProblemFile::load(&demo()).unwrap().resolve().unwrap();
    let names: Vec<String> = registered_checks(&p, Suite::All).into_iter().map(|(n, _)| n).collect();
    for want in ["jlo.pairing[unit]", "jlo.pairing[half]", "jlo.cocycle[shifted]", "bivariant.homotopy[flatten]", "identities.b_squared[K]"] {
        assert!(names.contains(&want.to_string()), "{want} missing");
    }
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len(), "duplicate check names");
    let o = run(&["run", "--config", demo().to_str().unwrap(), "--suite", "jlo", "--samples", "20000", "--tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn problem_file_errors() {
    assert!(matches!(ProblemFile::parse("{\"schema_version\": 2}"), Err(Error::Config(_))));
    assert!(matches!(ProblemFile::parse("{\"unknown\": 1}"), Err(Error::Config(_))));
    assert!(matches!(ProblemFile::parse("{\"tol\": -1}"), Err(Error::Config(_))));
    let shadow = r#"{"algebras":{"C":{"dim":1,"basis":["e"],"constants":[[0,0,0,1,1,0,1]],"unit":0}}}"#;
    assert!(matches!(ProblemFile::parse(shadow).unwrap().resolve(), Err(Error::Config(_))));
    let dangling = r#"{"idempotents":{"p":{"algebra":"M3","element":"E11"}}}"#;
    assert!(matches!(ProblemFile::parse(dangling).unwrap().resolve(), Err(Error::Resolution(_))));
    let not_idem = r#"{"idempotents":{"p":{"algebra":"M2","element":"E11 + E12 + E21"}}}"#;
    assert!(matches!(ProblemFile::parse(not_idem).unwrap().resolve(), Err(Error::NotIdempotent)));
}

#[test]
fn problem_file_round_trip() {
    let text = std::fs::read_to_string(demo()).unwrap();
    let p = ProblemFile::parse(&text).unwrap();
    let again = ProblemFile::parse(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(p, again);
}

#[test]
fn compute_results_round_trip() {
    let p = ProblemFile::load(&demo()).unwrap().resolve().unwrap();
    let cases = [
        (Target::ChIdempotent, ComputeArgs { trunc: Some(6), ..Default::default() }),
        (Target::Jlo, ComputeArgs { triple: Some("shifted".into()), chain: Some("e + e d[e] d[e]".into()), ..Default::default() }),
        (Target::Chi, ComputeArgs { triple: Some("fixture5".into()), chain: Some("e d[e] d[e]".into()), ..Default::default() }),
        (Target::Pairing, ComputeArgs { idempotent: Some("unit".into()), time: Some(0.5), ..Default::default() }),
        (Target::Bott, ComputeArgs::default()),
    ];
    for (target, args) in cases {
        let r = compute(&p, target, &args).unwrap();
        let back: ComputeResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, back, "{target:?}");
        let args_back: ComputeArgs = serde_json::from_str(&serde_json::to_string(&args).unwrap()).unwrap();
        assert_eq!(args, args_back);
    }
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    let p = Resolved::builtin();
    let cfg = RunConfig { seed: 99, mc_samples: 10_000, tol: Some(1e-2), ..RunConfig::default() };
    for suite in [Suite::Goodwillie, Suite::Bar, Suite::Bott] {
        let a = run_suite(&p, suite, &cfg);
        let b = run_suite(&p, suite, &cfg);
        let back: SuiteReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
        assert_eq!(serde_json::to_string(&a.without_timings()).unwrap(), serde_json::to_string(&b.without_timings()).unwrap());
        assert!(a.passed);
    }
    // a different seed draws different instances
    let c = run_suite(&p, Suite::Bar, &RunConfig { seed: 100, ..cfg.clone() });
    let a = run_suite(&p, Suite::Bar, &cfg);
    assert_ne!(serde_json::to_string(&a.without_timings()).unwrap(), serde_json::to_string(&c.without_timings()).unwrap());
}

#[test]
fn cli_reports_are_byte_identical_modulo_timings() {
    let outs: Vec<SuiteReport> = (0..2)
        .map(|_| {
            let o = run(&["run", "--suite", "bar", "--seed", "5", "--report", "json"]);
            assert_eq!(o.status.code(), Some(0));
            serde_json::from_str(&stdout(&o)).unwrap()
        })
        .collect();
    assert_eq!(serde_json::to_string(&outs[0].without_timings()).unwrap(), serde_json::to_string(&outs[1].without_timings()).unwrap());
}

#[test]
fn every_registered_check_appears_once() {
    let p = Resolved::builtin();
    let r = run_suite(&p, Suite::Bott, &RunConfig::default());
    let reg = registered_checks(&p, Suite::Bott);
    assert_eq!(r.checks.iter().map(|c| (c.name.clone(), c.criterion)).collect::<Vec<_>>(), reg);
    assert!(r.checks.iter().all(|c| c.status == Status::Pass));
}
