//! The command-line front end, driven in-process.

use std::path::PathBuf;

use negot::cli::{run, EXIT_ENGINE, EXIT_OK, EXIT_UNSOUND, EXIT_USAGE};
use negot::io::report::AnalysisReport;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn negot(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("negot").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn analyze_fig2_expected_cost() {
    let (code, out, _) = negot(&["analyze", &fixture("fig2.neg"), "--framework=expected-cost", "--oracle-check"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("result: (1, 18)"), "{out}");
    assert!(out.contains("oracle (ascending): (1, 18) [agree]"), "{out}");
}

#[test]
fn json_report_is_versioned_and_exact() {
    let (code, out, _) = negot(&["analyze", &fixture("fig2.neg"), "--framework=expected-cost", "--oracle-check", "--json"]);
    assert_eq!(code, EXIT_OK);
    let r: AnalysisReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.schema_version, 1);
    let res = r.result.unwrap();
    assert_eq!(res.components["cost"], "18/1");
    assert_eq!(res.components["mass"], "1/1");
    assert_eq!(r.oracle.unwrap().agree, Some(true));
    assert!(r.error.is_none());
}

#[test]
fn framework_defaults_to_the_analysis_block() {
    let (code, out, _) = negot(&["analyze", &fixture("fig1.neg")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("framework: genkill"), "{out}");
    assert!(out.contains("holds: true"), "{out}");
}

#[test]
fn genkill_flags() {
    let (code, out, _) = negot(&[
        "analyze",
        &fixture("fig2.neg"),
        "--framework=genkill",
        "--variant=may-forward",
        "--gen=n3.b",
        "--loc=n7.a",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("holds: true"), "{out}");
}

#[test]
fn check_reports_determinism_and_soundness() {
    let (code, out, _) = negot(&["check", &fixture("fig4.neg")]);
    assert!(out.contains("determinism: false"), "{out}");
    assert!(out.contains("n0.a/p1"), "{out}");
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = negot(&["check", &fixture("fig1.neg"), "--max-configs=3"]);
    assert_eq!(code, 3, "{out}");
}

#[test]
fn engine_refuses_nondeterministic_input() {
    let (code, out, _) = negot(&["analyze", &fixture("fig4.neg"), "--framework=expected-cost"]);
    assert_eq!(code, EXIT_ENGINE, "{out}");
    assert!(out.contains("not-deterministic"), "{out}");
}

#[test]
fn unsound_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stuck.neg");
    std::fs::write(
        &path,
        "negotiation stuck {\n processes p q;\n node s [p q] init;\n node x [p];\n node y [p q];\n node f [p q] final;\n \
         outcome s.a { p -> x; q -> f; }\n outcome s.b { p -> y; q -> y; }\n outcome x.a { p -> y; }\n outcome y.a { p -> f; q -> f; }\n}\n",
    )
    .unwrap();
    let file = path.display().to_string();
    let (code, out, _) = negot(&["check", &file]);
    assert_eq!(code, EXIT_UNSOUND, "{out}");
    assert!(out.contains("witness: s.a\n"), "{out}");
    let (code, _, _) = negot(&["analyze", &file, "--framework=worst-time"]);
    assert_eq!(code, EXIT_UNSOUND);
}

#[test]
fn decompose_emits_dot_and_text() {
    let (code, out, _) = negot(&["decompose", &fixture("fig2.neg"), "--node=n3", "--emit=dot"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.matches("[label=\"{").count(), 3);
    let (code, out, _) = negot(&["decompose", &fixture("fig2.neg"), "--node=n3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("I(n3) = (n8,n3,n7)"), "{out}");
    assert!(out.contains("F(n3) = (n8,n7,n7)"), "{out}");
}

#[test]
fn oracle_with_scheduler() {
    let (code, out, _) =
        negot(&["oracle", &fixture("fig2.neg"), "--framework=expected-cost", "--scheduler=n4,n3", "--max-len=6"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("oracle value: (1, 18)"), "{out}");
}

#[test]
fn invariance_discriminates() {
    let (code, out, _) = negot(&["invariance", &fixture("fig1.neg"), "--framework=expected-cost"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out, _) = negot(&[
        "invariance",
        &fixture("fig1.neg"),
        "--framework=naive-anti-pattern",
        "--loc=n3.tout",
        "--loc2=n5.done",
    ]);
    assert_eq!(code, EXIT_UNSOUND, "{out}");
    assert!(out.contains("witness: n3.tout and n5.done"), "{out}");
    let (code, _, _) =
        negot(&["invariance", &fixture("fig2.neg"), "--framework=worst-time", "--mode=sampled", "--seed=3", "--count=8"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn trace_writes_stage_files() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("stages");
    let (code, out, _) =
        negot(&["trace", &fixture("fig2.neg"), "--framework=expected-cost", &format!("--emit-stages={}", target.display())]);
    assert_eq!(code, EXIT_OK, "{out}");
    let first = std::fs::read_to_string(target.join("stage_01.dot")).unwrap();
    assert!(first.contains("\"n3\":\"p2\" -> \"n7\":\"p2\" [label=\"r_n3\"]"), "{first}");
    let summary = std::fs::read_to_string(target.join("trace.txt")).unwrap();
    assert!(summary.ends_with("result = (1, 18)\n"), "{summary}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(negot(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(negot(&["analyze", "/nonexistent.neg", "--framework=worst-time"]).0, EXIT_USAGE);
    assert_eq!(negot(&["analyze", &fixture("fig2.neg"), "--framework=nope"]).0, EXIT_USAGE);
    assert_eq!(negot(&["analyze", &fixture("fig2.neg"), "--framework=genkill"]).0, EXIT_USAGE);
    let (code, out, _) = negot(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("analyze"));
}
