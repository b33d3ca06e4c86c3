mod common;

use std::process::Command;

use aspen::cli::{run_with, EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

use common::corpus_path;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("aspen".to_string())
        .chain(args.iter().map(|a| {
            if a.contains('.') && !a.starts_with('/') && !a.contains('(') {
                corpus_path(a).display().to_string()
            } else {
                a.to_string()
            }
        }))
        .collect()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(argv(args), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["parse", "example1.lp"], EXIT_OK),
        (&["parse", "wgc.lp"], EXIT_OK),
        (&["check", "example1.lp"], EXIT_OK),
        (&["check", "example3.lp"], EXIT_OK),
        (&["check", "coloring.lp"], EXIT_OK),
        (&["check", "counter.lp"], EXIT_OK),
        (&["check", "reach.lp"], EXIT_OK),
        (&["check", "lists.lp"], EXIT_OK),
        (&["check", "example5.lp", "--max-iter", "10"], EXIT_BUDGET),
        (&["check", "example6.lp", "--max-iter", "10"], EXIT_BUDGET),
        (&["check", "example5.lp", "--prune-forbidden"], EXIT_NEGATIVE),
        (&["check", "example6.lp", "--prune-forbidden"], EXIT_NEGATIVE),
        (&["solve", "example1.lp", "--depth", "2"], EXIT_OK),
        (&["solve", "example6.lp", "--depth", "2"], EXIT_NEGATIVE),
        (&["solve", "example1.lp", "--depth", "2", "--max-rules", "3"], EXIT_BUDGET),
        (&["ground", "example1.lp", "--depth", "1"], EXIT_OK),
        (&["ground", "example6.lp", "--not-forbidden"], EXIT_OK),
        (&["ground", "example3.lp", "--not-forbidden", "--max-iter", "5"], EXIT_BUDGET),
        (&["forbidden", "example6.lp", "--atom", "r(a,b)"], EXIT_OK),
        (&["forbidden", "example1.lp", "--atom", "stop(b)"], EXIT_OK),
        (&["forbidden", "example5.lp", "--atom", "fct(a,s(s(0)))", "--max-calls", "1"], EXIT_BUDGET),
        (&["forbidden", "example1.lp", "--atom", "Stop("], EXIT_USAGE),
        (&["gen", "tiling", "tiling_x.tiles"], EXIT_OK),
        (&["gen", "tm", "tm_accept.tm", "--input", "01"], EXIT_OK),
        (&["gen", "tm", "tm_accept.tm"], EXIT_OK),
        (&["gen", "tm", "tm_accept.tm", "--input", "012"], EXIT_USAGE),
        (&["gen", "tiling", "tm_accept.tm"], EXIT_USAGE),
        (&["check", "missing.lp"], EXIT_USAGE),
        (&["check"], EXIT_USAGE),
    ];
    for (args, want) in cases {
        for format in ["text", "json"] {
            let mut full = vec!["--format", format];
            full.extend_from_slice(args);
            let (code, _, err) = run(&full);
            assert_eq!(code, *want, "{args:?} as {format}: {err}");
        }
    }
}

fn canonical(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (_, out, _) = run(&full);
    let mut v: Value = serde_json::from_str(&out).unwrap();
    v["usage"].as_object_mut().unwrap().remove("wall_ms");
    v
}

#[test]
fn reports_are_deterministic() {
    let commands: &[&[&str]] = &[
        &["check", "example1.lp"],
        &["check", "example5.lp", "--prune-forbidden"],
        &["solve", "coloring.lp", "--depth", "0"],
        &["ground", "example5.lp", "--not-forbidden"],
        &["forbidden", "example6.lp", "--atom", "r(f(b),f(f(b)))", "--trace"],
        &["gen", "tm", "tm_scan.tm", "--input", "10"],
    ];
    for args in commands {
        let first = canonical(args);
        assert_eq!(canonical(args), first, "{args:?}");
        let (_, a, _) = run(args);
        let (_, b, _) = run(args);
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn json_reports_have_the_fixed_fields() {
    let v = canonical(&["check", "example1.lp"]);
    for field in ["command", "outcome", "witness", "iterations", "budget", "usage", "exit_code"] {
        assert!(v.get(field).is_some(), "{field}");
    }
    assert_eq!(v["outcome"]["kind"], "Consistent");
    assert_eq!(v["iterations"], 2);
    let v = canonical(&["forbidden", "example6.lp", "--atom", "r(a,b)"]);
    assert_eq!(v["outcome"]["forbidden"], true);
}

#[test]
fn text_reports() {
    let (_, out, _) = run(&["check", "example6.lp", "--prune-forbidden"]);
    assert_eq!(out, "INCONSISTENT at iteration 1\n");
    let (_, out, _) = run(&["solve", "example1.lp", "--depth", "2"]);
    assert_eq!(out, "Answer 1: {r(a,b), r(b,f(b)), stop(b), stop(f(b))}\n% 1 answer set(s) at depth 2\n");
    let (_, out, _) = run(&["forbidden", "example6.lp", "--atom", "r(f(b),f(f(b)))", "--trace"]);
    assert!(out.lines().next().unwrap().starts_with("DEPTH 0 | LINE "), "{out}");
    assert!(out.contains("FORBIDDEN r(f(b),f(f(b)))\n"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_aspen");
    let status = |args: &[&str]| Command::new(bin).args(argv(args).into_iter().skip(1)).output().unwrap();
    let ok = status(&["check", "example1.lp"]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("CONSISTENT at iteration 2"));
    assert_eq!(status(&["check", "example6.lp", "--prune-forbidden"]).status.code(), Some(EXIT_NEGATIVE));
    assert_eq!(status(&["check", "example6.lp", "--max-iter", "5"]).status.code(), Some(EXIT_BUDGET));
    assert_eq!(status(&["frobnicate"]).status.code(), Some(EXIT_USAGE));
}
