use std::io::Cursor;

use fibslp::cli::{run, Outcome, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};
use fibslp::grammar::Grammar;
use fibslp::oracle::OracleSummary;

fn fibslp(args: &[&str]) -> Outcome {
    fibslp_with_stdin(args, "")
}

fn fibslp_with_stdin(args: &[&str], stdin: &str) -> Outcome {
    let argv = std::iter::once("fibslp").chain(args.iter().copied());
    run(argv, &mut Cursor::new(stdin.as_bytes().to_vec()))
}

fn ok(args: &[&str]) -> String {
    let out = fibslp(args);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    out.stdout
}

#[test]
fn gen_prints_table_words() {
    assert_eq!(ok(&["gen", "fib:7"]).trim(), "abaababaabaab");
    assert_eq!(ok(&["gen", "p:3"]).trim(), "ababb");
    assert_eq!(ok(&["gen", "q:3"]).trim(), "aabaabab");
    assert_eq!(ok(&["gen", "fib:5@ba"]).trim(), "babba");
}

#[test]
fn lz_of_fib_seven() {
    assert_eq!(ok(&["lz", "fib:7"]).trim(), "a|b|a|aba|baaba|ab");
}

#[test]
fn repair_all_lists_one_grammar_per_line() {
    let text = ok(&["repair-all", "fib:11", "--format", "json"]);
    let grammars: Vec<Grammar> = text.lines().map(|l| Grammar::from_json(l).unwrap()).collect();
    assert_eq!(grammars.len(), 8);
    for g in &grammars {
        assert_eq!(g.size(), 11);
    }
}

#[test]
fn repair_json_expands_back_to_the_input() {
    for w in ["abaababa", "fib:12", "p:4", "q:4@ba", "mississippi", "x"] {
        for policy in ["first", "lex"] {
            let json = ok(&["repair", w, "--policy", policy, "--format", "json"]);
            let word = ok(&["gen", w]);
            let out = fibslp_with_stdin(&["expand", "-"], &json);
            assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
            assert_eq!(out.stdout, word, "{w} {policy}");
        }
    }
}

#[test]
fn repair_trace_shows_each_step() {
    let text = ok(&["repair", "abaababa", "--trace"]);
    assert!(text.contains("--["));
    assert!(text.contains("]-->"));
}

#[test]
fn factorizations_in_text_and_json() {
    assert_eq!(ok(&["sg", "fib:7"]).trim().split('|').count(), 6);
    assert_eq!(ok(&["cfact", "abab"]).trim(), "a|b|ab");
    let json: serde_json::Value = serde_json::from_str(&ok(&["lz", "abab", "--format", "json"])).unwrap();
    assert!(json.is_object());
}

#[test]
fn grammar_file_commands_read_stdin() {
    let json = ok(&["repair", "fib:8", "--format", "json"]);
    let gf = fibslp_with_stdin(&["gfact", "-"], &json);
    assert_eq!(gf.code, EXIT_OK, "{}", gf.stderr);
    let phrases: String = gf.stdout.trim().split('|').collect();
    assert_eq!(phrases, ok(&["gen", "fib:8"]).trim());

    for extra in [&[][..], &["--partial"][..]] {
        let mut args = vec!["tree", "-"];
        args.extend_from_slice(extra);
        let out = fibslp_with_stdin(&args, &json);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        assert!(out.stdout.starts_with("digraph"));
        assert!(out.stdout.trim_end().ends_with('}'));
    }
}

#[test]
fn invalid_grammar_file_is_rejected() {
    let out = fibslp_with_stdin(&["expand", "-"], "{\"not\": \"a grammar\"}");
    assert_ne!(out.code, EXIT_OK);
    assert!(!out.stderr.is_empty());
}

#[test]
fn graph_outputs() {
    let dot = ok(&["graph", "12"]);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("F_12"));
    let json: serde_json::Value = serde_json::from_str(&ok(&["graph", "12", "--format", "json"])).unwrap();
    assert!(json.is_object());
    assert_eq!(fibslp(&["graph", "3"]).code, EXIT_USAGE);
}

#[test]
fn oracle_summary_and_enumeration() {
    let text = ok(&["oracle", "aba", "--enumerate", "--format", "json"]);
    let mut lines = text.lines();
    let summary: OracleSummary = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(summary.g_star, 4);
    assert_eq!(summary.count, Some(2));
    let rest: Vec<Grammar> = lines.map(|l| Grammar::from_json(l).unwrap()).collect();
    assert_eq!(rest.len(), 2);
}

#[test]
fn oracle_budget_exhaustion_reports_bounds() {
    let out = fibslp(&["oracle", "fib:11"]);
    assert_eq!(out.code, EXIT_RESOURCE);
    assert!(out.stderr.contains("bounds: lower 11 upper 11"), "{}", out.stderr);
    assert_eq!(fibslp(&["oracle", "fib:8", "--budget", "10"]).code, EXIT_RESOURCE);
}

#[test]
fn verify_reports_each_claim() {
    let out = ok(&["verify", "--claims", "lz-of-fib,repair-census", "--nmax", "10"]);
    assert_eq!(out.lines().filter(|l| l.contains(" pass ")).count(), 2, "{out}");
    let json = ok(&["verify", "--claims", "strategy-1", "--nmax", "9", "--format", "json"]);
    for line in json.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn usage_errors() {
    assert_eq!(fibslp(&["nope"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["gen"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["gen", "fib:x"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["lz", "abc", "--format", "dot"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["repair", "ab", "--policy", "random"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["verify", "--claims", "no-such-claim"]).code, EXIT_USAGE);
    assert_eq!(fibslp(&["gen", "ab", "--file", "x"]).code, EXIT_USAGE);
}

#[test]
fn verify_help_lists_every_claim() {
    let out = fibslp(&["verify", "--help"]);
    assert_eq!(out.code, EXIT_OK);
    for claim in fibslp::verify::Claim::all() {
        let id = claim.to_string();
        if !id.starts_with("strategy-") {
            assert!(out.stdout.contains(&id), "{id} missing from help");
        }
    }
}
