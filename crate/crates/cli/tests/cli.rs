mod common;

use std::process::Command;

use common::{check, example, json, run};
use serde_json::Value;

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&schema).expect("schema compiles")
}

fn assert_valid(report: &Value) {
    let schema = schema();
    let msgs: Vec<String> = match schema.validate(report) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    panic!("report violates the schema: {msgs:#?}");
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn eval_prints_the_value() {
    let r = run(&["eval", &example("paper_s0.cog"), "--agent", "Alice"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "2\n"));
}

#[test]
fn eval_at_a_later_index() {
    let r = run(&["eval", &example("dollar_auction_agu.cog"), "--agent", "Alice", "--n", "3"]);
    assert_eq!(r.stdout, "-7\n");
}

#[test]
fn eval_without_a_leaf_fails() {
    let r = run(&["eval", &example("dollar_auction_ngu.cog"), "--agent", "Bob"]);
    assert_eq!(r.code, 1);
}

#[test]
fn ltl_on_ngu_fails_with_a_cycle_witness() {
    let r = run(&["check", &example("dollar_auction_ngu.cog"), "--ltl"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("cycle witness [Alice, Bob]"), "{}", r.stdout);
    let (_, v) = json(&["check", &example("dollar_auction_ngu.cog"), "--ltl"]);
    let c = check(&v, "ltl", "ngu");
    assert_eq!(c["outcome"], "fails");
    assert_eq!(c["detail"]["evidence"]["kind"], "choice_cycle");
    assert_eq!(c["detail"]["evidence"]["cycle"], serde_json::json!([0, 1]));
}

#[test]
fn check_runs_every_predicate_by_default() {
    let (code, v) = json(&["check", &example("centipede_agu.cog")]);
    assert_eq!(code, 0);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["ltl", "altl", "nash", "sgpe"]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["demo", "dollar"]).code, 0);
    assert_eq!(run(&["check", &example("dollar_auction_ngu.cog"), "--sgpe"]).code, 1);
    assert_eq!(run(&["check", &example("dollar_auction_ngu.cog"), "--nash"]).code, 0);
    assert_eq!(run(&["check", &example("dollar_auction.cog")]).code, 2);
    assert_eq!(run(&["check", "/nonexistent/file.cog"]).code, 2);
    assert_eq!(run(&["eval", &example("paper_s0.cog"), "--agent", "Carol"]).code, 2);
    assert_eq!(run(&["check"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["demo", "chess"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn parse_errors_are_positioned() {
    let dir = std::env::temp_dir().join(format!("cogame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.cog");
    std::fs::write(&path, "strategy agents A\ng(n) = <A, l, g(n), h(n)>\nroot g\n").unwrap();
    let r = run(&["check", path.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.cog:2:21: no equation named `h`"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn every_command_emits_schema_valid_json() {
    let ex = example;
    let invocations: Vec<Vec<String>> = vec![
        vec!["check".into(), ex("dollar_auction_agu.cog")],
        vec!["check".into(), ex("dollar_auction_ngu.cog")],
        vec!["eval".into(), ex("paper_s0.cog"), "--agent".into(), "Bob".into()],
        vec!["eval".into(), ex("centipede_ngu.cog"), "--agent".into(), "Bob".into()],
        vec!["bisim".into(), ex("paper_game.cog"), ex("paper_game.cog")],
        vec!["bisim".into(), ex("dollar_auction.cog"), ex("centipede.cog"), "--depth".into(), "5".into()],
        vec!["convert".into(), ex("dollar_auction_agu.cog"), ex("dollar_auction_ngu.cog"), "--agent".into(), "Alice".into()],
        vec!["history".into(), ex("dollar_auction_ngu.cog")],
        vec!["truncate".into(), ex("dollar_auction.cog"), "--depth".into(), "4".into(), "--solve".into()],
        vec!["truncate".into(), ex("centipede_ngu.cog"), "--depth".into(), "3".into(), "--solve".into()],
        vec!["demo".into(), "dollar".into()],
        vec!["demo".into(), "centipede".into()],
        vec!["crosscheck".into(), "--seed".into(), "7".into(), "--count".into(), "20".into()],
    ];
    for args in invocations {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, v) = json(&args);
        assert!(code == 0 || code == 1, "{args:?} exited {code}");
        assert_valid(&v);
        assert_eq!(v["command"], args[0]);
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    for args in [
        vec!["demo", "centipede"],
        vec!["crosscheck", "--seed", "3", "--count", "10"],
    ] {
        let (_, a) = json(&args);
        let (_, b) = json(&args);
        assert_eq!(without_timing(a), without_timing(b));
    }
    let a = run(&["demo", "dollar"]).stdout;
    assert_eq!(a, run(&["demo", "dollar"]).stdout);
}

#[test]
fn digest_tracks_the_input_bytes() {
    let (_, a) = json(&["history", &example("dollar_auction_ngu.cog")]);
    let (_, b) = json(&["history", &example("centipede_ngu.cog")]);
    assert_ne!(a["input_digest"], b["input_digest"]);
    let (_, c) = json(&["check", &example("centipede_ngu.cog"), "--ltl"]);
    assert_eq!(b["input_digest"], c["input_digest"]);
}

#[test]
fn history_of_escalation() {
    let (code, v) = json(&["history", &example("dollar_auction_ngu.cog")]);
    assert_eq!(code, 0);
    let c = check(&v, "history", "ngu");
    assert_eq!(c["summary"], "(l)^w");
    assert_eq!(c["detail"]["is_history_of_game"], true);
}

#[test]
fn truncated_auction_gives_up_at_the_root() {
    let (code, v) = json(&["truncate", &example("dollar_auction.cog"), "--depth", "6", "--solve", "--tiebreak", "right"]);
    assert_eq!(code, 0);
    let bi = check(&v, "backward_induction", "dollar");
    assert_eq!(bi["detail"]["outcome"], serde_json::json!({ "Alice": -1, "Bob": 0 }));
    let (code, v) = json(&["truncate", &example("dollar_auction_ngu.cog"), "--depth", "6", "--solve"]);
    assert_eq!(code, 1);
    assert_eq!(check(&v, "exhaustive_nash", "ngu")["outcome"], "fails");
}

#[test]
fn convert_reports_recurring_differences() {
    let dir = std::env::temp_dir().join(format!("cogame-conv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let switched = dir.join("switched.cog");
    let text = std::fs::read_to_string(example("dollar_auction_ngu.cog"))
        .unwrap()
        .replace("<Alice, l,", "<Alice, r,");
    std::fs::write(&switched, text).unwrap();
    let (code, v) = json(&["convert", &example("dollar_auction_ngu.cog"), switched.to_str().unwrap(), "--agent", "Alice"]);
    assert_eq!(code, 0);
    let c = check(&v, "convert", "ngu -> ngu");
    assert_eq!(c["summary"], "CoinductiveOnlyConv");
    assert_eq!(c["detail"]["witness"]["kind"], "recurring");
}

#[test]
fn the_binary_honours_the_exit_contract() {
    let bin = env!("CARGO_BIN_EXE_cogame");
    let out = Command::new(bin).args(["eval", &example("paper_s0.cog"), "--agent", "Alice"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "2\n");
    let out = Command::new(bin).args(["check", &example("dollar_auction_ngu.cog"), "--ltl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin).args(["check", &example("nope.cog")]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
