mod common;

use common::{json, run};
use serde_json::json;

#[test]
fn move_prints_move_and_result() {
    let out = run("move --game cn:7,3 --pos 3,5,9,14,11,6,15");
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("0,0,0,5,6,3,0"), "{}", out.stdout);
    assert!(out.stdout.contains("3,5,9,9,5,3,15"), "{}", out.stdout);
}

#[test]
fn classify_p_position() {
    let out = run("classify --game h --pos 2,6,6,2,0,12");
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("P "), "{}", out.stdout);
    let j = json(&run("classify --game h --pos 2,6,6,2,0,12 --json").stdout);
    assert_eq!(j, json!({"game": "h", "position": [2, 6, 6, 2, 0, 12], "outcome": "P", "method": "closed_form"}));
}

#[test]
fn verify_box_is_clean() {
    let out = run("verify --game cn:5,2 --bound 6");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("0 mismatches, 0 closure violations, 0 reachability violations"), "{}", out.stdout);
}

#[test]
fn verify_random_positions() {
    let out = run("verify --game pn:6,3 --samples 500 --seed 7 --json");
    assert_eq!(out.code, 0, "{}", out.stderr);
    let j = json(&out.stdout);
    assert_eq!(j["failure_count"], json!(0));
    assert_eq!(j["samples"], json!(500));
}

#[test]
fn verify_needs_a_closed_form() {
    let out = run("verify --game cn:6,2 --bound 2");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("unsupported_game"), "{}", out.stderr);
}

#[test]
fn explain_nests_the_sub_game() {
    let out = run("move --game cn:7,3 --pos 3,5,9,14,11,6,15 --explain");
    assert_eq!(out.code, 0);
    for needle in ["cn:7,3 at", "h at (2,6,11,8,3,12)", "pn:5,3 at (4,11,6,3,10)", "lift"] {
        assert!(out.stdout.contains(needle), "missing {needle}:\n{}", out.stdout);
    }
    let j = json(&run("move --game cn:7,3 --pos 3,5,9,14,11,6,15 --explain --json").stdout);
    assert_eq!(j["trace"]["target"]["id"], json!("pn:5,3"));
    assert_eq!(j["explanation"]["sub"]["game"], json!("h"));
}

#[test]
fn grundy_enumerate_discover() {
    assert_eq!(run("grundy --game nim:2 --pos 1,2").stdout, "3 (N)\n");
    let j = json(&run("enumerate --game pn:3,2 --bound 2 --json").stdout);
    assert_eq!(j["positions"], json!([[0, 0, 0], [1, 0, 1], [2, 0, 2]]));
    let j = json(&run("discover --game h --bound 4 --json").stdout);
    let gens: Vec<_> = j["generators"].as_array().unwrap().iter().map(|g| g["z"].clone()).collect();
    assert_eq!(gens, vec![json!([1, 1, 0, 1, 0, 1]), json!([1, 0, 1, 0, 1, 1])]);
    let j = json(&run("discover --game cn:6,2 --bound 2 --json").stdout);
    assert_eq!(j["membership"], json!("brute_force"));
}

#[test]
fn exit_codes() {
    let bad_game = run("classify --game zz:1 --pos 1");
    assert_eq!(bad_game.code, 1);
    assert!(bad_game.stderr.contains("unknown_game"));
    assert_eq!(run("classify --game h --pos 1,2").code, 1);
    assert_eq!(run("classify --game h --pos 1,x,3,4,5,6").code, 1);
    assert_eq!(run("classify --game h").code, 1);
    assert_eq!(run("frobnicate").code, 1);
    let budget = run("classify --game cn:9,2 --pos 3,3,3,3,3,3,3,3,3 --budget 1000 --json");
    assert_eq!(budget.code, 2);
    assert_eq!(json(&budget.stderr)["code"], json!("budget_exceeded"));
    let help = run("--help");
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("classify"));
}

#[test]
fn reduce_rejects_nonzero_vertices() {
    let out = run("reduce --game h --pos 1,2,3,4,5,6 --zero a");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("non_zero_vertex"), "{}", out.stderr);
}

#[test]
fn zero_then_merge() {
    let j = json(&run("reduce --game cn:6,3 --pos 0,0,3,4,5,6 --zero a,b --merge b,c --json").stdout);
    assert_eq!(j["reduced_position"], json!([3, 9, 6]));
    assert_eq!(j["reduced_sets"], json!([[0, 1], [1, 2]]));
}
