//! Runs every acceptance criterion and prints one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use setnim_cli::api;
use setnim_core::complex;
use setnim_core::grundy::{BoxIndex, Engine, DEFAULT_BUDGET};
use setnim_core::invariance::{combo_membership, discover_invariants, is_invariant_bounded, InvariantVector};
use setnim_core::oracles::p_membership_base;
use setnim_core::reduction::{merge_reduce, ReductionTrace};
use setnim_core::{build_game, builtin_game, GameSpec, Oracle, Position};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sweeps() -> Outcome {
    let mut games: Vec<(String, u64)> = [
        ("cn:3,2", 8),
        ("cn:4,2", 7),
        ("cn:5,2", 6),
        ("cn:5,3", 6),
        ("cn:6,3", 4),
        ("cn:7,4", 3),
        ("cn:7,3", 4),
        ("cn:8,3", 3),
        ("h", 4),
    ]
    .iter()
    .map(|&(g, b)| (g.to_string(), b))
    .collect();
    for n in 3usize..=8 {
        for k in n.div_ceil(2)..=n {
            games.push((format!("pn:{n},{k}"), 4));
        }
    }
    let mut failures = Vec::new();
    let mut positions = 0;
    for (id, bound) in &games {
        let r = api::verify(&builtin_game(id).unwrap(), *bound, true).unwrap();
        positions += r.report.positions_checked;
        if !r.report.is_clean() {
            failures.push(format!("{id}@{bound}: {}", r.report.summary()));
        }
    }
    check(failures.is_empty(), format!("{} games, {positions} positions; {}", games.len(), failures.join("; ")))
}

fn goldens() -> Outcome {
    let cases = common::golden_cases();
    let diffs: Vec<String> = cases.iter().filter_map(common::golden_diff).collect();
    check(diffs.is_empty(), format!("{} golden files; {}", cases.len(), diffs.join("; ")))
}

fn large_stack_soundness() -> Outcome {
    let mut games = vec!["h".to_string(), "cn:7,3".to_string(), "cn:8,3".to_string()];
    for n in 1usize..=8 {
        for k in n.div_ceil(2)..=n {
            games.push(format!("pn:{n},{k}"));
        }
    }
    let mut problems = Vec::new();
    let mut worst = 0f64;
    for (i, id) in games.iter().enumerate() {
        let r = api::verify_samples(&builtin_game(id).unwrap(), 10_000, 1_000_000, i as u64).unwrap();
        worst = worst.max(r.median_latency_us);
        if r.failure_count > 0 {
            problems.push(format!("{id}: {} failures", r.failure_count));
        }
        if r.median_latency_us >= 1000.0 {
            problems.push(format!("{id}: median {:.1} us", r.median_latency_us));
        }
    }
    check(
        problems.is_empty(),
        format!("{} games x 10000 positions, worst median {worst:.1} us; {}", games.len(), problems.join("; ")),
    )
}

fn generators(o: Oracle, bound: u64) -> Vec<Vec<u8>> {
    let member = |p: &[u64]| o.is_p(p);
    discover_invariants(o.n(), &member, bound).unwrap().generators.into_iter().map(|v| v.z).collect()
}

fn discovery() -> Outcome {
    let mut bad = Vec::new();
    let cn63 = vec![
        vec![1, 0, 0, 1, 0, 0],
        vec![0, 1, 0, 0, 1, 0],
        vec![0, 0, 1, 0, 0, 1],
        vec![1, 0, 1, 0, 1, 0],
        vec![0, 1, 0, 1, 0, 1],
    ];
    let expected = [
        ("cn:6,3", Oracle::Cn63, 4, cn63),
        ("h", Oracle::H, 4, vec![vec![1, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 1]]),
        ("cn:7,3", Oracle::Cn73, 3, vec![vec![1; 7]]),
        ("cn:8,3", Oracle::Cn83, 3, vec![vec![1, 0, 1, 0, 1, 0, 1, 0], vec![0, 1, 0, 1, 0, 1, 0, 1]]),
    ];
    for (id, o, bound, want) in expected {
        if generators(o, bound) != want {
            bad.push(format!("{id} generators"));
        }
    }
    let cn53 = |p: &[u64]| Oracle::Cn53.is_p(p);
    if !discover_invariants(5, &cn53, 4).unwrap().all.is_empty() {
        bad.push("cn:5,3 not empty".into());
    }
    let pn53 = Oracle::Path { n: 5, k: 3 };
    let member = |p: &[u64]| pn53.is_p(p);
    let all: Vec<Vec<u8>> = discover_invariants(5, &member, 4).unwrap().all.into_iter().map(|v| v.z).collect();
    if all != vec![vec![1, 0, 0, 0, 1]] {
        bad.push("pn:5,3".into());
    }
    let cn74 = |p: &[u64]| Oracle::Cn74.is_p(p);
    let c = is_invariant_bounded(7, &cn74, &InvariantVector::declared(&[1; 7]), 3).unwrap();
    if c.invariant || c.witness.as_ref().map(|w| w.heights().to_vec()) != Some(vec![0, 0, 1, 0, 0, 1, 1]) {
        bad.push(format!("cn:7,4 all-ones: {c:?}"));
    }
    check(bad.is_empty(), format!("7 discovery checks; {}", bad.join("; ")))
}

fn combinations_are_p_positions() -> Outcome {
    let member = |p: &[u64]| Oracle::Cn63.is_p(p);
    let gens = discover_invariants(6, &member, 4).unwrap().generators;
    let idx = BoxIndex::new(6, 4).unwrap();
    let mut mismatches = 0;
    for i in 0..idx.size() {
        let p = idx.position(i);
        let combo = combo_membership(&gens, &Position::new(p.clone()), DEFAULT_BUDGET).unwrap();
        mismatches += (combo != p_membership_base("cn:6,3", &p).unwrap()) as u64;
    }
    check(mismatches == 0, format!("cn:6,3 @ 4: {} positions, {mismatches} mismatches", idx.size()))
}

fn merge_congruence() -> Outcome {
    let g2 = build_game(4, &[vec![0, 3], vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
    let (merged, step) = merge_reduce(&g2, &[1, 2]).unwrap();
    let mut trace = ReductionTrace::identity(&g2);
    trace.push(step).unwrap();
    let (mut big, mut small) = (Engine::new(&g2), Engine::new(&merged));
    let idx = BoxIndex::new(4, 5).unwrap();
    let mut mismatches = 0;
    for i in 0..idx.size() {
        let p = Position::new(idx.position(i));
        let q = trace.project(&p).unwrap();
        mismatches += (big.grundy(&p).unwrap() != small.grundy(&q).unwrap()) as u64;
    }
    check(mismatches == 0, format!("merge of b,c @ 5: {} positions, {mismatches} mismatches", idx.size()))
}

fn pointed_complex() -> Outcome {
    let spec: GameSpec = build_game(5, &[vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![0, 4]]).unwrap();
    let analysis = complex::analyze(&spec).unwrap();
    let mut engine = Engine::new(&spec);
    let mut nonzero = Vec::new();
    for c in &analysis.circuits {
        for k in 1..=3u64 {
            let p = Position::new(c.indicator.iter().map(|&x| k * x as u64).collect());
            if engine.grundy(&p).unwrap().value != 0 {
                nonzero.push(format!("({p})"));
            }
        }
    }
    let idx = BoxIndex::new(5, 4).unwrap();
    let mut mismatches = 0;
    for i in 0..idx.size() {
        let h = idx.position(i);
        let brute = engine.outcome(&Position::new(h.clone())).unwrap().is_p();
        mismatches += (complex::pointed_membership(&analysis, &h).unwrap() != brute) as u64;
    }
    check(
        nonzero.is_empty() && mismatches == 0 && analysis.pointed,
        format!(
            "{} circuits x 3 multiples, nonzero {:?}; {} positions @ 4, {mismatches} mismatches",
            analysis.circuits.len(),
            nonzero,
            idx.size()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle exactness sweeps", sweeps),
        ("worked examples, golden JSON", goldens),
        ("large-stack constructive moves", large_stack_soundness),
        ("invariant discovery", discovery),
        ("generator combinations equal P-positions", combinations_are_p_positions),
        ("merge reduction preserves Grundy values", merge_congruence),
        ("pointed circuit complex", pointed_complex),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {}", detail.trim_end_matches("; ")),
            Err(detail) => {
                println!("FAIL  {name} ({secs:.1}s): {detail}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        println!("{} of 7 criteria failed", failed.len());
        std::process::exit(1);
    }
    println!("all 7 criteria passed");
}
