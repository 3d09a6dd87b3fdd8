#![allow(dead_code)]

use std::path::Path;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line in-process.
pub fn run(args: &str) -> Output {
    let argv = std::iter::once("setnim").chain(args.split_whitespace());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = setnim_cli::cli::run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

pub struct GoldenCase {
    pub name: String,
    pub args: String,
    pub expected: String,
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    std::fs::read_to_string(dir.join("cases.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (name, args) = l.split_once('\t').expect("name<TAB>args");
            let expected = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
            GoldenCase { name: name.to_string(), args: args.to_string(), expected }
        })
        .collect()
}

/// Empty when the command's stdout matches the golden file byte for byte.
pub fn golden_diff(case: &GoldenCase) -> Option<String> {
    let out = run(&case.args);
    if out.code != 0 {
        return Some(format!("{}: exit {} {}", case.name, out.code, out.stderr));
    }
    (out.stdout != case.expected)
        .then(|| format!("{}:\n  expected {}  got      {}", case.name, case.expected, out.stdout))
}

pub fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}
