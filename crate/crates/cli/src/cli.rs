//! The `setnim` command line.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use setnim_core::game::vertex_label;
use setnim_core::GameSpec;

use crate::api::{self, ApiError, ApiResult, ReduceRequest, DEFAULT_BUDGET};
use crate::http;

#[derive(Debug, Parser)]
#[command(name = "setnim", version, about = "Analyse and play set nim games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Game id: cn:n,k  pn:n,k  h  nim:n  moore:n,k  file:path.json
    #[arg(long)]
    pub game: String,
    /// Emit compact JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Worker threads for parallel work (0 uses every core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct PositionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Stack heights, e.g. 3,5,9.
    #[arg(long)]
    pub pos: String,
    /// Brute-force work budget in option evaluations.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a position is P or N.
    Classify(PositionArgs),
    /// Find a winning move.
    Move {
        #[command(flatten)]
        args: PositionArgs,
        /// Show the reductions behind the move.
        #[arg(long)]
        explain: bool,
    },
    /// Grundy value by exhaustive search.
    Grundy(PositionArgs),
    /// List the P-positions in the box [0, bound]^n.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: u64,
    },
    /// Compare the closed form and its moves with brute force, on a box or
    /// on random positions.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, required_unless_present = "samples")]
        bound: Option<u64>,
        #[arg(long, conflicts_with = "bound")]
        samples: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_height: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find the 0/1 vectors under which the P-positions are invariant.
    Discover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: u64,
    },
    /// Minimal non-faces of the move-set complex and their points.
    Circuits {
        #[command(flatten)]
        common: Common,
    },
    /// Apply invariance, zero and merge reductions to a position.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pos: String,
        /// Comma-separated 0/1 strings, applied in order, e.g. 110101,101011.
        #[arg(long)]
        invariants: Option<String>,
        /// Empty stacks to remove, as indices or letters.
        #[arg(long)]
        zero: Option<String>,
        /// A class of vertices to merge; repeatable.
        #[arg(long)]
        merge: Vec<String>,
        /// A move in the reduced game to lift back.
        #[arg(long = "move")]
        lift: Option<String>,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn parse_list(s: &str, what: &str) -> ApiResult<Vec<u64>> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    if t.trim().is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| ApiError::BadRequest(format!("bad {what} `{s}`"))))
        .collect()
}

fn parse_vertex(token: &str) -> ApiResult<usize> {
    let t = token.trim();
    if let Ok(i) = t.parse::<usize>() {
        return Ok(i);
    }
    match t.as_bytes() {
        [c @ b'a'..=b'z'] => Ok((c - b'a') as usize),
        _ => Err(ApiError::BadRequest(format!("bad vertex `{token}`"))),
    }
}

fn parse_vertices(s: &str) -> ApiResult<Vec<usize>> {
    s.split(',').map(parse_vertex).collect()
}

fn parse_vector(s: &str) -> ApiResult<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(ApiError::BadRequest(format!("bad invariant vector `{s}`"))),
        })
        .collect()
}

fn configure_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn game(common: &Common) -> ApiResult<GameSpec> {
    configure_threads(common.threads);
    api::resolve_game(&common.game, true)
}

fn emit<T: Serialize>(out: &mut dyn Write, json: bool, value: &T, text: impl FnOnce() -> String) -> ApiResult<()> {
    let s = if json { api::to_json(value) } else { text() };
    writeln!(out, "{}", s.trim_end()).map_err(|e| ApiError::BadRequest(e.to_string()))
}

fn show_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("none".to_string(), |x| format!("({x})"))
}

/// Runs one command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> ApiResult<()> {
    match cli.command {
        Command::Classify(a) => {
            let spec = game(&a.common)?;
            let r = api::classify(&spec, parse_list(&a.pos, "position")?, a.budget)?;
            emit(out, a.common.json, &r, || format!("{} ({})", r.outcome, r.method))
        }
        Command::Move { args: a, explain } => {
            let spec = game(&a.common)?;
            let r = api::solve(&spec, parse_list(&a.pos, "position")?, a.budget, explain)?;
            emit(out, a.common.json, &r, || {
                let mut s = match (&r.mv, &r.resulting_position) {
                    (Some(m), Some(p)) => format!("move ({m}) -> ({p}) [{}]\n", r.method),
                    _ => format!("P-position: no winning move [{}]\n", r.method),
                };
                if let Some(e) = &r.explanation {
                    s.push_str(&e.render());
                }
                s
            })
        }
        Command::Grundy(a) => {
            let spec = game(&a.common)?;
            let r = api::grundy_value(&spec, parse_list(&a.pos, "position")?, a.budget)?;
            emit(out, a.common.json, &r, || format!("{} ({})", r.grundy, r.outcome))
        }
        Command::Enumerate { common, bound } => {
            let spec = game(&common)?;
            let r = api::enumerate(&spec, bound)?;
            emit(out, common.json, &r, || {
                let mut s: String = r.positions.iter().map(|p| format!("({p})\n")).collect();
                s.push_str(&format!("{} P-positions", r.count));
                s
            })
        }
        Command::Verify { common, bound, samples, max_height, seed } => {
            let spec = game(&common)?;
            if let Some(samples) = samples {
                let r = api::verify_samples(&spec, samples, max_height, seed)?;
                emit(out, common.json, &r, || {
                    let mut s: String = r
                        .failures
                        .iter()
                        .map(|f| format!("({}) move {}: {}\n", f.position, show_opt(&f.mv), f.reason))
                        .collect();
                    s.push_str(&format!(
                        "{} samples, {} P-positions, {} failures, median {:.2} us",
                        r.samples, r.p_positions, r.failure_count, r.median_latency_us
                    ));
                    s
                })?;
                if r.failure_count > 0 {
                    return Err(ApiError::VerificationFailed(format!("{} failures", r.failure_count)));
                }
            } else {
                let r = api::verify(&spec, bound.expect("clap requires bound"), true)?;
                emit(out, common.json, &r, || {
                    let rep = &r.report;
                    let mut s = String::new();
                    for m in &rep.outcome_mismatches {
                        s.push_str(&format!("mismatch at ({}): brute force says {}\n", m.position, m.brute_force));
                    }
                    for c in &rep.closure_violations {
                        s.push_str(&format!("closure: ({}) -> ({}) by ({})\n", c.from, c.to, c.mv));
                    }
                    for v in &rep.reachability_violations {
                        s.push_str(&format!("reachability at ({}): {}\n", v.position, v.reason));
                    }
                    s.push_str(&format!("{} positions: {}", rep.positions_checked, rep.summary()));
                    s
                })?;
                if !r.report.is_clean() {
                    return Err(ApiError::VerificationFailed(r.report.summary()));
                }
            }
            Ok(())
        }
        Command::Discover { common, bound } => {
            let spec = game(&common)?;
            let r = api::discover(&spec, bound)?;
            emit(out, common.json, &r, || {
                let mut s = format!("{} invariant vectors up to {}\n", r.all.len(), r.bound);
                for g in &r.generators {
                    s.push_str(&format!("generator {g}\n"));
                }
                s
            })
        }
        Command::Circuits { common } => {
            let spec = game(&common)?;
            let r = api::circuits(&spec)?;
            emit(out, common.json, &r, || {
                let mut s = String::new();
                for c in &r.circuits {
                    let point = c.point.map_or("none".to_string(), vertex_label);
                    s.push_str(&format!("{} point {point}\n", c.label));
                }
                match &r.p_positions {
                    Some(f) => s.push_str(&format!("pointed; P-positions {f}")),
                    None => s.push_str("not pointed"),
                }
                s
            })
        }
        Command::Reduce { common, pos, invariants, zero, merge, lift } => {
            let spec = game(&common)?;
            let req = ReduceRequest {
                invariants: match &invariants {
                    Some(s) => s.split(',').map(parse_vector).collect::<ApiResult<_>>()?,
                    None => Vec::new(),
                },
                zero: match &zero {
                    Some(s) => parse_vertices(s)?,
                    None => Vec::new(),
                },
                merge: merge.iter().map(|s| parse_vertices(s)).collect::<ApiResult<_>>()?,
                lift: lift.as_deref().map(|s| parse_list(s, "move")).transpose()?,
            };
            let r = api::reduce(&spec, parse_list(&pos, "position")?, &req)?;
            emit(out, common.json, &r, || {
                let mut s = String::new();
                for it in &r.invariance {
                    let z: String = it.z.iter().map(|b| b.to_string()).collect();
                    s.push_str(&format!("{z}: c = {} -> ({})\n", it.coefficient, it.position));
                }
                if let Some(c) = &r.irp_case {
                    s.push_str(&format!("case {c}\n"));
                }
                for step in &r.steps {
                    s.push_str(&format!("{step}\n"));
                }
                s.push_str(&format!("reduced ({})", r.reduced_position));
                if let Some(m) = &r.lifted_move {
                    s.push_str(&format!("\nlifted move ({m})"));
                }
                s
            })
        }
        Command::Serve { port, threads } => {
            configure_threads(threads);
            http::serve(port).map_err(|e| ApiError::BadRequest(format!("cannot serve: {e}")))
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let json = match &cli.command {
        Command::Classify(a) | Command::Grundy(a) | Command::Move { args: a, .. } => a.common.json,
        Command::Enumerate { common, .. }
        | Command::Verify { common, .. }
        | Command::Discover { common, .. }
        | Command::Circuits { common }
        | Command::Reduce { common, .. } => common.json,
        Command::Serve { .. } => false,
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            if json && !matches!(e, ApiError::VerificationFailed(_)) {
                let _ = writeln!(err, "{}", api::to_json(&e.body()));
            } else {
                let _ = writeln!(err, "error [{}]: {}", e.code(), e.message());
            }
            e.exit_code()
        }
    }
}
