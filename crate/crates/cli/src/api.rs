//! Request and response documents shared by the command line and the HTTP
//! service, and the engine calls behind them.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use setnim_core::complex;
use setnim_core::game::{self, IllegalReason, Legality};
use setnim_core::grundy::{self, Engine, OutcomeTable, SweepOptions, VerificationReport};
use setnim_core::invariance::{self, InvarianceSchedule, InvariantVector, VerifiedBound};
use setnim_core::oracles::{self, Oracle};
use setnim_core::reduction::{self, ReductionStep, ReductionTrace};
use setnim_core::{Error, Explanation, GameSpec, Method, Move, Outcome, Position};

pub use setnim_core::grundy::DEFAULT_BUDGET;

/// Retry hint sent with budget errors.
pub const RETRY_AFTER_SECONDS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApiError {
    Core(Error),
    BadRequest(String),
    IllegalMove(IllegalReason),
    VerificationFailed(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Core(e) => e.code(),
            ApiError::BadRequest(_) => "bad_request",
            ApiError::IllegalMove(_) => "illegal_move",
            ApiError::VerificationFailed(_) => "verification_failed",
        }
    }

    pub fn message(&self) -> String {
        match self {
            ApiError::Core(e) => e.to_string(),
            ApiError::BadRequest(m) | ApiError::VerificationFailed(m) => m.clone(),
            ApiError::IllegalMove(r) => format!("illegal move: {r}"),
        }
    }

    /// 1 for bad input, 2 for an exhausted budget, 3 for engine faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            ApiError::Core(Error::BudgetExceeded(_)) => 2,
            ApiError::Core(e) if e.is_internal() => 3,
            ApiError::VerificationFailed(_) => 3,
            _ => 1,
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            ApiError::Core(Error::BudgetExceeded(_)) => 503,
            ApiError::Core(e) if e.is_internal() => 500,
            ApiError::VerificationFailed(_) => 500,
            ApiError::BadRequest(_) => 400,
            ApiError::Core(
                Error::UnknownId(_) | Error::BadParameters { .. } | Error::FileFormat { .. } | Error::UnsupportedGame(_),
            ) => 400,
            _ => 422,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().to_string(),
            message: self.message(),
            retry_after_seconds: matches!(self, ApiError::Core(Error::BudgetExceeded(_))).then_some(RETRY_AFTER_SECONDS),
        }
    }
}

pub type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry_after_seconds: Option<u64>,
}

/// Compact JSON, the single serializer for every response.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("response types serialize")
}

/// Resolves a game id. Game files are only readable when `allow_files`.
pub fn resolve_game(id: &str, allow_files: bool) -> ApiResult<GameSpec> {
    if !allow_files && id.trim_start().starts_with("file:") {
        return Err(ApiError::Core(Error::UnsupportedGame(format!("{id} (game files are not served)"))));
    }
    Ok(game::builtin_game(id)?)
}

fn checked(spec: &GameSpec, pos: Vec<u64>) -> ApiResult<Position> {
    spec.check_dimension(pos.len())?;
    Ok(Position::new(pos))
}

#[derive(Debug, Clone, Deserialize)]
pub struct PositionRequest {
    pub game: String,
    pub position: Vec<u64>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub explain: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MoveRequest {
    pub game: String,
    pub position: Vec<u64>,
    #[serde(rename = "move")]
    pub mv: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GameRequest {
    pub game: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifyResponse {
    pub game: String,
    pub position: Position,
    pub outcome: Outcome,
    pub method: Method,
}

pub fn classify(spec: &GameSpec, pos: Vec<u64>, budget: u64) -> ApiResult<ClassifyResponse> {
    let pos = checked(spec, pos)?;
    let (outcome, method) = oracles::classify(spec, &pos, budget)?;
    Ok(ClassifyResponse { game: spec.id().to_string(), position: pos, outcome, method })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResponse {
    pub game: String,
    pub position: Position,
    pub outcome: Outcome,
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub resulting_position: Option<Position>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explanation: Option<Explanation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ReductionTrace>,
}

pub fn solve(spec: &GameSpec, pos: Vec<u64>, budget: u64, explain: bool) -> ApiResult<SolveResponse> {
    let pos = checked(spec, pos)?;
    let r = oracles::solve_spec(spec, &pos, budget)?;
    let resulting_position = r.resulting_position(&pos);
    Ok(SolveResponse {
        game: spec.id().to_string(),
        position: pos,
        outcome: r.outcome,
        mv: r.mv,
        resulting_position,
        method: r.method,
        explanation: if explain { r.explanation } else { None },
        trace: if explain { r.trace } else { None },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LegalResponse {
    pub legal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<IllegalReason>,
}

pub fn legal(spec: &GameSpec, pos: Vec<u64>, mv: Vec<u64>) -> ApiResult<LegalResponse> {
    let pos = checked(spec, pos)?;
    Ok(match spec.is_legal_move(&pos, &Move::new(mv))? {
        Legality::Legal => LegalResponse { legal: true, reason: None },
        Legality::Illegal(r) => LegalResponse { legal: false, reason: Some(r) },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApplyResponse {
    pub position: Position,
}

pub fn apply(spec: &GameSpec, pos: Vec<u64>, mv: Vec<u64>) -> ApiResult<ApplyResponse> {
    let pos = checked(spec, pos)?;
    let mv = Move::new(mv);
    if let Legality::Illegal(r) = spec.is_legal_move(&pos, &mv)? {
        return Err(ApiError::IllegalMove(r));
    }
    Ok(ApplyResponse { position: game::apply_move(&pos, &mv)? })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Ring,
    Path,
    Custom,
}

fn layout(spec: &GameSpec) -> Layout {
    let id = spec.id();
    if id.starts_with("cn:") || id.starts_with("moore:") {
        Layout::Ring
    } else if id.starts_with("pn:") || id.starts_with("nim:") || id == "h" {
        Layout::Path
    } else {
        Layout::Custom
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LegalSetsResponse {
    pub game: String,
    pub n: usize,
    pub labels: Vec<String>,
    pub move_sets: Vec<Vec<usize>>,
    pub layout: Layout,
}

pub fn legal_sets(spec: &GameSpec) -> LegalSetsResponse {
    LegalSetsResponse {
        game: spec.id().to_string(),
        n: spec.n(),
        labels: (0..spec.n()).map(game::vertex_label).collect(),
        move_sets: spec.move_sets().to_vec(),
        layout: layout(spec),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameInfo {
    pub id: String,
    pub n: usize,
    pub description: String,
    pub solved: bool,
    pub layout: Layout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GamesResponse {
    pub games: Vec<GameInfo>,
}

pub fn games() -> GamesResponse {
    let mut ids: Vec<String> = Oracle::all(8)
        .into_iter()
        .filter(|o| !matches!(o, Oracle::Path { n, .. } if *n < 3))
        .map(|o| o.id())
        .collect();
    ids.extend(["cn:6,2", "nim:3", "moore:4,2"].map(String::from));
    let games = ids
        .into_iter()
        .map(|id| {
            let spec = game::builtin_game(&id).expect("listed ids are valid");
            let oracle = Oracle::for_spec(&spec);
            let how = match oracle {
                Some(o) if o.has_constructive_moves() => "closed form with constructive winning moves",
                Some(_) => "closed form; winning moves by search",
                None => "no closed form; solved by search",
            };
            GameInfo {
                description: format!("move sets {}; {how}", spec.describe_sets()),
                n: spec.n(),
                solved: oracle.is_some(),
                layout: layout(&spec),
                id,
            }
        })
        .collect();
    GamesResponse { games }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrundyResponse {
    pub game: String,
    pub position: Position,
    pub grundy: u64,
    pub outcome: Outcome,
}

pub fn grundy_value(spec: &GameSpec, pos: Vec<u64>, budget: u64) -> ApiResult<GrundyResponse> {
    let pos = checked(spec, pos)?;
    let g = grundy::grundy(spec, &pos, budget)?;
    Ok(GrundyResponse { game: spec.id().to_string(), position: pos, grundy: g.value, outcome: g.outcome() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerateResponse {
    pub game: String,
    pub bound: u64,
    pub count: usize,
    pub positions: Vec<Position>,
}

pub fn enumerate(spec: &GameSpec, bound: u64) -> ApiResult<EnumerateResponse> {
    let positions = grundy::p_positions(spec, bound)?;
    Ok(EnumerateResponse { game: spec.id().to_string(), bound, count: positions.len(), positions })
}

fn oracle_of(spec: &GameSpec) -> ApiResult<Oracle> {
    Oracle::for_spec(spec).ok_or_else(|| ApiError::Core(Error::UnsupportedGame(spec.id().to_string())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyResponse {
    pub game: String,
    pub moves: Method,
    pub report: VerificationReport,
}

/// Sweeps the box `[0, bound]^n` comparing the game's closed form and move
/// supplier with brute force.
pub fn verify(spec: &GameSpec, bound: u64, parallel: bool) -> ApiResult<VerifyResponse> {
    let oracle = oracle_of(spec)?;
    let member = |p: &[u64]| oracle.is_p(p);
    let options = SweepOptions { parallel };
    let (report, moves) = if oracle.has_constructive_moves() {
        let mover = |p: &Position| oracle.solve_move(p, DEFAULT_BUDGET).map(|s| s.mv);
        (grundy::verify_oracle(spec, &member, Some(&mover), bound, options)?, Method::ClosedForm)
    } else {
        let table = OutcomeTable::new(spec, bound)?;
        let mover = |p: &Position| Ok(table.winning_move(p));
        (grundy::verify_oracle(spec, &member, Some(&mover), bound, options)?, Method::BruteForce)
    };
    Ok(VerifyResponse { game: spec.id().to_string(), moves, report })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleFailure {
    pub position: Position,
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResponse {
    pub game: String,
    pub samples: u64,
    pub max_height: u64,
    pub seed: u64,
    pub p_positions: u64,
    pub failure_count: u64,
    pub failures: Vec<SampleFailure>,
    pub median_latency_us: f64,
}

/// Checks constructive moves on random positions: a move is returned iff
/// the position is N, and it is legal and lands on a P-position.
pub fn verify_samples(spec: &GameSpec, samples: u64, max_height: u64, seed: u64) -> ApiResult<SampleResponse> {
    let oracle = oracle_of(spec)?;
    if !oracle.has_constructive_moves() {
        return Err(ApiError::Core(Error::UnsupportedGame(format!("{} has no constructive moves", spec.id()))));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut latencies = Vec::with_capacity(samples as usize);
    let mut failures = Vec::new();
    let mut failure_count = 0;
    let mut p_positions = 0;
    for _ in 0..samples {
        let pos = Position::new((0..spec.n()).map(|_| rng.gen_range(0..=max_height)).collect());
        let start = Instant::now();
        let result = oracle.solve_move(&pos, 0);
        latencies.push(start.elapsed().as_secs_f64() * 1e6);
        let is_p = oracle.is_p(&pos);
        p_positions += is_p as u64;
        let problem = match result {
            Err(e) => Some((None, e.to_string())),
            Ok(s) => match (s.mv, is_p) {
                (None, true) => None,
                (None, false) => Some((None, "no move from an N-position".to_string())),
                (Some(m), true) => Some((Some(m), "move offered from a P-position".to_string())),
                (Some(m), false) => match spec.is_legal_move(&pos, &m) {
                    Ok(Legality::Legal) => {
                        let after = game::apply_move(&pos, &m).expect("legal move applies");
                        (!oracle.is_p(&after)).then(|| (Some(m), "move lands on an N-position".to_string()))
                    }
                    Ok(Legality::Illegal(r)) => Some((Some(m), format!("illegal move: {r}"))),
                    Err(e) => Some((Some(m), e.to_string())),
                },
            },
        };
        if let Some((mv, reason)) = problem {
            failure_count += 1;
            if failures.len() < grundy::REPORT_CAP {
                failures.push(SampleFailure { position: pos, mv, reason });
            }
        }
    }
    latencies.sort_by(f64::total_cmp);
    let median_latency_us = latencies.get(latencies.len() / 2).copied().unwrap_or(0.0);
    Ok(SampleResponse {
        game: spec.id().to_string(),
        samples,
        max_height,
        seed,
        p_positions,
        failure_count,
        failures,
        median_latency_us,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscoverResponse {
    pub game: String,
    pub bound: u64,
    pub membership: Method,
    pub all: Vec<InvariantVector>,
    pub generators: Vec<InvariantVector>,
}

/// Bounded invariant discovery, using the closed form when there is one and
/// brute-force outcomes otherwise.
pub fn discover(spec: &GameSpec, bound: u64) -> ApiResult<DiscoverResponse> {
    let (d, membership) = match Oracle::for_spec(spec) {
        Some(o) => {
            let member = |p: &[u64]| o.is_p(p);
            (invariance::discover_invariants(spec.n(), &member, bound)?, Method::ClosedForm)
        }
        None => {
            let table = OutcomeTable::new(spec, bound)?;
            let member = |p: &[u64]| table.outcome(p) == Some(Outcome::P);
            (invariance::discover_invariants(spec.n(), &member, bound)?, Method::BruteForce)
        }
    };
    Ok(DiscoverResponse { game: spec.id().to_string(), bound, membership, all: d.all, generators: d.generators })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitInfo {
    pub vertices: Vec<usize>,
    pub label: String,
    pub points: Vec<usize>,
    pub point: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitsResponse {
    pub game: String,
    pub circuits: Vec<CircuitInfo>,
    pub pointed: bool,
    pub p_positions: Option<String>,
}

pub fn circuits(spec: &GameSpec) -> ApiResult<CircuitsResponse> {
    let a = complex::analyze(spec)?;
    let p_positions = a.pointed.then(|| complex::p_family(&a, spec.n()));
    Ok(CircuitsResponse {
        game: spec.id().to_string(),
        circuits: a
            .circuits
            .iter()
            .map(|c| CircuitInfo { vertices: c.vertices.clone(), label: c.label(), points: c.points.clone(), point: c.point })
            .collect(),
        pointed: a.pointed,
        p_positions,
    })
}

#[derive(Debug, Clone, Default)]
pub struct ReduceRequest {
    pub invariants: Vec<Vec<u8>>,
    pub zero: Vec<usize>,
    pub merge: Vec<Vec<usize>>,
    pub lift: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceIterate {
    pub z: Vec<u8>,
    pub coefficient: u64,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReduceResponse {
    pub game: String,
    pub position: Position,
    pub invariance: Vec<InvarianceIterate>,
    #[serde(rename = "case")]
    pub irp_case: Option<String>,
    pub reduced_position: Position,
    pub reduced_sets: Vec<Vec<usize>>,
    pub steps: Vec<String>,
    pub lifted_move: Option<Move>,
}

/// Invariance reduction in the given order, then zero and merge reductions,
/// and optionally lifts a move of the reduced game.
pub fn reduce(spec: &GameSpec, pos: Vec<u64>, req: &ReduceRequest) -> ApiResult<ReduceResponse> {
    let pos = checked(spec, pos)?;
    let vectors = req
        .invariants
        .iter()
        .map(|z| InvariantVector::new(z.clone(), VerifiedBound::Declared))
        .collect::<Result<Vec<_>, _>>()?;
    let schedule = InvarianceSchedule::new(vectors)?;
    let mut trace = ReductionTrace::identity(spec);
    let mut current = pos.clone();
    let mut invariance = Vec::new();
    for z in schedule.vectors() {
        spec.check_dimension(z.len())?;
        let c = invariance::indicator_min(z, &current)?;
        if c > 0 {
            let step = ReductionStep::Invariance { z: z.z.clone(), coeff: c };
            current = step.project(&current)?;
            trace.push(step)?;
        }
        invariance.push(InvarianceIterate { z: z.z.clone(), coefficient: c, position: current.clone() });
    }
    let irp_case = if req.invariants.is_empty() {
        None
    } else {
        Oracle::for_spec(spec).and_then(|o| o.irp_case(&current)).map(String::from)
    };
    if !req.zero.is_empty() {
        let (_, projected, step) = reduction::zero_reduce(trace.target(), &current, &req.zero)?;
        current = projected;
        trace.push(step)?;
    }
    for class in &req.merge {
        let (_, step) = reduction::merge_reduce(trace.target(), class)?;
        current = step.project(&current)?;
        trace.push(step)?;
    }
    let lifted_move = match &req.lift {
        Some(m) => Some(trace.lift_move(&Move::new(m.clone()), &pos)?),
        None => None,
    };
    Ok(ReduceResponse {
        game: spec.id().to_string(),
        position: pos,
        invariance,
        irp_case,
        reduced_position: current,
        reduced_sets: trace.target().move_sets().to_vec(),
        steps: trace.steps().iter().map(|s| s.to_string()).collect(),
        lifted_move,
    })
}

/// Brute-force winning move, for comparison with the constructive one.
pub fn brute_move(spec: &GameSpec, pos: &Position, budget: u64) -> ApiResult<Option<Move>> {
    Ok(Engine::new(spec).with_budget(budget).winning_move(pos)?)
}
