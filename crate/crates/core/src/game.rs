//! SetNim games, positions and moves.
//!
//! A game is a vertex count plus the family of maximal move sets. A move
//! removes at least one token in total from stacks that all lie inside a
//! single move set. Vertices are 0-indexed; display labels `a, b, c, ...`
//! correspond to `0, 1, 2, ...`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Move sets are stored as bitmasks, which caps the vertex count.
pub const MAX_VERTICES: usize = 64;
/// Upper bound for permutation searches (symmetries, isomorphisms).
pub const SYMMETRY_LIMIT: usize = 12;
const MOORE_LIMIT: usize = 16;

fn parse_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    let s = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad entry `{}`: {e}", t.trim()))
        })
        .collect()
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[u64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// Stack heights, one entry per vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(Vec<u64>);

impl Position {
    pub fn new(heights: Vec<u64>) -> Self {
        Position(heights)
    }

    pub fn zeros(n: usize) -> Self {
        Position(vec![0; n])
    }

    pub fn heights(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_terminal(&self) -> bool {
        self.0.iter().all(|&h| h == 0)
    }

    /// Relabels vertices: entry `i` moves to index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Position {
        Position(permute(&self.0, perm))
    }
}

impl Deref for Position {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for Position {
    fn from(v: Vec<u64>) -> Self {
        Position(v)
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_list(s).map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.0)
    }
}

/// Tokens removed per stack.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Move(Vec<u64>);

impl Move {
    pub fn new(removals: Vec<u64>) -> Self {
        Move(removals)
    }

    pub fn zeros(n: usize) -> Self {
        Move(vec![0; n])
    }

    pub fn removals(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Bitmask of the stacks this move touches.
    pub fn support_mask(&self) -> u64 {
        support_mask(&self.0)
    }

    pub fn permuted(&self, perm: &[usize]) -> Move {
        Move(permute(&self.0, perm))
    }
}

impl Deref for Move {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for Move {
    fn from(v: Vec<u64>) -> Self {
        Move(v)
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_list(s).map(Move)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.0)
    }
}

pub(crate) fn support_mask(values: &[u64]) -> u64 {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .fold(0, |m, (i, _)| m | (1 << i))
}

pub(crate) fn permute(values: &[u64], perm: &[usize]) -> Vec<u64> {
    let mut out = vec![0; values.len()];
    for (i, &v) in values.iter().enumerate() {
        out[perm[i]] = v;
    }
    out
}

pub(crate) fn mask_vertices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn mask_of(vertices: &[usize]) -> u64 {
    vertices.iter().fold(0, |m, &v| m | (1 << v))
}

/// Normal-play outcome class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Previous player wins.
    P,
    /// Next player wins.
    N,
}

impl Outcome {
    pub fn from_is_p(is_p: bool) -> Self {
        if is_p {
            Outcome::P
        } else {
            Outcome::N
        }
    }

    pub fn is_p(self) -> bool {
        self == Outcome::P
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::P => "P",
            Outcome::N => "N",
        })
    }
}

/// Why a move was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IllegalReason {
    NoTokensRemoved,
    Overdraw,
    SupportNotPlayable,
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalReason::NoTokensRemoved => "no tokens removed",
            IllegalReason::Overdraw => "removal exceeds a stack height",
            IllegalReason::SupportNotPlayable => "touched stacks do not lie in a single move set",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Legality {
    Legal,
    Illegal(IllegalReason),
}

impl Legality {
    pub fn is_legal(self) -> bool {
        self == Legality::Legal
    }
}

/// A SetNim game: `n` vertices and the maximal move sets, in canonical
/// sorted order.
#[derive(Clone, Debug, Serialize)]
pub struct GameSpec {
    id: String,
    n: usize,
    move_sets: Vec<Vec<usize>>,
    #[serde(skip)]
    masks: Vec<u64>,
}

impl PartialEq for GameSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.move_sets == other.move_sets
    }
}

impl Eq for GameSpec {}

impl Hash for GameSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.move_sets.hash(state);
    }
}

#[derive(Deserialize)]
struct GameFile {
    n: usize,
    move_sets: Vec<Vec<usize>>,
}

impl GameSpec {
    /// Validates and normalizes a raw set family: duplicates and non-maximal
    /// sets are dropped, vertices and sets are sorted, and the union must
    /// cover every vertex.
    pub fn build(n: usize, raw_sets: &[Vec<usize>]) -> Result<GameSpec> {
        if n == 0 {
            return Err(Error::BadParameters {
                id: "custom".into(),
                reason: "a game needs at least one vertex".into(),
            });
        }
        if n > MAX_VERTICES {
            return Err(Error::TooLarge { what: "a game", n, limit: MAX_VERTICES });
        }
        let mut masks = Vec::with_capacity(raw_sets.len());
        for (i, set) in raw_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptySet(i));
            }
            if let Some(&vertex) = set.iter().find(|&&v| v >= n) {
                return Err(Error::IndexOutOfRange { vertex, n });
            }
            masks.push(mask_of(set));
        }
        let spec = GameSpec::from_masks(n, masks, "custom".into());
        let covered = spec.masks.iter().fold(0u64, |m, s| m | s);
        let missing: Vec<usize> = (0..n).filter(|v| covered >> v & 1 == 0).collect();
        if !missing.is_empty() {
            return Err(Error::CoverageGap { missing });
        }
        Ok(spec)
    }

    /// Normalizes without the coverage check; reductions use this since
    /// restricting a covering family keeps it covering.
    pub(crate) fn from_masks(n: usize, mut masks: Vec<u64>, id: String) -> GameSpec {
        masks.retain(|&m| m != 0);
        masks.sort_unstable();
        masks.dedup();
        let maximal: Vec<u64> = masks
            .iter()
            .copied()
            .filter(|&m| !masks.iter().any(|&o| o != m && m & o == m))
            .collect();
        let mut move_sets: Vec<Vec<usize>> = maximal.iter().map(|&m| mask_vertices(m)).collect();
        move_sets.sort();
        let masks = move_sets.iter().map(|s| mask_of(s)).collect();
        GameSpec { id, n, move_sets, masks }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn move_sets(&self) -> &[Vec<usize>] {
        &self.move_sets
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    /// True if every vertex of `mask` lies in a common move set.
    pub fn is_face(&self, mask: u64) -> bool {
        self.masks.iter().any(|&s| mask & s == mask)
    }

    pub fn check_dimension(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.n, actual: len })
        }
    }

    pub fn is_legal_move(&self, pos: &Position, mv: &Move) -> Result<Legality> {
        self.check_dimension(pos.len())?;
        self.check_dimension(mv.len())?;
        if mv.total() == 0 {
            return Ok(Legality::Illegal(IllegalReason::NoTokensRemoved));
        }
        if mv.iter().zip(pos.iter()).any(|(m, p)| m > p) {
            return Ok(Legality::Illegal(IllegalReason::Overdraw));
        }
        if !self.is_face(mv.support_mask()) {
            return Ok(Legality::Illegal(IllegalReason::SupportNotPlayable));
        }
        Ok(Legality::Legal)
    }

    /// Every distinct legal move, ordered by move set index and then
    /// lexicographically by removal vector. A removal pattern that fits in
    /// several move sets is yielded once, under the first.
    pub fn legal_moves<'a>(&'a self, pos: &'a [u64]) -> LegalMoves<'a> {
        LegalMoves { spec: self, pos, set: 0, vertices: Vec::new(), counter: Vec::new(), started: false }
    }

    /// Relabels vertices: vertex `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> GameSpec {
        let masks = self
            .masks
            .iter()
            .map(|&m| mask_vertices(m).iter().fold(0u64, |acc, &v| acc | (1 << perm[v])))
            .collect();
        GameSpec::from_masks(self.n, masks, self.id.clone())
    }

    /// All vertex permutations mapping the family of move sets onto itself.
    pub fn symmetries(&self) -> Result<Vec<Vec<usize>>> {
        isomorphisms(self, self, usize::MAX)
    }

    /// Short human-readable description of the move sets using letters.
    pub fn describe_sets(&self) -> String {
        let sets: Vec<String> = self
            .move_sets
            .iter()
            .map(|s| s.iter().map(|&v| vertex_label(v)).collect::<String>())
            .collect();
        format!("{{{}}}", sets.join(","))
    }
}

/// Display label of a vertex: `a`, `b`, ... for the first 26, numbers after.
pub fn vertex_label(v: usize) -> String {
    if v < 26 {
        ((b'a' + v as u8) as char).to_string()
    } else {
        format!("v{v}")
    }
}

/// Iterator returned by [`GameSpec::legal_moves`].
pub struct LegalMoves<'a> {
    spec: &'a GameSpec,
    pos: &'a [u64],
    set: usize,
    vertices: Vec<usize>,
    counter: Vec<u64>,
    started: bool,
}

impl Iterator for LegalMoves<'_> {
    type Item = Move;

    fn next(&mut self) -> Option<Move> {
        let masks = self.spec.masks();
        while self.set < masks.len() {
            if !self.started {
                self.vertices = mask_vertices(masks[self.set])
                    .into_iter()
                    .filter(|&v| v < self.pos.len() && self.pos[v] > 0)
                    .collect();
                self.counter = vec![0; self.vertices.len()];
                self.started = true;
            }
            // odometer, last vertex fastest, so removal vectors come out in
            // ascending lexicographic order
            let mut k = self.counter.len();
            let mut advanced = false;
            while k > 0 {
                k -= 1;
                if self.counter[k] < self.pos[self.vertices[k]] {
                    self.counter[k] += 1;
                    advanced = true;
                    break;
                }
                self.counter[k] = 0;
            }
            if !advanced {
                self.set += 1;
                self.started = false;
                continue;
            }
            let support = self
                .vertices
                .iter()
                .zip(&self.counter)
                .filter(|(_, &c)| c > 0)
                .fold(0u64, |m, (&v, _)| m | (1 << v));
            if masks[..self.set].iter().any(|&earlier| support & earlier == support) {
                continue;
            }
            let mut removals = vec![0; self.pos.len()];
            for (&v, &c) in self.vertices.iter().zip(&self.counter) {
                removals[v] = c;
            }
            return Some(Move(removals));
        }
        None
    }
}

/// Normalizing constructor, see [`GameSpec::build`].
pub fn build_game(n: usize, raw_sets: &[Vec<usize>]) -> Result<GameSpec> {
    GameSpec::build(n, raw_sets)
}

/// Componentwise difference `pos - mv`.
pub fn apply_move(pos: &Position, mv: &Move) -> Result<Position> {
    if pos.len() != mv.len() {
        return Err(Error::DimensionMismatch { expected: pos.len(), actual: mv.len() });
    }
    pos.iter()
        .zip(mv.iter())
        .enumerate()
        .map(|(index, (&p, &m))| p.checked_sub(m).ok_or(Error::NegativeResult { index }))
        .collect::<Result<Vec<u64>>>()
        .map(Position)
}

fn parse_params(id: &str, params: &str, count: usize) -> Result<Vec<usize>> {
    let bad = |reason: String| Error::BadParameters { id: id.to_string(), reason };
    let values: Vec<usize> = params
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| bad(format!("`{}`: {e}", t.trim()))))
        .collect::<Result<_>>()?;
    if values.len() != count {
        return Err(bad(format!("expected {count} parameter(s), got {}", values.len())));
    }
    Ok(values)
}

fn windows(id: &str, n: usize, k: usize, circular: bool) -> Result<GameSpec> {
    let bad = |reason: &str| Error::BadParameters { id: id.to_string(), reason: reason.into() };
    if n == 0 || k == 0 {
        return Err(bad("n and k must be positive"));
    }
    if k > n {
        return Err(bad("k must not exceed n"));
    }
    if n > MAX_VERTICES {
        return Err(Error::TooLarge { what: "a game", n, limit: MAX_VERTICES });
    }
    let starts = if circular { n } else { n - k + 1 };
    let sets: Vec<Vec<usize>> = (0..starts).map(|i| (0..k).map(|j| (i + j) % n).collect()).collect();
    Ok(GameSpec::build(n, &sets)?.with_id(id))
}

/// Resolves a game id: `nim:<n>`, `moore:<n>,<k>`, `cn:<n>,<k>`,
/// `pn:<n>,<k>`, `h`, or `file:<path>` (a JSON document with `n` and
/// `move_sets`).
pub fn builtin_game(id: &str) -> Result<GameSpec> {
    let id = id.trim();
    let (kind, params) = id.split_once(':').unwrap_or((id, ""));
    match kind {
        "h" if params.is_empty() => {
            let sets = vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![0, 5]];
            Ok(GameSpec::build(6, &sets)?.with_id("h"))
        }
        "nim" => {
            let n = parse_params(id, params, 1)?[0];
            if n == 0 {
                return Err(Error::BadParameters { id: id.into(), reason: "n must be positive".into() });
            }
            let sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            Ok(GameSpec::build(n, &sets)?.with_id(id))
        }
        "moore" => {
            let p = parse_params(id, params, 2)?;
            let (n, k) = (p[0], p[1]);
            if n == 0 || k == 0 || k > n {
                return Err(Error::BadParameters { id: id.into(), reason: "need 1 <= k <= n".into() });
            }
            if n > MOORE_LIMIT {
                return Err(Error::TooLarge { what: "moore games", n, limit: MOORE_LIMIT });
            }
            let sets: Vec<Vec<usize>> = (0u64..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .map(mask_vertices)
                .collect();
            Ok(GameSpec::build(n, &sets)?.with_id(id))
        }
        "cn" => {
            let p = parse_params(id, params, 2)?;
            windows(id, p[0], p[1], true)
        }
        "pn" => {
            let p = parse_params(id, params, 2)?;
            windows(id, p[0], p[1], false)
        }
        "file" if !params.is_empty() => {
            let fail = |reason: String| Error::FileFormat { path: params.to_string(), reason };
            let text = std::fs::read_to_string(params).map_err(|e| fail(e.to_string()))?;
            let file: GameFile = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
            Ok(GameSpec::build(file.n, &file.move_sets)?.with_id(id))
        }
        _ => Err(Error::UnknownId(id.to_string())),
    }
}

struct Incidence {
    degree: Vec<usize>,
    co: Vec<Vec<usize>>,
    sorted_masks: Vec<u64>,
}

impl Incidence {
    fn of(spec: &GameSpec) -> Self {
        let n = spec.n();
        let mut degree = vec![0; n];
        let mut co = vec![vec![0; n]; n];
        for &m in spec.masks() {
            let vs = mask_vertices(m);
            for &u in &vs {
                degree[u] += 1;
                for &v in &vs {
                    co[u][v] += 1;
                }
            }
        }
        let mut sorted_masks = spec.masks().to_vec();
        sorted_masks.sort_unstable();
        Incidence { degree, co, sorted_masks }
    }
}

/// Vertex bijections `perm` (vertex `i` of `from` maps to `perm[i]` of `to`)
/// carrying the move sets of `from` exactly onto those of `to`, in
/// lexicographic order of `perm`, stopping after `limit` results.
pub fn isomorphisms(from: &GameSpec, to: &GameSpec, limit: usize) -> Result<Vec<Vec<usize>>> {
    let n = from.n();
    if n > SYMMETRY_LIMIT {
        return Err(Error::TooLarge { what: "permutation search", n, limit: SYMMETRY_LIMIT });
    }
    if to.n() != n || to.masks().len() != from.masks().len() {
        return Ok(Vec::new());
    }
    let a = Incidence::of(from);
    let b = Incidence::of(to);
    let mut found = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend_isomorphism(from, &a, &b, 0, &mut perm, &mut used, &mut found, limit);
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn extend_isomorphism(
    from: &GameSpec,
    a: &Incidence,
    b: &Incidence,
    v: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    found: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    let n = perm.len();
    if found.len() >= limit {
        return;
    }
    if v == n {
        let mut mapped: Vec<u64> = from
            .masks()
            .iter()
            .map(|&m| mask_vertices(m).iter().fold(0u64, |acc, &u| acc | (1 << perm[u])))
            .collect();
        mapped.sort_unstable();
        if mapped == b.sorted_masks {
            found.push(perm.clone());
        }
        return;
    }
    for w in 0..n {
        if used[w] || a.degree[v] != b.degree[w] || a.co[v][v] != b.co[w][w] {
            continue;
        }
        if (0..v).any(|u| a.co[v][u] != b.co[w][perm[u]]) {
            continue;
        }
        perm[v] = w;
        used[w] = true;
        extend_isomorphism(from, a, b, v + 1, perm, used, found, limit);
        used[w] = false;
        perm[v] = usize::MAX;
    }
}

/// Lexicographically first isomorphism, if any.
pub fn first_isomorphism(from: &GameSpec, to: &GameSpec) -> Result<Option<Vec<usize>>> {
    Ok(isomorphisms(from, to, 1)?.pop())
}

/// Compares positions by total token count, then lexicographically.
pub fn by_total_then_lex(a: &[u64], b: &[u64]) -> Ordering {
    a.iter().sum::<u64>().cmp(&b.iter().sum()).then_with(|| a.cmp(b))
}
