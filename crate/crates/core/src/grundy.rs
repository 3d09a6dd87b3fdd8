//! Brute-force ground truth: memoized Grundy values and outcomes, dense
//! outcome tables over height boxes, and exhaustive oracle verification.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Move, Outcome, Position};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest box (number of positions) a dense table or sweep will allocate.
pub const MAX_BOX: u64 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GrundyValue {
    pub value: u64,
}

impl GrundyValue {
    pub fn outcome(self) -> Outcome {
        Outcome::from_is_p(self.value == 0)
    }
}

fn mex(values: &mut [u64]) -> u64 {
    values.sort_unstable();
    let mut m = 0;
    for &v in values.iter() {
        if v == m {
            m += 1;
        } else if v > m {
            break;
        }
    }
    m
}

struct GrundyFrame {
    key: Vec<u64>,
    children: Vec<Vec<u64>>,
    next: usize,
    seen: Vec<u64>,
}

struct OutcomeFrame {
    key: Vec<u64>,
    children: Vec<Vec<u64>>,
    next: usize,
    has_p_option: bool,
}

/// Memoized search over one game. The memo persists across queries on the
/// same engine.
pub struct Engine<'a> {
    spec: &'a GameSpec,
    budget: u64,
    work: u64,
    cache: bool,
    symmetries: Option<Vec<Vec<usize>>>,
    grundy_memo: HashMap<Vec<u64>, u64>,
    outcome_memo: HashMap<Vec<u64>, bool>,
}

impl<'a> Engine<'a> {
    pub fn new(spec: &'a GameSpec) -> Self {
        Engine {
            spec,
            budget: DEFAULT_BUDGET,
            work: 0,
            cache: true,
            symmetries: None,
            grundy_memo: HashMap::new(),
            outcome_memo: HashMap::new(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Disabling the cache makes every query a plain tree search.
    pub fn with_cache(mut self, cache: bool) -> Self {
        self.cache = cache;
        self
    }

    /// Keys the memo on the least symmetric image of each position.
    pub fn with_canonicalization(mut self, on: bool) -> Result<Self> {
        self.symmetries = if on { Some(self.spec.symmetries()?) } else { None };
        Ok(self)
    }

    /// Option evaluations spent so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn cache_size(&self) -> usize {
        self.grundy_memo.len() + self.outcome_memo.len()
    }

    fn key(&self, pos: &[u64]) -> Vec<u64> {
        match &self.symmetries {
            Some(perms) => perms.iter().map(|p| game::permute(pos, p)).min().expect("identity is a symmetry"),
            None => pos.to_vec(),
        }
    }

    fn children(&mut self, pos: &[u64]) -> Result<Vec<Vec<u64>>> {
        let mut out = Vec::new();
        for mv in self.spec.legal_moves(pos) {
            self.work += 1;
            if self.work > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            out.push(pos.iter().zip(mv.iter()).map(|(p, m)| p - m).collect());
        }
        Ok(out)
    }

    pub fn grundy(&mut self, pos: &Position) -> Result<GrundyValue> {
        self.spec.check_dimension(pos.len())?;
        let root_key = self.key(pos);
        if self.cache {
            if let Some(&v) = self.grundy_memo.get(&root_key) {
                return Ok(GrundyValue { value: v });
            }
        }
        let children = self.children(pos)?;
        let mut stack = vec![GrundyFrame { key: root_key, children, next: 0, seen: Vec::new() }];
        let mut returned: Option<u64> = None;
        loop {
            let mut descend = None;
            {
                let top = stack.last_mut().expect("non-empty stack");
                if let Some(v) = returned.take() {
                    top.seen.push(v);
                }
                while top.next < top.children.len() {
                    let child = &top.children[top.next];
                    top.next += 1;
                    if self.cache {
                        let key = match &self.symmetries {
                            Some(_) => self.key(child),
                            None => child.clone(),
                        };
                        if let Some(&v) = self.grundy_memo.get(&key) {
                            top.seen.push(v);
                            continue;
                        }
                    }
                    descend = Some(child.clone());
                    break;
                }
            }
            if let Some(child) = descend {
                let key = self.key(&child);
                let children = self.children(&child)?;
                stack.push(GrundyFrame { key, children, next: 0, seen: Vec::new() });
                continue;
            }
            let mut frame = stack.pop().expect("non-empty stack");
            let value = mex(&mut frame.seen);
            if self.cache {
                self.grundy_memo.insert(frame.key, value);
            }
            if stack.is_empty() {
                return Ok(GrundyValue { value });
            }
            returned = Some(value);
        }
    }

    /// Outcome with early exit on the first P option.
    pub fn outcome(&mut self, pos: &Position) -> Result<Outcome> {
        self.spec.check_dimension(pos.len())?;
        self.outcome_raw(pos).map(Outcome::from_is_p)
    }

    fn outcome_raw(&mut self, pos: &[u64]) -> Result<bool> {
        let root_key = self.key(pos);
        if self.cache {
            if let Some(&v) = self.outcome_memo.get(&root_key) {
                return Ok(v);
            }
        }
        let children = self.children(pos)?;
        let mut stack = vec![OutcomeFrame { key: root_key, children, next: 0, has_p_option: false }];
        let mut returned: Option<bool> = None;
        loop {
            let mut descend = None;
            {
                let top = stack.last_mut().expect("non-empty stack");
                if let Some(child_is_p) = returned.take() {
                    top.has_p_option |= child_is_p;
                }
                while !top.has_p_option && top.next < top.children.len() {
                    let child = &top.children[top.next];
                    top.next += 1;
                    if self.cache {
                        let key = match &self.symmetries {
                            Some(_) => self.key(child),
                            None => child.clone(),
                        };
                        if let Some(&is_p) = self.outcome_memo.get(&key) {
                            top.has_p_option |= is_p;
                            continue;
                        }
                    }
                    descend = Some(child.clone());
                    break;
                }
            }
            if let Some(child) = descend {
                let key = self.key(&child);
                let children = self.children(&child)?;
                stack.push(OutcomeFrame { key, children, next: 0, has_p_option: false });
                continue;
            }
            let frame = stack.pop().expect("non-empty stack");
            let is_p = !frame.has_p_option;
            if self.cache {
                self.outcome_memo.insert(frame.key, is_p);
            }
            if stack.is_empty() {
                return Ok(is_p);
            }
            returned = Some(is_p);
        }
    }

    /// First legal move, in [`GameSpec::legal_moves`] order, onto a P-position.
    pub fn winning_move(&mut self, pos: &Position) -> Result<Option<Move>> {
        self.spec.check_dimension(pos.len())?;
        let moves: Vec<Move> = self.spec.legal_moves(pos).collect();
        for mv in moves {
            let child: Vec<u64> = pos.iter().zip(mv.iter()).map(|(p, m)| p - m).collect();
            if self.outcome_raw(&child)? {
                return Ok(Some(mv));
            }
        }
        Ok(None)
    }
}

pub fn grundy(spec: &GameSpec, pos: &Position, budget: u64) -> Result<GrundyValue> {
    Engine::new(spec).with_budget(budget).grundy(pos)
}

pub fn outcome(spec: &GameSpec, pos: &Position, budget: u64) -> Result<Outcome> {
    Engine::new(spec).with_budget(budget).outcome(pos)
}

pub fn brute_winning_move(spec: &GameSpec, pos: &Position, budget: u64) -> Result<Option<Move>> {
    Engine::new(spec).with_budget(budget).winning_move(pos)
}

/// Mixed-radix indexing of the box `[0, bound]^n`, first coordinate most
/// significant, so index order is lexicographic order.
#[derive(Clone, Debug)]
pub struct BoxIndex {
    n: usize,
    bound: u64,
    strides: Vec<usize>,
    size: usize,
}

impl BoxIndex {
    pub fn new(n: usize, bound: u64) -> Result<Self> {
        let radix = bound.checked_add(1).ok_or(Error::BudgetExceeded(MAX_BOX))?;
        let mut size: u64 = 1;
        for _ in 0..n {
            size = size.checked_mul(radix).filter(|&s| s <= MAX_BOX).ok_or(Error::BudgetExceeded(MAX_BOX))?;
        }
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radix as usize;
        }
        Ok(BoxIndex { n, bound, strides, size: size as usize })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn index(&self, pos: &[u64]) -> Option<usize> {
        if pos.len() != self.n || pos.iter().any(|&h| h > self.bound) {
            return None;
        }
        Some(pos.iter().zip(&self.strides).map(|(&h, &s)| h as usize * s).sum())
    }

    pub fn position(&self, mut idx: usize) -> Vec<u64> {
        let radix = self.bound as usize + 1;
        let mut out = vec![0; self.n];
        for i in (0..self.n).rev() {
            out[i] = (idx % radix) as u64;
            idx /= radix;
        }
        out
    }

    /// Index offset of removing `mv` (or adding it, with the sign flipped).
    pub fn offset(&self, mv: &[u64]) -> usize {
        mv.iter().zip(&self.strides).map(|(&m, &s)| m as usize * s).sum()
    }
}

/// Outcome of every position in a height box, computed retrogradely.
pub struct OutcomeTable {
    spec: GameSpec,
    index: BoxIndex,
    is_p: Vec<bool>,
}

impl OutcomeTable {
    pub fn new(spec: &GameSpec, bound: u64) -> Result<Self> {
        let index = BoxIndex::new(spec.n(), bound)?;
        let size = index.size();
        let mut is_n = vec![false; size];
        let mut is_p = vec![false; size];
        let sets: Vec<Vec<usize>> = spec.masks().iter().map(|&m| game::mask_vertices(m)).collect();
        let mut counter = Vec::new();
        for idx in 0..size {
            if is_n[idx] {
                continue;
            }
            is_p[idx] = true;
            let pos = index.position(idx);
            // every position reachable backwards by one move is N
            for set in &sets {
                let room: Vec<u64> = set.iter().map(|&v| bound - pos[v]).collect();
                counter.clear();
                counter.resize(set.len(), 0u64);
                loop {
                    let mut j = set.len();
                    loop {
                        if j == 0 {
                            break;
                        }
                        j -= 1;
                        if counter[j] < room[j] {
                            counter[j] += 1;
                            break;
                        }
                        counter[j] = 0;
                    }
                    if counter.iter().all(|&c| c == 0) {
                        break;
                    }
                    let up: usize = set.iter().zip(&counter).map(|(&v, &c)| c as usize * index.strides[v]).sum();
                    is_n[idx + up] = true;
                }
            }
        }
        Ok(OutcomeTable { spec: spec.clone(), index, is_p })
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn box_index(&self) -> &BoxIndex {
        &self.index
    }

    pub fn bound(&self) -> u64 {
        self.index.bound
    }

    pub fn outcome(&self, pos: &[u64]) -> Option<Outcome> {
        self.index.index(pos).map(|i| Outcome::from_is_p(self.is_p[i]))
    }

    pub fn is_p_index(&self, idx: usize) -> bool {
        self.is_p[idx]
    }

    pub fn p_positions(&self) -> Vec<Position> {
        self.is_p
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| Position::new(self.index.position(i)))
            .collect()
    }

    /// First legal move, in [`GameSpec::legal_moves`] order, onto a P-position.
    /// `None` for P-positions and for positions outside the box.
    pub fn winning_move(&self, pos: &[u64]) -> Option<Move> {
        let idx = self.index.index(pos)?;
        if self.is_p[idx] {
            return None;
        }
        self.spec.legal_moves(pos).find(|mv| self.is_p[idx - self.index.offset(mv)])
    }
}

/// All P-positions of the box `[0, bound]^n`, in lexicographic order.
pub fn p_positions(spec: &GameSpec, bound: u64) -> Result<Vec<Position>> {
    Ok(OutcomeTable::new(spec, bound)?.p_positions())
}

pub const REPORT_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeMismatch {
    pub position: Position,
    pub brute_force: Outcome,
    pub oracle: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureViolation {
    pub from: Position,
    #[serde(rename = "move")]
    pub mv: Move,
    pub to: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReachabilityViolation {
    pub position: Position,
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub bound: u64,
    pub positions_checked: u64,
    pub oracle_p_positions: u64,
    pub outcome_mismatch_count: u64,
    pub outcome_mismatches: Vec<OutcomeMismatch>,
    pub closure_violation_count: u64,
    pub closure_violations: Vec<ClosureViolation>,
    pub reachability_checked: bool,
    pub reachability_violation_count: u64,
    pub reachability_violations: Vec<ReachabilityViolation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.outcome_mismatch_count == 0 && self.closure_violation_count == 0 && self.reachability_violation_count == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} mismatches, {} closure violations, {} reachability violations",
            self.outcome_mismatch_count, self.closure_violation_count, self.reachability_violation_count
        )
    }

    fn absorb(&mut self, other: VerificationReport) {
        self.positions_checked += other.positions_checked;
        self.oracle_p_positions += other.oracle_p_positions;
        self.outcome_mismatch_count += other.outcome_mismatch_count;
        self.closure_violation_count += other.closure_violation_count;
        self.reachability_violation_count += other.reachability_violation_count;
        extend_capped(&mut self.outcome_mismatches, other.outcome_mismatches);
        extend_capped(&mut self.closure_violations, other.closure_violations);
        extend_capped(&mut self.reachability_violations, other.reachability_violations);
    }
}

fn extend_capped<T>(into: &mut Vec<T>, from: Vec<T>) {
    let room = REPORT_CAP.saturating_sub(into.len());
    into.extend(from.into_iter().take(room));
}

fn push_capped<T>(into: &mut Vec<T>, item: T) {
    if into.len() < REPORT_CAP {
        into.push(item);
    }
}

pub type Membership<'a> = &'a (dyn Fn(&[u64]) -> bool + Sync);
pub type MoveSupplier<'a> = &'a (dyn Fn(&Position) -> Result<Option<Move>> + Sync);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { parallel: true }
    }
}

/// Checks a membership predicate (and optionally a move supplier) against
/// brute force on every position of the box `[0, bound]^n`.
pub fn verify_oracle(
    spec: &GameSpec,
    membership: Membership<'_>,
    move_fn: Option<MoveSupplier<'_>>,
    bound: u64,
    options: SweepOptions,
) -> Result<VerificationReport> {
    let table = OutcomeTable::new(spec, bound)?;
    let index = table.box_index();
    let size = index.size();
    let chunk = if spec.n() == 0 { size } else { index.strides()[0] };
    let chunks = size / chunk;

    let member_chunk = |c: usize| -> Vec<bool> { (c * chunk..(c + 1) * chunk).map(|i| membership(&index.position(i))).collect() };
    let member: Vec<bool> = if options.parallel {
        (0..chunks).into_par_iter().flat_map_iter(member_chunk).collect()
    } else {
        (0..chunks).flat_map(member_chunk).collect()
    };

    let check_chunk = |c: usize| -> VerificationReport {
        let mut rep = VerificationReport::default();
        for idx in c * chunk..(c + 1) * chunk {
            let heights = index.position(idx);
            let pos = Position::new(heights);
            let oracle_p = member[idx];
            let brute_p = table.is_p_index(idx);
            rep.positions_checked += 1;
            if oracle_p {
                rep.oracle_p_positions += 1;
            }
            if oracle_p != brute_p {
                rep.outcome_mismatch_count += 1;
                push_capped(
                    &mut rep.outcome_mismatches,
                    OutcomeMismatch {
                        position: pos.clone(),
                        brute_force: Outcome::from_is_p(brute_p),
                        oracle: Outcome::from_is_p(oracle_p),
                    },
                );
            }
            if oracle_p {
                for mv in spec.legal_moves(&pos) {
                    let to = idx - index.offset(&mv);
                    if member[to] {
                        rep.closure_violation_count += 1;
                        push_capped(
                            &mut rep.closure_violations,
                            ClosureViolation { from: pos.clone(), to: Position::new(index.position(to)), mv },
                        );
                    }
                }
            }
            if let Some(supplier) = move_fn {
                let problem = match supplier(&pos) {
                    Err(e) => Some((None, format!("move supplier failed: {e}"))),
                    Ok(None) if !oracle_p => Some((None, "no move offered from an N-position".to_string())),
                    Ok(None) => None,
                    Ok(Some(mv)) if oracle_p => Some((Some(mv), "move offered from a P-position".to_string())),
                    Ok(Some(mv)) => match spec.is_legal_move(&pos, &mv) {
                        Ok(l) if l.is_legal() => {
                            let to = idx - index.offset(&mv);
                            if member[to] {
                                None
                            } else {
                                Some((Some(mv), "move lands on an N-position".to_string()))
                            }
                        }
                        Ok(l) => Some((Some(mv), format!("illegal move: {l:?}"))),
                        Err(e) => Some((Some(mv), format!("malformed move: {e}"))),
                    },
                };
                if let Some((mv, reason)) = problem {
                    rep.reachability_violation_count += 1;
                    push_capped(&mut rep.reachability_violations, ReachabilityViolation { position: pos, mv, reason });
                }
            }
        }
        rep
    };

    let parts: Vec<VerificationReport> = if options.parallel {
        (0..chunks).into_par_iter().map(check_chunk).collect()
    } else {
        (0..chunks).map(check_chunk).collect()
    };
    let mut report = VerificationReport { bound, reachability_checked: move_fn.is_some(), ..Default::default() };
    for part in parts {
        report.absorb(part);
    }
    Ok(report)
}
