//! Invariant vectors: bounded verification, discovery, the Invariance
//! Reduction Process and membership in the cone of a generator set.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Position};
use crate::grundy::{BoxIndex, Membership};
use crate::reduction::{self, ReductionStep, ReductionTrace};
use crate::solution::{Explanation, Method, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerifiedBound {
    /// Taken from a theorem, not checked here.
    Declared,
    /// Checked on every position with heights up to the bound.
    Bounded(u64),
}

impl Serialize for VerifiedBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            VerifiedBound::Declared => s.serialize_str("declared"),
            VerifiedBound::Bounded(b) => s.serialize_u64(*b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct InvariantVector {
    pub z: Vec<u8>,
    pub verified_bound: VerifiedBound,
}

impl InvariantVector {
    pub fn new(z: Vec<u8>, verified_bound: VerifiedBound) -> Result<Self> {
        if z.iter().any(|&v| v > 1) {
            return Err(Error::BadParameters { id: "invariant vector".into(), reason: "entries must be 0 or 1".into() });
        }
        if z.iter().all(|&v| v == 0) {
            return Err(Error::BadParameters { id: "invariant vector".into(), reason: "vector is zero".into() });
        }
        Ok(InvariantVector { z, verified_bound })
    }

    pub fn declared(z: &[u8]) -> Self {
        Self::new(z.to_vec(), VerifiedBound::Declared).expect("valid declared vector")
    }

    fn from_mask(n: usize, mask: u64, verified_bound: VerifiedBound) -> Self {
        InvariantVector { z: (0..n).map(|i| (mask >> i & 1) as u8).collect(), verified_bound }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn support_mask(&self) -> u64 {
        self.z.iter().enumerate().filter(|(_, &v)| v == 1).fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn support(&self) -> Vec<usize> {
        game::mask_vertices(self.support_mask())
    }
}

impl fmt::Display for InvariantVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: Vec<String> = self.z.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", z.join(","))
    }
}

/// Ordered invariant vectors, grouped into batches of consecutive vectors
/// with pairwise disjoint supports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceSchedule {
    vectors: Vec<InvariantVector>,
    batches: Vec<Vec<usize>>,
}

impl InvarianceSchedule {
    pub fn new(vectors: Vec<InvariantVector>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
                return Err(Error::DimensionMismatch { expected: first.len(), actual: bad.len() });
            }
        }
        let mut batches: Vec<Vec<usize>> = Vec::new();
        let mut used = 0u64;
        for (i, v) in vectors.iter().enumerate() {
            let m = v.support_mask();
            match batches.last_mut() {
                Some(batch) if used & m == 0 => {
                    batch.push(i);
                    used |= m;
                }
                _ => {
                    batches.push(vec![i]);
                    used = m;
                }
            }
        }
        Ok(InvarianceSchedule { vectors, batches })
    }

    pub fn declared(vectors: &[&[u8]]) -> Self {
        Self::new(vectors.iter().map(|z| InvariantVector::declared(z)).collect()).expect("consistent lengths")
    }

    pub fn vectors(&self) -> &[InvariantVector] {
        &self.vectors
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }
}

/// Minimum of `pos` over the support of `z`.
pub fn indicator_min(z: &InvariantVector, pos: &[u64]) -> Result<u64> {
    if z.len() != pos.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), actual: pos.len() });
    }
    Ok(pos.iter().zip(&z.z).filter(|(_, &zi)| zi == 1).map(|(&p, _)| p).min().unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceReduction {
    pub position: Position,
    pub coefficients: Vec<u64>,
    /// One step per vector with a nonzero coefficient.
    pub steps: Vec<ReductionStep>,
}

fn subtract(current: &mut [u64], z: &InvariantVector, c: u64) {
    for (p, &zi) in current.iter_mut().zip(&z.z) {
        *p -= c * zi as u64;
    }
}

/// Subtracts each vector's indicator minimum in schedule order. A vector
/// whose support already holds an empty stack gets coefficient 0.
pub fn invariance_reduce(schedule: &InvarianceSchedule, pos: &Position) -> Result<InvarianceReduction> {
    let mut current = pos.to_vec();
    let mut coefficients = Vec::with_capacity(schedule.vectors.len());
    let mut steps = Vec::new();
    for z in &schedule.vectors {
        let c = indicator_min(z, &current)?;
        coefficients.push(c);
        if c > 0 {
            subtract(&mut current, z, c);
            steps.push(ReductionStep::Invariance { z: z.z.clone(), coeff: c });
        }
    }
    Ok(InvarianceReduction { position: Position::new(current), coefficients, steps })
}

/// As [`invariance_reduce`], but all coefficients of a batch are read off
/// the same intermediate position.
pub fn invariance_reduce_batched(schedule: &InvarianceSchedule, pos: &Position) -> Result<InvarianceReduction> {
    let mut current = pos.to_vec();
    let mut coefficients = vec![0; schedule.vectors.len()];
    let mut steps = Vec::new();
    for batch in &schedule.batches {
        let cs: Vec<u64> =
            batch.iter().map(|&i| indicator_min(&schedule.vectors[i], &current)).collect::<Result<_>>()?;
        for (&i, &c) in batch.iter().zip(&cs) {
            coefficients[i] = c;
            if c > 0 {
                subtract(&mut current, &schedule.vectors[i], c);
                steps.push(ReductionStep::Invariance { z: schedule.vectors[i].z.clone(), coeff: c });
            }
        }
    }
    Ok(InvarianceReduction { position: Position::new(current), coefficients, steps })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceCheck {
    pub invariant: bool,
    pub bound: u64,
    /// First position `p` in lexicographic order whose class differs from
    /// that of `p + z`.
    pub witness: Option<Position>,
}

fn membership_bitmap(index: &BoxIndex, membership: Membership<'_>) -> Vec<bool> {
    (0..index.size()).into_par_iter().map(|i| membership(&index.position(i))).collect()
}

fn first_witness(index: &BoxIndex, member: &[bool], mask: u64) -> Option<usize> {
    let vertices = game::mask_vertices(mask);
    let shift: usize = vertices.iter().map(|&v| index.strides()[v]).sum();
    let bound = index.bound();
    (0..index.size()).find(|&idx| {
        let fits = vertices.iter().all(|&v| (idx / index.strides()[v]) as u64 % (bound + 1) < bound);
        fits && member[idx] != member[idx + shift]
    })
}

/// Checks `membership(p) == membership(p + z)` for every `p` in
/// `[0, bound]^n` with `p + z` still in the box.
pub fn is_invariant_bounded(n: usize, membership: Membership<'_>, z: &InvariantVector, bound: u64) -> Result<InvarianceCheck> {
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: z.len() });
    }
    let index = BoxIndex::new(n, bound)?;
    let member = membership_bitmap(&index, membership);
    let witness = first_witness(&index, &member, z.support_mask()).map(|i| Position::new(index.position(i)));
    Ok(InvarianceCheck { invariant: witness.is_none(), bound, witness })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discovery {
    pub bound: u64,
    pub all: Vec<InvariantVector>,
    pub generators: Vec<InvariantVector>,
}

pub const DISCOVERY_LIMIT: usize = 12;

/// Every nonzero zero-one vector that passes [`is_invariant_bounded`],
/// ordered by weight then by support bitmask, plus the members that are not
/// the sum of two members with disjoint supports.
pub fn discover_invariants(n: usize, membership: Membership<'_>, bound: u64) -> Result<Discovery> {
    if n > DISCOVERY_LIMIT {
        return Err(Error::TooLarge { what: "invariant discovery", n, limit: DISCOVERY_LIMIT });
    }
    let index = BoxIndex::new(n, bound)?;
    let member = membership_bitmap(&index, membership);
    let mut found: Vec<u64> =
        (1u64..1 << n).into_par_iter().filter(|&m| first_witness(&index, &member, m).is_none()).collect();
    found.sort_by_key(|&m| (m.count_ones(), m));
    let set: HashSet<u64> = found.iter().copied().collect();
    let generators: Vec<u64> = found
        .iter()
        .copied()
        .filter(|&m| {
            // proper nonempty submasks s with s and m - s both invariant
            let mut s = (m - 1) & m;
            while s != 0 {
                if set.contains(&s) && set.contains(&(m ^ s)) {
                    return false;
                }
                s = (s - 1) & m;
            }
            true
        })
        .collect();
    let vb = VerifiedBound::Bounded(bound);
    Ok(Discovery {
        bound,
        all: found.into_iter().map(|m| InvariantVector::from_mask(n, m, vb)).collect(),
        generators: generators.into_iter().map(|m| InvariantVector::from_mask(n, m, vb)).collect(),
    })
}

/// Whether `pos` is a non-negative integer combination of `generators`.
/// Exhaustive search over residuals; the first nonzero coordinate of a
/// residual must be covered by the next chosen vector.
pub fn combo_membership(generators: &[InvariantVector], pos: &Position, budget: u64) -> Result<bool> {
    if let Some(g) = generators.iter().find(|g| g.len() != pos.len()) {
        return Err(Error::DimensionMismatch { expected: pos.len(), actual: g.len() });
    }
    if pos.iter().all(|&h| h == 0) {
        return Ok(true);
    }
    let supports: Vec<Vec<usize>> = generators.iter().map(InvariantVector::support).collect();
    let mut failed: HashSet<Vec<u64>> = HashSet::new();
    // (residual, next generator to try)
    let mut stack: Vec<(Vec<u64>, usize)> = vec![(pos.to_vec(), 0)];
    let mut work = 0u64;
    while let Some((residual, next)) = stack.last_mut() {
        let first = match residual.iter().position(|&h| h > 0) {
            Some(i) => i,
            None => return Ok(true),
        };
        let mut child = None;
        while *next < supports.len() {
            let support = &supports[*next];
            *next += 1;
            if !support.contains(&first) || support.iter().any(|&v| residual[v] == 0) {
                continue;
            }
            let mut r = residual.clone();
            for &v in support {
                r[v] -= 1;
            }
            if failed.contains(&r) {
                continue;
            }
            child = Some(r);
            break;
        }
        work += 1;
        if work > budget {
            return Err(Error::BudgetExceeded(budget));
        }
        match child {
            Some(r) => stack.push((r, 0)),
            None => {
                let (r, _) = stack.pop().expect("non-empty stack");
                failed.insert(r);
            }
        }
    }
    Ok(false)
}

/// Solver for a sub-game reached by an IRP case.
pub type SubSolver = fn(&Position) -> Result<Solution>;

/// What to do with a reduced position matched by a case.
pub struct IrpRecipe {
    pub description: String,
    /// Applied before zero reduction.
    pub symmetry: Option<Vec<usize>>,
    /// Empty stacks to remove, in post-symmetry indexing.
    pub zero: Vec<usize>,
    /// Merge every mergeable class after zero reduction.
    pub merge: bool,
    pub target: GameSpec,
    pub solver: SubSolver,
}

/// Matches a reduced position against one case.
pub type CaseClassifier = Box<dyn Fn(&[u64]) -> Option<IrpRecipe> + Send + Sync>;

/// One row of an IRP case table: returns a recipe when it applies to the
/// reduced position.
pub struct IrpCase {
    pub label: &'static str,
    pub classify: CaseClassifier,
}

/// Generic Invariance Reduction Process: invariance-reduce, classify the
/// zero pattern, reduce to a solved sub-game, solve it there and lift the
/// move back.
pub fn irp_move(spec: &GameSpec, schedule: &InvarianceSchedule, cases: &[IrpCase], pos: &Position) -> Result<Solution> {
    spec.check_dimension(pos.len())?;
    let mut explanation = Explanation::new(spec.id(), pos);
    let mut trace = ReductionTrace::identity(spec);

    let reduced = invariance_reduce(schedule, pos)?;
    for step in &reduced.steps {
        trace.push(step.clone())?;
    }
    let cs: Vec<String> = reduced.coefficients.iter().map(|c| c.to_string()).collect();
    explanation.lines.push(format!(
        "1. invariance reduction, coefficients ({}) -> ({})",
        cs.join(","),
        reduced.position
    ));

    let (label, recipe) = cases
        .iter()
        .find_map(|case| (case.classify)(&reduced.position).map(|r| (case.label, r)))
        .ok_or_else(|| Error::NoCaseMatched(format!("({}) in {}", reduced.position, spec.id())))?;

    let mut current = reduced.position.clone();
    if let Some(perm) = &recipe.symmetry {
        let step = ReductionStep::Symmetry { permutation: perm.clone() };
        current = step.project(&current)?;
        trace.push(step)?;
    }
    let (_, projected, zero) = reduction::zero_reduce(trace.target(), &current, &recipe.zero)?;
    current = projected;
    trace.push(zero)?;
    if recipe.merge {
        while let Some(class) = reduction::mergeable_classes(trace.target()).into_iter().find(|c| c.len() > 1) {
            let (_, step) = reduction::merge_reduce(trace.target(), &class)?;
            current = step.project(&current)?;
            trace.push(step)?;
        }
    }
    let perm = game::first_isomorphism(trace.target(), &recipe.target)?
        .ok_or_else(|| Error::Internal(format!("case `{label}` does not reduce to {}", recipe.target.id())))?;
    if perm.iter().enumerate().any(|(i, &j)| i != j) {
        let step = ReductionStep::Symmetry { permutation: perm };
        current = step.project(&current)?;
        trace.push(step)?;
    }
    if trace.target() != &recipe.target {
        return Err(Error::Internal(format!("relabeled sub-game differs from {}", recipe.target.id())));
    }
    trace.relabel_target(recipe.target.id());
    let steps: Vec<String> = trace.steps().iter().skip(reduced.steps.len()).map(|s| s.to_string()).collect();
    explanation.lines.push(format!("2. {label}: {}", recipe.description));
    explanation.lines.push(format!("   {} -> {} at ({current})", steps.join("; "), recipe.target.id()));

    let sub = (recipe.solver)(&current)?;
    explanation.lines.push(format!("3. solve {}", recipe.target.id()));
    explanation.sub = Some(Box::new(sub.explanation.clone()));
    let full_trace = trace.clone().then(&sub.trace)?;
    let mv = match &sub.mv {
        None => {
            explanation.after_sub.push("4. sub-game position is P, so the position is P".into());
            None
        }
        Some(sub_mv) => {
            let lifted = trace.lift_move(sub_mv, pos)?;
            explanation.after_sub.push(format!("4. lift ({sub_mv}) -> move ({lifted})"));
            Some(lifted)
        }
    };
    Ok(Solution { mv, method: Method::Irp, trace: full_trace, explanation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(v: &[u64]) -> Position {
        Position::new(v.to_vec())
    }

    fn h_schedule() -> InvarianceSchedule {
        InvarianceSchedule::declared(&[&[1, 1, 0, 1, 0, 1], &[1, 0, 1, 0, 1, 1]])
    }

    #[test]
    fn indicator_min_examples() {
        let z1 = InvariantVector::declared(&[1, 1, 0, 1, 0, 1]);
        assert_eq!(indicator_min(&z1, &[6, 2, 9, 1, 3, 12]).unwrap(), 1);
        let z2 = InvariantVector::declared(&[1, 0, 1, 0, 1, 1]);
        assert_eq!(indicator_min(&z2, &[5, 1, 9, 0, 3, 11]).unwrap(), 3);
        let ones = InvariantVector::declared(&[1; 7]);
        assert_eq!(indicator_min(&ones, &[3, 5, 9, 14, 11, 6, 15]).unwrap(), 3);
        assert!(matches!(indicator_min(&ones, &[1, 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reduce_examples() {
        let r = invariance_reduce(&h_schedule(), &pos(&[2, 6, 11, 8, 3, 12])).unwrap();
        assert_eq!(r.position, pos(&[0, 4, 11, 6, 3, 10]));
        assert_eq!(r.coefficients, vec![2, 0]);

        let r = invariance_reduce(&h_schedule(), &pos(&[5, 2, 7, 8, 9, 6])).unwrap();
        assert_eq!(r.position, pos(&[0, 0, 4, 6, 6, 1]));
        let rev = InvarianceSchedule::declared(&[&[1, 0, 1, 0, 1, 1], &[1, 1, 0, 1, 0, 1]]);
        assert_eq!(invariance_reduce(&rev, &pos(&[5, 2, 7, 8, 9, 6])).unwrap().position, pos(&[0, 2, 2, 8, 4, 1]));

        let r = invariance_reduce(&h_schedule(), &pos(&[0, 3, 4, 0, 5, 6])).unwrap();
        assert_eq!(r.position, pos(&[0, 3, 4, 0, 5, 6]));
        assert_eq!(r.coefficients, vec![0, 0]);
        assert!(r.steps.is_empty());
    }

    #[test]
    fn batches_and_batched_reduction() {
        let s = InvarianceSchedule::declared(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[1, 1, 0, 0]]);
        assert_eq!(s.batches(), &[vec![0, 1], vec![2]]);
        for p in [[3u64, 1, 4, 1], [5, 9, 2, 6], [0, 7, 7, 7]] {
            assert_eq!(
                invariance_reduce(&s, &pos(&p)).unwrap(),
                invariance_reduce_batched(&s, &pos(&p)).unwrap()
            );
        }
    }

    #[test]
    fn combo_examples() {
        let gens: Vec<InvariantVector> = [
            [1, 0, 0, 1, 0, 0],
            [0, 1, 0, 0, 1, 0],
            [0, 0, 1, 0, 0, 1],
            [1, 0, 1, 0, 1, 0],
            [0, 1, 0, 1, 0, 1],
        ]
        .iter()
        .map(|z| InvariantVector::declared(z))
        .collect();
        let (x, y, c) = (1, 2, [0, 1, 2]);
        let p = pos(&[x + c[0], y + c[1], x + c[2], y + c[0], x + c[1], y + c[2]]);
        assert!(combo_membership(&gens, &p, 1_000_000).unwrap());
        assert!(combo_membership(&gens, &pos(&[0; 6]), 10).unwrap());
        assert!(!combo_membership(&gens, &pos(&[1, 0, 0, 0, 0, 0]), 10).unwrap());
        assert!(matches!(combo_membership(&gens, &pos(&[40, 40, 40, 40, 40, 41]), 50), Err(Error::BudgetExceeded(50))));
    }

    #[test]
    fn bounded_check_on_nim() {
        // P-positions of two-stack nim are a = b
        let member = |p: &[u64]| p[0] == p[1];
        let both = InvariantVector::declared(&[1, 1]);
        let one = InvariantVector::declared(&[1, 0]);
        assert!(is_invariant_bounded(2, &member, &both, 5).unwrap().invariant);
        let check = is_invariant_bounded(2, &member, &one, 5).unwrap();
        assert!(!check.invariant);
        assert_eq!(check.witness, Some(pos(&[0, 0])));
        let d = discover_invariants(2, &member, 4).unwrap();
        assert_eq!(d.all, vec![InvariantVector::new(vec![1, 1], VerifiedBound::Bounded(4)).unwrap()]);
        assert_eq!(d.generators, d.all);
    }

    #[test]
    fn invalid_vectors() {
        assert!(InvariantVector::new(vec![0, 0], VerifiedBound::Declared).is_err());
        assert!(InvariantVector::new(vec![2, 0], VerifiedBound::Declared).is_err());
    }
}
