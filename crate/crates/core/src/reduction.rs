//! Zero and merge reductions, vertex relabelings and invariance shifts,
//! recorded as an append-only trace that projects positions forward and
//! lifts moves back.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Move, Position};

/// One reduction step. Steps are applied in order to move from the source
/// game to the target game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionStep {
    /// Vertex `i` becomes vertex `permutation[i]`.
    Symmetry { permutation: Vec<usize> },
    /// Subtract `coeff` copies of the zero-one vector `z`.
    Invariance { z: Vec<u8>, coeff: u64 },
    /// Drop empty stacks; `remap[i]` is the new index of surviving vertex `i`.
    Zero { removed: Vec<usize>, remap: Vec<Option<usize>> },
    /// Collapse `class` into a single stack at `merged_index`.
    Merge { class: Vec<usize>, merged_index: usize, remap: Vec<usize> },
}

fn labels(vs: &[usize]) -> String {
    vs.iter().map(|&v| game::vertex_label(v)).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionStep::Symmetry { permutation } => {
                let p: Vec<String> = permutation.iter().map(|v| v.to_string()).collect();
                write!(f, "relabel vertices i -> ({})[i]", p.join(","))
            }
            ReductionStep::Invariance { z, coeff } => {
                let zs: Vec<String> = z.iter().map(|v| v.to_string()).collect();
                write!(f, "subtract {coeff} x ({})", zs.join(","))
            }
            ReductionStep::Zero { removed, .. } => write!(f, "zero-reduce {{{}}}", labels(removed)),
            ReductionStep::Merge { class, merged_index, .. } => {
                write!(f, "merge {{{}}} into stack {}", labels(class), game::vertex_label(*merged_index))
            }
        }
    }
}

impl ReductionStep {
    pub fn apply_to_spec(&self, spec: &GameSpec) -> Result<GameSpec> {
        match self {
            ReductionStep::Symmetry { permutation } => {
                spec.check_dimension(permutation.len())?;
                Ok(spec.permuted(permutation))
            }
            ReductionStep::Invariance { z, .. } => {
                spec.check_dimension(z.len())?;
                Ok(spec.clone())
            }
            ReductionStep::Zero { remap, .. } => {
                spec.check_dimension(remap.len())?;
                let new_n = remap.iter().flatten().count();
                if new_n == 0 {
                    return Err(Error::EmptyResult);
                }
                let masks = spec
                    .masks()
                    .iter()
                    .map(|&m| {
                        game::mask_vertices(m)
                            .into_iter()
                            .filter_map(|v| remap[v])
                            .fold(0u64, |acc, v| acc | (1 << v))
                    })
                    .collect();
                Ok(GameSpec::from_masks(new_n, masks, format!("{}/zero", spec.id())))
            }
            ReductionStep::Merge { remap, merged_index, .. } => {
                spec.check_dimension(remap.len())?;
                let new_n = remap.iter().max().map_or(0, |m| m + 1).max(merged_index + 1);
                let masks = spec
                    .masks()
                    .iter()
                    .map(|&m| game::mask_vertices(m).into_iter().fold(0u64, |acc, v| acc | (1 << remap[v])))
                    .collect();
                Ok(GameSpec::from_masks(new_n, masks, format!("{}/merge", spec.id())))
            }
        }
    }

    pub fn project(&self, pos: &Position) -> Result<Position> {
        match self {
            ReductionStep::Symmetry { permutation } => {
                check_len(permutation.len(), pos)?;
                Ok(pos.permuted(permutation))
            }
            ReductionStep::Invariance { z, coeff } => {
                check_len(z.len(), pos)?;
                pos.iter()
                    .zip(z)
                    .enumerate()
                    .map(|(i, (&p, &zi))| p.checked_sub(coeff * zi as u64).ok_or(Error::NegativeHeight(i)))
                    .collect::<Result<Vec<u64>>>()
                    .map(Position::new)
            }
            ReductionStep::Zero { removed, remap } => {
                check_len(remap.len(), pos)?;
                if let Some(&v) = removed.iter().find(|&&v| pos[v] != 0) {
                    return Err(Error::NonZeroVertex(v));
                }
                Ok(Position::new(pos.iter().zip(remap).filter(|(_, r)| r.is_some()).map(|(&p, _)| p).collect()))
            }
            ReductionStep::Merge { remap, merged_index, .. } => {
                check_len(remap.len(), pos)?;
                let new_n = remap.iter().max().map_or(0, |m| m + 1).max(merged_index + 1);
                let mut out = vec![0; new_n];
                for (i, &p) in pos.iter().enumerate() {
                    out[remap[i]] += p;
                }
                Ok(Position::new(out))
            }
        }
    }

    /// Lifts a move made after this step back to the position `before` the
    /// step.
    pub fn lift(&self, before: &Position, mv: &Move) -> Result<Move> {
        match self {
            ReductionStep::Symmetry { permutation } => {
                Ok(Move::new(permutation.iter().map(|&j| mv[j]).collect()))
            }
            ReductionStep::Invariance { .. } => Ok(mv.clone()),
            ReductionStep::Zero { remap, .. } => {
                Ok(Move::new(remap.iter().map(|r| r.map_or(0, |j| mv[j])).collect()))
            }
            ReductionStep::Merge { class, merged_index, remap } => {
                let mut out: Vec<u64> = remap.iter().map(|&j| mv[j]).collect();
                let mut remaining = mv[*merged_index];
                let mut members = class.clone();
                // smallest stack first, lower index on ties
                members.sort_by_key(|&v| (before[v], v));
                for v in members {
                    let take = remaining.min(before[v]);
                    out[v] = take;
                    remaining -= take;
                }
                if remaining > 0 {
                    return Err(Error::IllegalReducedMove(format!(
                        "merged stack removal exceeds the tokens of {{{}}}",
                        labels(class)
                    )));
                }
                Ok(Move::new(out))
            }
        }
    }

    /// Tokens removed by projecting through this step.
    pub fn tokens_removed(&self) -> u64 {
        match self {
            ReductionStep::Invariance { z, coeff } => coeff * z.iter().map(|&v| v as u64).sum::<u64>(),
            _ => 0,
        }
    }
}

fn check_len(expected: usize, pos: &Position) -> Result<()> {
    if pos.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual: pos.len() })
    }
}

/// Zero-reduces `subset` (which must be empty stacks of `pos`).
pub fn zero_reduce(spec: &GameSpec, pos: &Position, subset: &[usize]) -> Result<(GameSpec, Position, ReductionStep)> {
    spec.check_dimension(pos.len())?;
    if subset.is_empty() {
        return Err(Error::PreconditionViolated("zero reduction of an empty vertex set".into()));
    }
    let n = spec.n();
    let mut removed = subset.to_vec();
    removed.sort_unstable();
    removed.dedup();
    if let Some(&vertex) = removed.iter().find(|&&v| v >= n) {
        return Err(Error::IndexOutOfRange { vertex, n });
    }
    if let Some(&v) = removed.iter().find(|&&v| pos[v] != 0) {
        return Err(Error::NonZeroVertex(v));
    }
    let mut next = 0;
    let remap = (0..n)
        .map(|v| {
            if removed.binary_search(&v).is_ok() {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect();
    let step = ReductionStep::Zero { removed, remap };
    let reduced = step.apply_to_spec(spec)?;
    let projected = step.project(pos)?;
    Ok((reduced, projected, step))
}

/// All empty stacks of `pos`.
pub fn zero_vertices(pos: &[u64]) -> Vec<usize> {
    pos.iter().enumerate().filter(|(_, &h)| h == 0).map(|(i, _)| i).collect()
}

/// Partition of the vertices into classes of vertices lying in exactly the
/// same move sets. Classes of size two or more can be merged.
pub fn mergeable_classes(spec: &GameSpec) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for v in 0..spec.n() {
        let signature: Vec<usize> =
            spec.masks().iter().enumerate().filter(|(_, &m)| m >> v & 1 == 1).map(|(i, _)| i).collect();
        classes.entry(signature).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = classes.into_values().collect();
    out.sort();
    out
}

/// Merges `class` into one stack placed at the index of its smallest
/// vertex; the remaining vertices keep their relative order.
pub fn merge_reduce(spec: &GameSpec, class: &[usize]) -> Result<(GameSpec, ReductionStep)> {
    let n = spec.n();
    let mut class = class.to_vec();
    class.sort_unstable();
    class.dedup();
    if class.len() < 2 {
        return Err(Error::PreconditionViolated("a merge class needs at least two vertices".into()));
    }
    if let Some(&vertex) = class.iter().find(|&&v| v >= n) {
        return Err(Error::IndexOutOfRange { vertex, n });
    }
    let class_mask = class.iter().fold(0u64, |m, &v| m | (1 << v));
    for (i, &m) in spec.masks().iter().enumerate() {
        let inter = m & class_mask;
        if inter != 0 && inter != class_mask {
            return Err(Error::PreconditionViolated(format!(
                "move set {{{}}} meets {{{}}} only partially",
                labels(&spec.move_sets()[i]),
                labels(&class)
            )));
        }
    }
    let head = class[0];
    let mut next = 0;
    let mut remap = vec![0; n];
    for (v, slot) in remap.iter_mut().enumerate() {
        if class_mask >> v & 1 == 1 && v != head {
            continue;
        }
        *slot = next;
        next += 1;
    }
    let merged_index = remap[head];
    for &v in &class {
        remap[v] = merged_index;
    }
    let step = ReductionStep::Merge { class, merged_index, remap };
    let reduced = step.apply_to_spec(spec)?;
    Ok((reduced, step))
}

/// An ordered list of reduction steps from `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    source: GameSpec,
    target: GameSpec,
    steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn identity(spec: &GameSpec) -> Self {
        ReductionTrace { source: spec.clone(), target: spec.clone(), steps: Vec::new() }
    }

    pub fn source(&self) -> &GameSpec {
        &self.source
    }

    pub fn target(&self) -> &GameSpec {
        &self.target
    }

    pub fn steps(&self) -> &[ReductionStep] {
        &self.steps
    }

    pub fn push(&mut self, step: ReductionStep) -> Result<()> {
        self.target = step.apply_to_spec(&self.target)?;
        self.steps.push(step);
        Ok(())
    }

    /// Concatenation: `self` followed by `other`, whose source must be this
    /// trace's target.
    pub fn then(mut self, other: &ReductionTrace) -> Result<Self> {
        if other.source != self.target {
            return Err(Error::Internal("trace composition with mismatched games".into()));
        }
        for step in &other.steps {
            self.push(step.clone())?;
        }
        self.target = other.target.clone();
        Ok(self)
    }

    pub fn relabel_target(&mut self, id: &str) {
        self.target = self.target.clone().with_id(id);
    }

    /// Positions before each step, followed by the final projection.
    pub fn intermediate_positions(&self, pos: &Position) -> Result<Vec<Position>> {
        self.source.check_dimension(pos.len())?;
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(pos.clone());
        for step in &self.steps {
            let next = step.project(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn project(&self, pos: &Position) -> Result<Position> {
        Ok(self.intermediate_positions(pos)?.pop().expect("non-empty"))
    }

    /// Lifts a legal move of the target game at `project(pos)` to a legal
    /// move of the source game at `pos`.
    pub fn lift_move(&self, reduced_mv: &Move, pos: &Position) -> Result<Move> {
        let positions = self.intermediate_positions(pos)?;
        let projected = positions.last().expect("non-empty");
        let legality = self.target.is_legal_move(projected, reduced_mv)?;
        if !legality.is_legal() {
            return Err(Error::IllegalReducedMove(format!("{reduced_mv} at {projected}: {legality:?}")));
        }
        let mut mv = reduced_mv.clone();
        for (step, before) in self.steps.iter().zip(&positions).rev() {
            mv = step.lift(before, &mv)?;
        }
        Ok(mv)
    }

    /// Tokens removed between source and target positions.
    pub fn tokens_removed(&self) -> u64 {
        self.steps.iter().map(ReductionStep::tokens_removed).sum()
    }
}

/// Standalone form of [`ReductionTrace::project`].
pub fn project(trace: &ReductionTrace, pos: &Position) -> Result<Position> {
    trace.project(pos)
}

/// Standalone form of [`ReductionTrace::lift_move`].
pub fn lift_move(trace: &ReductionTrace, reduced_mv: &Move, pos: &Position) -> Result<Move> {
    trace.lift_move(reduced_mv, pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{apply_move, build_game, builtin_game, first_isomorphism};

    fn pos(v: &[u64]) -> Position {
        Position::new(v.to_vec())
    }

    fn g2() -> GameSpec {
        build_game(4, &[vec![0, 3], vec![0, 1, 2], vec![1, 2, 3]]).unwrap()
    }

    #[test]
    fn zero_reduce_examples() {
        let cn62 = builtin_game("cn:6,2").unwrap();
        let (spec, p, _) = zero_reduce(&cn62, &pos(&[1, 2, 3, 0, 4, 0]), &[3, 5]).unwrap();
        assert_eq!(spec.move_sets(), &[vec![0, 1], vec![1, 2], vec![3]]);
        assert_eq!(p, pos(&[1, 2, 3, 4]));

        let cn63 = builtin_game("cn:6,3").unwrap();
        let (spec, _, _) = zero_reduce(&cn63, &pos(&[0, 0, 1, 1, 1, 1]), &[0, 1]).unwrap();
        assert_eq!(spec, builtin_game("pn:4,3").unwrap());

        let cn73 = builtin_game("cn:7,3").unwrap();
        let (spec, p, _) = zero_reduce(&cn73, &pos(&[0, 1, 2, 3, 4, 5, 6]), &[0]).unwrap();
        assert_eq!(spec, builtin_game("h").unwrap());
        assert_eq!(p, pos(&[1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn zero_reduce_errors() {
        let cn32 = builtin_game("cn:3,2").unwrap();
        assert_eq!(zero_reduce(&cn32, &pos(&[0, 1, 0]), &[1]).unwrap_err(), Error::NonZeroVertex(1));
        assert_eq!(zero_reduce(&cn32, &pos(&[0, 0, 0]), &[0, 1, 2]).unwrap_err(), Error::EmptyResult);
    }

    #[test]
    fn classes() {
        assert_eq!(mergeable_classes(&g2()), vec![vec![0], vec![1, 2], vec![3]]);
        let pn = builtin_game("pn:6,5").unwrap();
        assert_eq!(mergeable_classes(&pn), vec![vec![0], vec![1, 2, 3, 4], vec![5]]);
        let nim = builtin_game("nim:3").unwrap();
        assert_eq!(mergeable_classes(&nim), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn merge_examples() {
        let (spec, _) = merge_reduce(&g2(), &[1, 2]).unwrap();
        assert_eq!(spec, builtin_game("cn:3,2").unwrap());

        let pn43 = builtin_game("pn:4,3").unwrap();
        let (spec, _) = merge_reduce(&pn43, &[1, 2]).unwrap();
        assert_eq!(spec, builtin_game("pn:3,2").unwrap());

        let cn32 = builtin_game("cn:3,2").unwrap();
        assert!(matches!(merge_reduce(&cn32, &[0, 1]), Err(Error::PreconditionViolated(_))));
        assert!(matches!(merge_reduce(&cn32, &[0]), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn project_and_lift_merge_example() {
        let mut trace = ReductionTrace::identity(&g2());
        let (_, step) = merge_reduce(&g2(), &[1, 2]).unwrap();
        trace.push(step).unwrap();
        let p = pos(&[2, 3, 5, 4]);
        assert_eq!(trace.project(&p).unwrap(), pos(&[2, 8, 4]));
        let lifted = trace.lift_move(&Move::new(vec![0, 6, 2]), &p).unwrap();
        assert_eq!(lifted, Move::new(vec![0, 3, 3, 2]));
    }

    #[test]
    fn project_and_lift_h_case_two() {
        let h = builtin_game("h").unwrap();
        let p = pos(&[2, 1, 6, 0, 0, 8]);
        let mut trace = ReductionTrace::identity(&h);
        let (_, _, zero) = zero_reduce(&h, &p, &[3, 4]).unwrap();
        trace.push(zero).unwrap();
        let (_, merge) = merge_reduce(trace.target(), &[1, 2]).unwrap();
        trace.push(merge).unwrap();
        let pn32 = builtin_game("pn:3,2").unwrap();
        let perm = first_isomorphism(trace.target(), &pn32).unwrap().unwrap();
        trace.push(ReductionStep::Symmetry { permutation: perm }).unwrap();
        assert_eq!(trace.target(), &pn32);
        assert_eq!(trace.project(&p).unwrap(), pos(&[7, 2, 8]));
        let lifted = trace.lift_move(&Move::new(vec![0, 2, 1]), &p).unwrap();
        assert_eq!(lifted, Move::new(vec![2, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn lift_zero_only() {
        let spec = build_game(6, &[vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![0, 5]]).unwrap();
        let p = pos(&[0, 4, 11, 6, 3, 10]);
        let (_, _, step) = zero_reduce(&spec, &p, &[0]).unwrap();
        let mut trace = ReductionTrace::identity(&spec);
        trace.push(step).unwrap();
        let lifted = trace.lift_move(&Move::new(vec![0, 5, 6, 3, 0]), &p).unwrap();
        assert_eq!(lifted, Move::new(vec![0, 0, 5, 6, 3, 0]));
    }

    #[test]
    fn identity_trace_and_illegal_lift() {
        let spec = builtin_game("pn:3,2").unwrap();
        let trace = ReductionTrace::identity(&spec);
        let p = pos(&[4, 0, 2]);
        assert_eq!(trace.project(&p).unwrap(), p);
        assert!(matches!(
            trace.lift_move(&Move::new(vec![1, 0, 1]), &p),
            Err(Error::IllegalReducedMove(_))
        ));
    }

    #[test]
    fn invariance_step_projection() {
        let spec = builtin_game("cn:3,2").unwrap();
        let mut trace = ReductionTrace::identity(&spec);
        trace.push(ReductionStep::Invariance { z: vec![1, 1, 1], coeff: 2 }).unwrap();
        assert_eq!(trace.project(&pos(&[3, 2, 5])).unwrap(), pos(&[1, 0, 3]));
        assert_eq!(trace.project(&pos(&[3, 1, 5])).unwrap_err(), Error::NegativeHeight(1));
        assert_eq!(trace.tokens_removed(), 6);
    }

    #[test]
    fn lift_project_consistency_on_g2() {
        let spec = g2();
        let (_, step) = merge_reduce(&spec, &[1, 2]).unwrap();
        let mut trace = ReductionTrace::identity(&spec);
        trace.push(step).unwrap();
        for a in 0..4u64 {
            for b in 0..4u64 {
                for c in 0..4u64 {
                    for d in 0..3u64 {
                        let p = pos(&[a, b, c, d]);
                        let projected = trace.project(&p).unwrap();
                        assert_eq!(projected.total(), p.total());
                        for m in trace.target().legal_moves(&projected) {
                            let lifted = trace.lift_move(&m, &p).unwrap();
                            assert!(spec.is_legal_move(&p, &lifted).unwrap().is_legal());
                            let after = trace.project(&apply_move(&p, &lifted).unwrap()).unwrap();
                            assert_eq!(after, apply_move(&projected, &m).unwrap());
                        }
                    }
                }
            }
        }
    }
}
