//! Closed-form P-position tests and constructive winning moves for the
//! solved circular and path games and for H, with a dispatcher that falls
//! back to brute force for everything else.

use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{apply_move, builtin_game, GameSpec, Move, Outcome, Position};
use crate::grundy::Engine;
use crate::invariance::{self, InvarianceSchedule, IrpCase, IrpRecipe, SubSolver};
use crate::reduction::ReductionTrace;
use crate::solution::{Explanation, Method, Solution};

fn check_len(expected: usize, pos: &[u64]) -> Result<()> {
    if pos.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual: pos.len() })
    }
}

/// All rotations and reflections of a cyclic sequence.
fn dihedral_images(p: &[u64]) -> impl Iterator<Item = Vec<u64>> + '_ {
    let n = p.len();
    (0..n).flat_map(move |r| {
        let rot: Vec<u64> = (0..n).map(|i| p[(r + i) % n]).collect();
        let refl: Vec<u64> = (0..n).map(|i| p[(r + n - i) % n]).collect();
        [rot, refl]
    })
}

fn is_cn32(p: &[u64]) -> bool {
    p.iter().all(|&h| h == p[0])
}

fn is_cn42(p: &[u64]) -> bool {
    p[0] == p[2] && p[1] == p[3]
}

fn is_cn52(p: &[u64]) -> bool {
    let max = p.iter().copied().max().unwrap_or(0);
    dihedral_images(p).any(|q| q[0] == max && q[1] == q[4] && q[0] + q[1] == q[2] + q[3])
}

fn is_cn53(p: &[u64]) -> bool {
    dihedral_images(p).any(|q| q[0] == 0 && q[1] == q[4] && q[1] == q[2] + q[3])
}

fn is_cn63(p: &[u64]) -> bool {
    p[0] + p[1] == p[3] + p[4] && p[1] + p[2] == p[4] + p[5]
}

fn is_cn74(p: &[u64]) -> bool {
    dihedral_images(p).any(|q| {
        let [a, b, c, d, e, f, g] = [q[0], q[1], q[2], q[3], q[4], q[5], q[6]];
        let s1 = a == 0 && b == 0 && c == g && c > 0 && d + e + f == c;
        let s2 = q.iter().all(|&h| h == a);
        let s3 = a == b && c == g && d == f && a + c == d + e && 0 < a && a < e;
        let s4 = a == f && b + c == d + e && d + e == g + a && a < b.min(e) && a < c.max(d);
        s1 || s2 || s3 || s4
    })
}

fn is_h(p: &[u64]) -> bool {
    let test = |q: &[u64]| q[0] <= q[5] && q[0] + q[1] + q[2] == q[3] + q[4] + q[5] && q[0] == q[3] + q[2].min(q[4]);
    let reflected: Vec<u64> = p.iter().rev().copied().collect();
    test(p) || test(&reflected)
}

fn is_cn73(p: &[u64]) -> bool {
    let min = p.iter().copied().min().unwrap_or(0);
    dihedral_images(p).any(|q| {
        let [a, b, c, d, e, f, g] = [q[0], q[1], q[2], q[3], q[4], q[5], q[6]];
        a == min && b <= g && a + b == e + d.min(f) && b + c + d == e + f + g
    })
}

/// Square minima and excesses of an eight-stack position labeled
/// `(a, b+x1, a+x2, b+x3, a+x4, b+x5, a+x6, b+x7)`: `a` is the minimum of
/// the even stacks and sits at index 0, `b` the minimum of the odd stacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SquareDecomposition {
    pub a: u64,
    pub b: u64,
    /// `x[i]` is the excess of stack `i + 1`.
    pub x: [u64; 7],
}

impl SquareDecomposition {
    /// `None` unless `q` has eight stacks and `q[0]` is an even-square minimum.
    pub fn of(q: &[u64]) -> Option<Self> {
        if q.len() != 8 {
            return None;
        }
        let a = q.iter().step_by(2).copied().min()?;
        let b = q.iter().skip(1).step_by(2).copied().min()?;
        if q[0] != a {
            return None;
        }
        let mut x = [0; 7];
        for (i, xi) in x.iter_mut().enumerate() {
            let v = i + 1;
            *xi = q[v] - if v % 2 == 0 { a } else { b };
        }
        Some(SquareDecomposition { a, b, x })
    }

    pub fn reconstruct(&self) -> Vec<u64> {
        let mut out = vec![self.a];
        for (i, &xi) in self.x.iter().enumerate() {
            out.push(xi + if (i + 1) % 2 == 0 { self.a } else { self.b });
        }
        out
    }

    /// `(x1, x2, x4, x5 + x6, x7)`.
    pub fn reduced(&self) -> [u64; 5] {
        let x = &self.x;
        [x[0], x[1], x[3], x[4] + x[5], x[6]]
    }
}

fn is_cn83(p: &[u64]) -> bool {
    dihedral_images(p).any(|q| match SquareDecomposition::of(&q) {
        Some(d) => d.x[2] == 0 && is_cn52(&d.reduced()),
        None => false,
    })
}

fn check_path_params(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::UnsupportedParameters(format!("pn:{n},{k} needs 1 <= k <= n")));
    }
    if 2 * k < n {
        return Err(Error::UnsupportedParameters(format!("pn:{n},{k} needs k >= n/2")));
    }
    Ok(())
}

fn is_path(k: usize, p: &[u64]) -> bool {
    let n = p.len();
    if k == n {
        return p.iter().all(|&h| h == 0);
    }
    (1..=n - k).any(|s| {
        p[s..s + k - 1].iter().all(|&h| h == 0) && p[..s].iter().sum::<u64>() == p[s + k - 1..].iter().sum::<u64>()
    })
}

pub fn p_membership_path(n: usize, k: usize, pos: &[u64]) -> Result<bool> {
    check_path_params(n, k)?;
    check_len(n, pos)?;
    Ok(is_path(k, pos))
}

pub fn p_membership_h(pos: &[u64]) -> Result<bool> {
    check_len(6, pos)?;
    Ok(is_h(pos))
}

pub fn p_membership_cn73(pos: &[u64]) -> Result<bool> {
    check_len(7, pos)?;
    Ok(is_cn73(pos))
}

pub fn p_membership_cn83(pos: &[u64]) -> Result<bool> {
    check_len(8, pos)?;
    Ok(is_cn83(pos))
}

/// Membership for the circular games with a classical closed form:
/// `cn:3,2`, `cn:4,2`, `cn:5,2`, `cn:5,3`, `cn:6,3` and `cn:7,4`.
pub fn p_membership_base(game: &str, pos: &[u64]) -> Result<bool> {
    match Oracle::from_id(game) {
        Some(o @ (Oracle::Cn32 | Oracle::Cn42 | Oracle::Cn52 | Oracle::Cn53 | Oracle::Cn63 | Oracle::Cn74)) => {
            check_len(o.n(), pos)?;
            Ok(o.is_p(pos))
        }
        _ => Err(Error::UnsupportedGame(game.to_string())),
    }
}

/// A solved game with a closed-form P-position test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Oracle {
    Cn32,
    Cn42,
    Cn52,
    Cn53,
    Cn63,
    Cn74,
    Cn73,
    Cn83,
    H,
    Path { n: usize, k: usize },
}

impl Oracle {
    /// The fixed circular games, `h`, and every path game with
    /// `k >= n/2` and `n <= max_path`.
    pub fn all(max_path: usize) -> Vec<Oracle> {
        let mut out = vec![
            Oracle::Cn32,
            Oracle::Cn42,
            Oracle::Cn52,
            Oracle::Cn53,
            Oracle::Cn63,
            Oracle::Cn74,
            Oracle::Cn73,
            Oracle::Cn83,
            Oracle::H,
        ];
        for n in 1..=max_path {
            for k in n.div_ceil(2)..=n {
                out.push(Oracle::Path { n, k });
            }
        }
        out
    }

    pub fn from_id(id: &str) -> Option<Oracle> {
        let id = id.trim();
        let (kind, params) = id.split_once(':').unwrap_or((id, ""));
        let nums: Vec<usize> = params.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>().unwrap_or_default();
        match (kind, nums.as_slice()) {
            ("h", []) if params.is_empty() => Some(Oracle::H),
            ("cn", [3, 2]) => Some(Oracle::Cn32),
            ("cn", [4, 2]) => Some(Oracle::Cn42),
            ("cn", [5, 2]) => Some(Oracle::Cn52),
            ("cn", [5, 3]) => Some(Oracle::Cn53),
            ("cn", [6, 3]) => Some(Oracle::Cn63),
            ("cn", [7, 4]) => Some(Oracle::Cn74),
            ("cn", [7, 3]) => Some(Oracle::Cn73),
            ("cn", [8, 3]) => Some(Oracle::Cn83),
            ("pn", &[n, k]) if check_path_params(n, k).is_ok() && n <= crate::game::MAX_VERTICES => {
                Some(Oracle::Path { n, k })
            }
            _ => None,
        }
    }

    /// Finds the oracle whose game has exactly the move sets of `spec`.
    pub fn for_spec(spec: &GameSpec) -> Option<Oracle> {
        if let Some(o) = Oracle::from_id(spec.id()) {
            if &o.spec() == spec {
                return Some(o);
            }
        }
        let n = spec.n();
        let mut candidates = Oracle::all(0);
        candidates.extend((n.div_ceil(2)..=n).map(|k| Oracle::Path { n, k }));
        candidates.into_iter().find(|o| o.n() == n && &o.spec() == spec)
    }

    pub fn id(&self) -> String {
        match self {
            Oracle::Cn32 => "cn:3,2".into(),
            Oracle::Cn42 => "cn:4,2".into(),
            Oracle::Cn52 => "cn:5,2".into(),
            Oracle::Cn53 => "cn:5,3".into(),
            Oracle::Cn63 => "cn:6,3".into(),
            Oracle::Cn74 => "cn:7,4".into(),
            Oracle::Cn73 => "cn:7,3".into(),
            Oracle::Cn83 => "cn:8,3".into(),
            Oracle::H => "h".into(),
            Oracle::Path { n, k } => format!("pn:{n},{k}"),
        }
    }

    pub fn spec(&self) -> GameSpec {
        builtin_game(&self.id()).expect("oracle ids are valid builtin ids")
    }

    pub fn n(&self) -> usize {
        match self {
            Oracle::Cn32 => 3,
            Oracle::Cn42 => 4,
            Oracle::Cn52 | Oracle::Cn53 => 5,
            Oracle::Cn63 | Oracle::H => 6,
            Oracle::Cn74 | Oracle::Cn73 => 7,
            Oracle::Cn83 => 8,
            Oracle::Path { n, .. } => *n,
        }
    }

    /// Closed-form membership. `pos` must have `self.n()` stacks.
    pub fn is_p(&self, pos: &[u64]) -> bool {
        match self {
            Oracle::Cn32 => is_cn32(pos),
            Oracle::Cn42 => is_cn42(pos),
            Oracle::Cn52 => is_cn52(pos),
            Oracle::Cn53 => is_cn53(pos),
            Oracle::Cn63 => is_cn63(pos),
            Oracle::Cn74 => is_cn74(pos),
            Oracle::Cn73 => is_cn73(pos),
            Oracle::Cn83 => is_cn83(pos),
            Oracle::H => is_h(pos),
            Oracle::Path { k, .. } => is_path(*k, pos),
        }
    }

    /// The invariance schedule used to compute winning moves, if any.
    pub fn schedule(&self) -> Option<&'static InvarianceSchedule> {
        match self {
            Oracle::Cn52 => Some(&CN52_SCHEDULE),
            Oracle::Cn63 => Some(&CN63_SCHEDULE),
            Oracle::Cn73 => Some(&CN73_SCHEDULE),
            Oracle::Cn83 => Some(&CN83_SCHEDULE),
            Oracle::H => Some(&H_SCHEDULE),
            _ => None,
        }
    }

    /// Label of the first IRP case matching an invariance-reduced position.
    pub fn irp_case(&self, reduced: &[u64]) -> Option<&'static str> {
        let cases: &[IrpCase] = match self {
            Oracle::Cn52 => &CN52_CASES,
            Oracle::Cn73 => &CN73_CASES,
            Oracle::Cn83 => &CN83_CASES,
            Oracle::H => &H_CASES,
            _ => return None,
        };
        if reduced.len() != self.n() {
            return None;
        }
        cases.iter().find(|c| (c.classify)(reduced).is_some()).map(|c| c.label)
    }

    /// False for the games whose winning moves are found by search.
    pub fn has_constructive_moves(&self) -> bool {
        !matches!(self, Oracle::Cn53 | Oracle::Cn74)
    }

    pub fn solve_move(&self, pos: &Position, budget: u64) -> Result<Solution> {
        check_len(self.n(), pos)?;
        match self {
            Oracle::Cn32 => Ok(solve_cn32(pos)),
            Oracle::Cn42 => Ok(solve_cn42_inner(pos)),
            Oracle::Cn52 => solve_cn52(pos),
            Oracle::Cn63 => solve_cn63(pos),
            Oracle::Cn73 => solve_cn73(pos),
            Oracle::Cn83 => solve_cn83(pos),
            Oracle::H => solve_h(pos),
            Oracle::Path { n, k } => solve_path(*n, *k, pos),
            Oracle::Cn53 | Oracle::Cn74 => {
                let spec = self.spec();
                let mv = Engine::new(&spec).with_budget(budget).with_canonicalization(true)?.winning_move(pos)?;
                Ok(Solution::direct(&spec, pos, mv, Method::BruteForce, "no constructive procedure; exhaustive search"))
            }
        }
    }
}

fn path_move(k: usize, p: &[u64]) -> (Option<Vec<u64>>, String) {
    let n = p.len();
    if is_path(k, p) {
        return (None, "P-position".into());
    }
    if k == n {
        return (Some(p.to_vec()), "k = n: remove everything".into());
    }
    let mut mv = vec![0u64; n];
    let sum = |r: std::ops::Range<usize>| p[r].iter().sum::<u64>();
    // interior window of k-1 empty stacks: equalize the two sides
    if let Some(s) = (1..=n - k).find(|&s| p[s..s + k - 1].iter().all(|&h| h == 0)) {
        let (l, r) = (sum(0..s), sum(s + k - 1..n));
        let (mut excess, side): (u64, Vec<usize>) =
            if l > r { (l - r, (0..s).rev().collect()) } else { (r - l, (s + k - 1..n).collect()) };
        for i in side {
            let take = excess.min(p[i]);
            mv[i] = take;
            excess -= take;
        }
        return (Some(mv), format!("empty window at {}..{}: equalize the sides", s + 1, s + k - 1));
    }
    // 1-indexed partial sums L(i) = p1 + .. + pi and R(i) = p(i+k) + .. + pn
    let l = |i: usize| sum(0..i);
    let r = |i: usize| sum(i + k - 1..n);
    if let Some(i) = (1..=n - k).find(|&i| l(i) == r(i)) {
        mv[i..i + k - 1].copy_from_slice(&p[i..i + k - 1]);
        return (Some(mv), format!("L({i}) = R({i}): empty stacks {}..{}", i + 1, i + k - 1));
    }
    if l(1) > r(1) {
        mv[0] = p[0] - r(1);
        mv[1..k].copy_from_slice(&p[1..k]);
        return (Some(mv), "case 1: L(1) > R(1)".into());
    }
    if l(n - k) < r(n - k) {
        mv[n - k..n - 1].copy_from_slice(&p[n - k..n - 1]);
        mv[n - 1] = p[n - 1] - l(n - k);
        return (Some(mv), "case 2: L(n-k) < R(n-k)".into());
    }
    let i = (1..n - k).find(|&i| l(i) < r(i) && l(i + 1) > r(i + 1)).expect("sign change between the ends");
    // 0-indexed: stack i+1 is p[i], stack i+k is p[i+k-1]
    mv[i + 1..i + k - 1].copy_from_slice(&p[i + 1..i + k - 1]);
    let (li, ri1) = (l(i), r(i + 1));
    if li < ri1 {
        mv[i] = p[i] - (ri1 - li);
        mv[i + k - 1] = p[i + k - 1];
    } else {
        mv[i] = p[i];
        mv[i + k - 1] = p[i + k - 1] - (li - ri1);
    }
    (Some(mv), format!("case 3 at i = {i}"))
}

fn solve_path(n: usize, k: usize, pos: &Position) -> Result<Solution> {
    check_path_params(n, k)?;
    check_len(n, pos)?;
    let spec = builtin_game(&format!("pn:{n},{k}"))?;
    let (mv, note) = path_move(k, pos);
    Ok(Solution::direct(&spec, pos, mv.map(Move::new), Method::ClosedForm, note))
}

/// Constructive winning move for `pn:n,k` with `k >= n/2`; `None` on
/// P-positions.
pub fn move_path(n: usize, k: usize, pos: &Position) -> Result<Option<Move>> {
    solve_path(n, k, pos).map(|s| s.mv)
}

fn path32(p: &Position) -> Result<Solution> {
    solve_path(3, 2, p)
}

fn path42(p: &Position) -> Result<Solution> {
    solve_path(4, 2, p)
}

fn path53(p: &Position) -> Result<Solution> {
    solve_path(5, 3, p)
}

fn path63(p: &Position) -> Result<Solution> {
    solve_path(6, 3, p)
}

static CN32: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn32.spec());
static CN42: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn42.spec());
static CN52: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn52.spec());
static CN63: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn63.spec());
static CN73: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn73.spec());
static CN83: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Cn83.spec());
static H: LazyLock<GameSpec> = LazyLock::new(|| Oracle::H.spec());
static PN32: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Path { n: 3, k: 2 }.spec());
static PN42: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Path { n: 4, k: 2 }.spec());
static PN53: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Path { n: 5, k: 3 }.spec());
static PN63: LazyLock<GameSpec> = LazyLock::new(|| Oracle::Path { n: 6, k: 3 }.spec());

fn solve_cn32(pos: &Position) -> Solution {
    let m = pos.iter().copied().min().unwrap_or(0);
    let mv: Vec<u64> = pos.iter().map(|&h| h - m).collect();
    let mv = mv.iter().any(|&x| x > 0).then(|| Move::new(mv));
    Solution::direct(&CN32, pos, mv, Method::ClosedForm, format!("reduce every stack to the minimum {m}"))
}

fn solve_cn42_inner(pos: &Position) -> Solution {
    let mut mv = vec![0u64; 4];
    for (i, j) in [(0, 2), (1, 3)] {
        let m = pos[i].min(pos[j]);
        mv[i] = pos[i] - m;
        mv[j] = pos[j] - m;
    }
    let mv = mv.iter().any(|&x| x > 0).then(|| Move::new(mv));
    Solution::direct(&CN42, pos, mv, Method::ClosedForm, "reduce each square's larger stack to its opposite")
}

fn solve_cn42(pos: &Position) -> Result<Solution> {
    Ok(solve_cn42_inner(pos))
}

fn rotation_to_front(n: usize, s: usize) -> Option<Vec<usize>> {
    (s != 0).then(|| (0..n).map(|v| (v + n - s) % n).collect())
}

fn recipe(description: String, symmetry: Option<Vec<usize>>, zero: Vec<usize>, merge: bool, target: &GameSpec, solver: SubSolver) -> IrpRecipe {
    IrpRecipe { description, symmetry, zero, merge, target: target.clone(), solver }
}

fn labels(vs: &[usize]) -> String {
    vs.iter().map(|&v| crate::game::vertex_label(v)).collect::<Vec<_>>().join(",")
}

static CN52_SCHEDULE: LazyLock<InvarianceSchedule> = LazyLock::new(|| InvarianceSchedule::declared(&[&[1; 5]]));

static CN52_CASES: LazyLock<Vec<IrpCase>> = LazyLock::new(|| {
    vec![IrpCase {
        label: "empty stack",
        classify: Box::new(|p| {
            let s = p.iter().position(|&h| h == 0)?;
            Some(recipe(format!("rotate {} to the front and remove it", labels(&[s])), rotation_to_front(5, s), vec![0], false, &PN42, path42))
        }),
    }]
});

fn solve_cn52(pos: &Position) -> Result<Solution> {
    invariance::irp_move(&CN52, &CN52_SCHEDULE, &CN52_CASES, pos)
}

static H_SCHEDULE: LazyLock<InvarianceSchedule> =
    LazyLock::new(|| InvarianceSchedule::declared(&[&[1, 1, 0, 1, 0, 1], &[1, 0, 1, 0, 1, 1]]));

static H_CASES: LazyLock<Vec<IrpCase>> = LazyLock::new(|| {
    vec![
        IrpCase {
            label: "case 1",
            classify: Box::new(|p| {
                if p[0] == 0 {
                    Some(recipe("a = 0".into(), None, vec![0], false, &PN53, path53))
                } else if p[5] == 0 {
                    Some(recipe("f = 0, reflected".into(), Some(vec![5, 4, 3, 2, 1, 0]), vec![0], false, &PN53, path53))
                } else {
                    None
                }
            }),
        },
        IrpCase {
            label: "case 2",
            classify: Box::new(|p| {
                if p[1] == 0 && p[2] == 0 {
                    Some(recipe("b = c = 0".into(), None, vec![1, 2], true, &PN32, path32))
                } else if p[3] == 0 && p[4] == 0 {
                    Some(recipe("d = e = 0".into(), None, vec![3, 4], true, &PN32, path32))
                } else {
                    None
                }
            }),
        },
        IrpCase {
            label: "case 3",
            classify: Box::new(|p| {
                (p[2] == 0 && p[3] == 0).then(|| recipe("c = d = 0".into(), None, vec![2, 3], false, &PN42, path42))
            }),
        },
        IrpCase {
            label: "case 4",
            classify: Box::new(|p| {
                (p[1] == 0 && p[4] == 0).then(|| recipe("b = e = 0".into(), None, vec![1, 4], false, &CN42, solve_cn42))
            }),
        },
    ]
});

fn solve_h(pos: &Position) -> Result<Solution> {
    invariance::irp_move(&H, &H_SCHEDULE, &H_CASES, pos)
}

/// Winning move in H via the Invariance Reduction Process.
pub fn move_h(pos: &Position) -> Result<Option<Move>> {
    check_len(6, pos)?;
    solve_h(pos).map(|s| s.mv)
}

static CN73_SCHEDULE: LazyLock<InvarianceSchedule> = LazyLock::new(|| InvarianceSchedule::declared(&[&[1; 7]]));

static CN73_CASES: LazyLock<Vec<IrpCase>> = LazyLock::new(|| {
    vec![IrpCase {
        label: "minimal stack",
        classify: Box::new(|p| {
            let s = p.iter().position(|&h| h == 0)?;
            Some(recipe(format!("rotate {} to the front and remove it", labels(&[s])), rotation_to_front(7, s), vec![0], false, &H, solve_h))
        }),
    }]
});

fn solve_cn73(pos: &Position) -> Result<Solution> {
    invariance::irp_move(&CN73, &CN73_SCHEDULE, &CN73_CASES, pos)
}

pub fn move_cn73(pos: &Position) -> Result<Option<Move>> {
    check_len(7, pos)?;
    solve_cn73(pos).map(|s| s.mv)
}

static CN83_SCHEDULE: LazyLock<InvarianceSchedule> =
    LazyLock::new(|| InvarianceSchedule::declared(&[&[1, 0, 1, 0, 1, 0, 1, 0], &[0, 1, 0, 1, 0, 1, 0, 1]]));

static CN83_CASES: LazyLock<Vec<IrpCase>> = LazyLock::new(|| {
    vec![
        IrpCase {
            label: "zeros at distance 3",
            classify: Box::new(|p| {
                let s = (0..8).find(|&s| p[s] == 0 && p[(s + 3) % 8] == 0)?;
                Some(recipe(
                    format!("rotate {} to the front, remove {{{}}}, merge the stacks between", labels(&[s]), labels(&[s, (s + 3) % 8])),
                    rotation_to_front(8, s),
                    vec![0, 3],
                    true,
                    &CN52,
                    solve_cn52,
                ))
            }),
        },
        IrpCase {
            label: "adjacent zeros",
            classify: Box::new(|p| {
                let s = (0..8).find(|&s| p[s] == 0 && p[(s + 1) % 8] == 0)?;
                Some(recipe(
                    format!("rotate {} to the front, remove {{{}}}", labels(&[s]), labels(&[s, (s + 1) % 8])),
                    rotation_to_front(8, s),
                    vec![0, 1],
                    false,
                    &PN63,
                    path63,
                ))
            }),
        },
    ]
});

fn solve_cn83(pos: &Position) -> Result<Solution> {
    invariance::irp_move(&CN83, &CN83_SCHEDULE, &CN83_CASES, pos)
}

pub fn move_cn83(pos: &Position) -> Result<Option<Move>> {
    check_len(8, pos)?;
    solve_cn83(pos).map(|s| s.mv)
}

static CN63_SCHEDULE: LazyLock<InvarianceSchedule> = LazyLock::new(|| {
    InvarianceSchedule::declared(&[
        &[1, 0, 0, 1, 0, 0],
        &[0, 1, 0, 0, 1, 0],
        &[0, 0, 1, 0, 0, 1],
        &[1, 0, 1, 0, 1, 0],
        &[0, 1, 0, 1, 0, 1],
    ])
});

fn solve_cn63(pos: &Position) -> Result<Solution> {
    let reduced = invariance::invariance_reduce(&CN63_SCHEDULE, pos)?;
    let residual = reduced.position.to_vec();
    let support = crate::game::support_mask(&residual);
    let mut explanation = Explanation::new("cn:6,3", pos);
    let cs: Vec<String> = reduced.coefficients.iter().map(|c| c.to_string()).collect();
    explanation.lines.push(format!("invariance reduction, coefficients ({}) -> residual ({})", cs.join(","), reduced.position));
    let mv = if support == 0 {
        explanation.lines.push("residual is zero: P-position".into());
        None
    } else {
        if !CN63.is_face(support) {
            return Err(Error::Internal(format!("cn:6,3 residual ({}) is not playable", reduced.position)));
        }
        explanation.lines.push(format!("remove the residual: move ({})", reduced.position));
        Some(Move::new(residual))
    };
    Ok(Solution { mv, method: Method::ClosedForm, trace: ReductionTrace::identity(&CN63), explanation })
}

/// Winning move for the classical circular games. `cn:5,3` and `cn:7,4`
/// are searched exhaustively within `budget`.
pub fn move_base(game: &str, pos: &Position, budget: u64) -> Result<Option<Move>> {
    match Oracle::from_id(game) {
        Some(o @ (Oracle::Cn32 | Oracle::Cn42 | Oracle::Cn52 | Oracle::Cn53 | Oracle::Cn63 | Oracle::Cn74)) => {
            o.solve_move(pos, budget).map(|s| s.mv)
        }
        _ => Err(Error::UnsupportedGame(game.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub outcome: Outcome,
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub method: Method,
    pub trace: Option<ReductionTrace>,
    pub explanation: Option<Explanation>,
}

impl SolveResult {
    pub fn resulting_position(&self, pos: &Position) -> Option<Position> {
        self.mv.as_ref().and_then(|m| apply_move(pos, m).ok())
    }
}

/// Outcome and how it was decided, without looking for a move.
pub fn classify(spec: &GameSpec, pos: &Position, budget: u64) -> Result<(Outcome, Method)> {
    spec.check_dimension(pos.len())?;
    match Oracle::for_spec(spec) {
        Some(o) => Ok((Outcome::from_is_p(o.is_p(pos)), Method::ClosedForm)),
        None => Ok((Engine::new(spec).with_budget(budget).outcome(pos)?, Method::BruteForce)),
    }
}

/// Outcome and, for N-positions, a winning move. Solved games use their
/// closed form and constructive moves; other games are searched.
pub fn solve_spec(spec: &GameSpec, pos: &Position, budget: u64) -> Result<SolveResult> {
    spec.check_dimension(pos.len())?;
    let oracle = match Oracle::for_spec(spec) {
        Some(o) => o,
        None => {
            let mut engine = Engine::new(spec).with_budget(budget);
            let mv = engine.winning_move(pos)?;
            let outcome = Outcome::from_is_p(mv.is_none());
            let explanation = Solution::direct(spec, pos, mv.clone(), Method::BruteForce, "exhaustive search").explanation;
            return Ok(SolveResult { outcome, mv, method: Method::BruteForce, trace: None, explanation: Some(explanation) });
        }
    };
    if oracle.is_p(pos) {
        let explanation = Explanation::new(spec.id(), pos).line(format!("closed-form test for {}: P-position", oracle.id()));
        return Ok(SolveResult {
            outcome: Outcome::P,
            mv: None,
            method: Method::ClosedForm,
            trace: None,
            explanation: Some(explanation),
        });
    }
    let solution = oracle.solve_move(pos, budget)?;
    let mv = solution
        .mv
        .ok_or_else(|| Error::Internal(format!("{} at ({pos}) is N but no move was found", oracle.id())))?;
    let after = apply_move(pos, &mv)
        .ok()
        .filter(|_| matches!(spec.is_legal_move(pos, &mv), Ok(l) if l.is_legal()))
        .ok_or_else(|| Error::Internal(format!("{} produced illegal move ({mv}) at ({pos})", oracle.id())))?;
    if !oracle.is_p(&after) {
        return Err(Error::Internal(format!("{} move ({mv}) at ({pos}) lands on an N-position", oracle.id())));
    }
    Ok(SolveResult {
        outcome: Outcome::N,
        mv: Some(mv),
        method: solution.method,
        trace: Some(solution.trace),
        explanation: Some(solution.explanation),
    })
}

pub fn solve(game_id: &str, pos: &Position, budget: u64) -> Result<SolveResult> {
    let spec = builtin_game(game_id)?;
    solve_spec(&spec, pos, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grundy::DEFAULT_BUDGET;

    fn pos(v: &[u64]) -> Position {
        Position::new(v.to_vec())
    }

    fn mv(v: &[u64]) -> Option<Move> {
        Some(Move::new(v.to_vec()))
    }

    #[test]
    fn base_membership_examples() {
        assert!(p_membership_base("cn:5,2", &[3, 8, 3, 5, 6]).unwrap());
        assert!(!p_membership_base("cn:5,2", &[3, 8, 5, 9, 6]).unwrap());
        assert!(p_membership_base("cn:7,4", &[0, 0, 1, 0, 0, 1, 1]).unwrap());
        assert!(!p_membership_base("cn:7,4", &[1, 1, 2, 1, 1, 2, 2]).unwrap());
        assert!(p_membership_base("cn:6,3", &[1, 2, 3, 1, 2, 3]).unwrap());
        assert!(matches!(p_membership_base("cn:6,3", &[1, 2]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(p_membership_base("h", &[0; 6]), Err(Error::UnsupportedGame(_))));
    }

    #[test]
    fn path_membership_examples() {
        assert!(p_membership_path(5, 3, &[4, 6, 0, 0, 10]).unwrap());
        assert!(p_membership_path(6, 3, &[2, 3, 0, 0, 1, 4]).unwrap());
        assert!(!p_membership_path(5, 5, &[0, 0, 0, 0, 1]).unwrap());
        assert!(p_membership_path(4, 2, &[1, 0, 1, 0]).unwrap());
        assert!(matches!(p_membership_path(5, 2, &[0; 5]), Err(Error::UnsupportedParameters(_))));
    }

    #[test]
    fn h_and_large_game_membership_examples() {
        assert!(p_membership_h(&[2, 6, 6, 2, 0, 12]).unwrap());
        assert!(p_membership_h(&[4, 2, 9, 1, 3, 11]).unwrap());
        assert!(!p_membership_h(&[2, 6, 11, 8, 3, 12]).unwrap());
        assert!(p_membership_cn73(&[3, 5, 9, 9, 5, 3, 15]).unwrap());
        assert!(!p_membership_cn73(&[3, 5, 9, 14, 11, 6, 15]).unwrap());
        assert!(p_membership_cn73(&[0; 7]).unwrap());
        assert!(p_membership_cn83(&[4; 8]).unwrap());
        assert!(p_membership_cn83(&[0, 2, 1, 0, 1, 1, 1, 1]).unwrap());
        assert!(!p_membership_cn83(&[1, 0, 0, 0, 0, 0, 0, 0]).unwrap());
    }

    #[test]
    fn square_decomposition_round_trip() {
        let q = [0, 2, 1, 0, 1, 1, 1, 1];
        let d = SquareDecomposition::of(&q).unwrap();
        assert_eq!((d.a, d.b), (0, 0));
        assert_eq!(d.reduced(), [2, 1, 1, 2, 1]);
        assert_eq!(d.reconstruct(), q.to_vec());
        assert!(SquareDecomposition::of(&[1, 0, 0, 0, 0, 0, 0, 0]).is_none());
    }

    #[test]
    fn path_move_examples() {
        assert_eq!(move_path(5, 3, &pos(&[4, 11, 6, 3, 10])).unwrap(), mv(&[0, 5, 6, 3, 0]));
        assert_eq!(move_path(3, 2, &pos(&[7, 2, 8])).unwrap(), mv(&[0, 2, 1]));
        assert_eq!(move_path(4, 2, &pos(&[1, 0, 1, 0])).unwrap(), None);
        assert_eq!(move_path(4, 2, &pos(&[5, 2, 6, 3])).unwrap(), mv(&[0, 2, 4, 0]));
    }

    #[test]
    fn irp_move_examples() {
        assert_eq!(move_h(&pos(&[2, 6, 11, 8, 3, 12])).unwrap(), mv(&[0, 0, 5, 6, 3, 0]));
        assert_eq!(move_h(&pos(&[6, 2, 9, 1, 3, 12])).unwrap(), mv(&[2, 0, 0, 0, 0, 1]));
        assert_eq!(move_h(&pos(&[0; 6])).unwrap(), None);
        assert_eq!(move_cn73(&pos(&[3, 5, 9, 14, 11, 6, 15])).unwrap(), mv(&[0, 0, 0, 5, 6, 3, 0]));
        assert_eq!(move_cn73(&pos(&[1; 7])).unwrap(), None);
        assert_eq!(move_cn73(&pos(&[1, 0, 0, 0, 0, 0, 0])).unwrap(), mv(&[1, 0, 0, 0, 0, 0, 0]));
        assert_eq!(move_cn83(&pos(&[1, 0, 0, 0, 0, 0, 0, 0])).unwrap(), mv(&[1, 0, 0, 0, 0, 0, 0, 0]));
        assert_eq!(move_cn83(&pos(&[3; 8])).unwrap(), None);
        let p = pos(&[0, 2, 1, 0, 1, 1, 1, 2]);
        let m = move_cn83(&p).unwrap().unwrap();
        assert!(p_membership_cn83(&apply_move(&p, &m).unwrap()).unwrap());
    }

    #[test]
    fn base_move_examples() {
        assert_eq!(move_base("cn:5,2", &pos(&[3, 8, 5, 9, 6]), DEFAULT_BUDGET).unwrap(), mv(&[0, 0, 2, 4, 0]));
        assert_eq!(move_base("cn:3,2", &pos(&[2, 1, 1]), DEFAULT_BUDGET).unwrap(), mv(&[1, 0, 0]));
        let p = pos(&[1, 2, 3, 1, 2, 4]);
        let m = move_base("cn:6,3", &p, DEFAULT_BUDGET).unwrap().unwrap();
        assert!(p_membership_base("cn:6,3", &apply_move(&p, &m).unwrap()).unwrap());
        assert!(matches!(move_base("h", &pos(&[0; 6]), DEFAULT_BUDGET), Err(Error::UnsupportedGame(_))));
    }

    #[test]
    fn solve_examples() {
        let r = solve("cn:7,3", &pos(&[3, 5, 9, 14, 11, 6, 15]), DEFAULT_BUDGET).unwrap();
        assert_eq!((r.outcome, r.mv.clone(), r.method), (Outcome::N, mv(&[0, 0, 0, 5, 6, 3, 0]), Method::Irp));
        assert_eq!(r.trace.unwrap().target().id(), "pn:5,3");
        let r = solve("h", &pos(&[2, 6, 6, 2, 0, 12]), DEFAULT_BUDGET).unwrap();
        assert_eq!((r.outcome, r.mv, r.method), (Outcome::P, None, Method::ClosedForm));
        let r = solve("nim:3", &pos(&[3, 1, 0]), DEFAULT_BUDGET).unwrap();
        assert_eq!((r.outcome, r.mv, r.method), (Outcome::N, mv(&[2, 0, 0]), Method::BruteForce));
        assert!(matches!(solve("zz:1", &pos(&[1]), DEFAULT_BUDGET), Err(Error::UnknownId(_))));
    }

    #[test]
    fn oracle_lookup() {
        assert_eq!(Oracle::from_id("pn:6,3"), Some(Oracle::Path { n: 6, k: 3 }));
        assert_eq!(Oracle::from_id("pn:6,2"), None);
        assert_eq!(Oracle::from_id("cn:6,2"), None);
        let relabeled = builtin_game("cn:5,2").unwrap().with_id("custom");
        assert_eq!(Oracle::for_spec(&relabeled), Some(Oracle::Cn52));
        assert_eq!(Oracle::all(8).len(), 9 + 24);
    }
}
