//! Set nim: games, reductions, Grundy search and closed-form oracles.

pub mod complex;
pub mod error;
pub mod game;
pub mod grundy;
pub mod invariance;
pub mod oracles;
pub mod reduction;
pub mod solution;

pub use error::{Error, Result};
pub use game::{apply_move, build_game, builtin_game, GameSpec, Legality, Move, Outcome, Position};
pub use oracles::{solve, solve_spec, Oracle, SolveResult};
pub use reduction::{ReductionStep, ReductionTrace};
pub use solution::{Explanation, Method, Solution};
