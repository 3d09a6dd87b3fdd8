use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::game::{GameSpec, Move, Position};
use crate::reduction::ReductionTrace;

/// How an answer was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Irp,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Irp => "irp",
            Method::BruteForce => "brute_force",
        })
    }
}

/// Human-readable account of how a move was found, nested once per
/// sub-game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub game: String,
    pub position: Position,
    pub lines: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub: Option<Box<Explanation>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub after_sub: Vec<String>,
}

impl Explanation {
    pub fn new(game: impl Into<String>, position: &Position) -> Self {
        Explanation { game: game.into(), position: position.clone(), lines: Vec::new(), sub: None, after_sub: Vec::new() }
    }

    pub fn line(mut self, line: impl Into<String>) -> Self {
        self.lines.push(line.into());
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let _ = writeln!(out, "{pad}{} at ({})", self.game, self.position);
        for line in &self.lines {
            let _ = writeln!(out, "{pad}  {line}");
        }
        if let Some(sub) = &self.sub {
            sub.render_into(out, depth + 2);
        }
        for line in &self.after_sub {
            let _ = writeln!(out, "{pad}  {line}");
        }
    }
}

/// A move (or the absence of one) together with the reductions behind it.
/// `trace` leads from the queried game to the game the move was finally
/// computed in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solution {
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub method: Method,
    pub trace: ReductionTrace,
    pub explanation: Explanation,
}

impl Solution {
    pub fn direct(spec: &GameSpec, pos: &Position, mv: Option<Move>, method: Method, note: impl Into<String>) -> Self {
        let mut explanation = Explanation::new(spec.id(), pos).line(note);
        explanation.lines.push(match &mv {
            Some(m) => format!("move ({m})"),
            None => "P-position: no winning move".to_string(),
        });
        Solution { mv, method, trace: ReductionTrace::identity(spec), explanation }
    }
}
