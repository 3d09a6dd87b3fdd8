//! The move sets of a game viewed as the facets of a simplicial complex:
//! circuits (minimal non-faces), their points, and the P-positions of
//! pointed complexes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Position};

pub const CIRCUIT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Circuit {
    pub vertices: Vec<usize>,
    pub indicator: Vec<u8>,
    /// Vertices in no other circuit.
    pub points: Vec<usize>,
    /// Least-index point, if any.
    pub point: Option<usize>,
}

impl Circuit {
    pub fn mask(&self) -> u64 {
        self.vertices.iter().fold(0, |m, &v| m | 1 << v)
    }

    pub fn label(&self) -> String {
        let vs: Vec<String> = self.vertices.iter().map(|&v| game::vertex_label(v)).collect();
        format!("{{{}}}", vs.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitAnalysis {
    pub circuits: Vec<Circuit>,
    pub pointed: bool,
}

/// All minimal non-faces, in lexicographic order of their sorted vertex
/// lists. Points are not yet annotated.
pub fn circuits(spec: &GameSpec) -> Result<Vec<Circuit>> {
    let n = spec.n();
    if n > CIRCUIT_LIMIT {
        return Err(Error::TooLarge { what: "circuit enumeration", n, limit: CIRCUIT_LIMIT });
    }
    let mut found: Vec<Vec<usize>> = (1u64..1 << n)
        .filter(|&s| {
            !spec.is_face(s) && game::mask_vertices(s).iter().all(|&v| spec.is_face(s & !(1 << v)))
        })
        .map(game::mask_vertices)
        .collect();
    found.sort();
    Ok(found
        .into_iter()
        .map(|vertices| {
            let indicator = (0..n).map(|v| vertices.contains(&v) as u8).collect();
            Circuit { vertices, indicator, points: Vec::new(), point: None }
        })
        .collect())
}

/// Marks the points of each circuit. The complex is pointed when every
/// circuit has one.
pub fn points_of(mut circuits: Vec<Circuit>) -> CircuitAnalysis {
    let masks: Vec<u64> = circuits.iter().map(Circuit::mask).collect();
    for (i, c) in circuits.iter_mut().enumerate() {
        let others = masks.iter().enumerate().filter(|&(j, _)| j != i).fold(0, |acc, (_, &m)| acc | m);
        c.points = c.vertices.iter().copied().filter(|&v| others >> v & 1 == 0).collect();
        c.point = c.points.first().copied();
    }
    let pointed = circuits.iter().all(|c| c.point.is_some());
    CircuitAnalysis { circuits, pointed }
}

pub fn analyze(spec: &GameSpec) -> Result<CircuitAnalysis> {
    Ok(points_of(circuits(spec)?))
}

/// Whether `pos` is a non-negative combination of circuit indicators of a
/// pointed complex.
pub fn pointed_p_membership(spec: &GameSpec, pos: &Position) -> Result<bool> {
    spec.check_dimension(pos.len())?;
    let analysis = analyze(spec)?;
    pointed_membership(&analysis, pos)
}

/// As [`pointed_p_membership`] with precomputed circuits.
pub fn pointed_membership(analysis: &CircuitAnalysis, pos: &[u64]) -> Result<bool> {
    if !analysis.pointed {
        return Err(Error::NotPointed);
    }
    let mut rebuilt = vec![0u64; pos.len()];
    for c in &analysis.circuits {
        let coeff = pos[c.point.expect("pointed")];
        for &v in &c.vertices {
            rebuilt[v] += coeff;
        }
    }
    Ok(rebuilt == pos)
}

/// The P-positions of a pointed complex written as a symbolic vector, one
/// coefficient name per circuit: e.g. `(a+b,c,a,b,a+c)`.
pub fn p_family(analysis: &CircuitAnalysis, n: usize) -> String {
    let names: Vec<String> = (0..analysis.circuits.len()).map(game::vertex_label).collect();
    let entries: Vec<String> = (0..n)
        .map(|v| {
            let terms: Vec<&str> = analysis
                .circuits
                .iter()
                .zip(&names)
                .filter(|(c, _)| c.vertices.contains(&v))
                .map(|(_, name)| name.as_str())
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join("+")
            }
        })
        .collect();
    format!("({})", entries.join(","))
}
