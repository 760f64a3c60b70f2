//! Squares of paths and cycles as walks over oriented edges.
//!
//! A sequence `v1, v2, ..., vm` is the vertex order of a square path iff every
//! window of three consecutive vertices spans a triangle. Reading the path as a
//! walk over [`EdgeState`]s `(v1, v2) -> (v2, v3) -> ...`, the successors of
//! `(u, v)` are exactly the states `(v, w)` with `w ∈ N(u) ∩ N(v)`.

mod exact;
mod greedy;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, Vertex};

pub use exact::{
    has_square_hamilton_cycle, longest_square_cycle_exact, longest_square_path_exact,
    CycleSearchOutcome, HamiltonVerdict, PathSearchOutcome,
};
pub use greedy::greedy_square_path;

/// Shortest cyclic sequence whose distance-two chords are all distinct from the
/// cycle edges.
pub const MIN_SQUARE_CYCLE_LEN: usize = 5;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("sequence is not a square path in the graph")]
    NotSquarePath,
    #[error("sequence is not a square cycle in the graph (needs >= {MIN_SQUARE_CYCLE_LEN} vertices)")]
    NotSquareCycle,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The last two vertices of a partial square path; `{first, second}` is an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeState {
    pub first: Vertex,
    pub second: Vertex,
}

impl EdgeState {
    pub fn new(g: &Graph, first: Vertex, second: Vertex) -> Result<Self, GraphError> {
        g.check_edge(first, second)?;
        Ok(EdgeState { first, second })
    }

    pub fn reversed(self) -> Self {
        EdgeState {
            first: self.second,
            second: self.first,
        }
    }
}

/// Every oriented edge, `(u, v)` and `(v, u)` for each edge, ordered by
/// `(first, second)`.
pub fn edge_states(g: &Graph) -> Vec<EdgeState> {
    (0..g.n())
        .flat_map(|u| g.neighbors(u).ones().map(move |v| EdgeState { first: u, second: v }))
        .collect()
}

/// The states reachable from `s = (u, v)` in one step: `(v, w)` for every
/// `w ∈ N(u) ∩ N(v)`.
pub fn successors(g: &Graph, s: EdgeState) -> Vec<EdgeState> {
    g.neighbors(s.first)
        .intersection(g.neighbors(s.second))
        .map(|w| EdgeState {
            first: s.second,
            second: w,
        })
        .collect()
}

/// True iff `seq` consists of distinct vertices of `g` with all consecutive and
/// distance-two pairs adjacent. Sequences of length 0 and 1 are valid when their
/// vertices exist; length 2 additionally needs the edge.
pub fn is_square_path(g: &Graph, seq: &[Vertex]) -> bool {
    if seq.iter().any(|&v| v >= g.n()) || !all_distinct(seq) {
        return false;
    }
    seq.windows(2).all(|w| g.has_edge(w[0], w[1])) && seq.windows(3).all(|w| g.has_edge(w[0], w[2]))
}

/// Cyclic analogue of [`is_square_path`]; requires at least
/// [`MIN_SQUARE_CYCLE_LEN`] vertices.
pub fn is_square_cycle(g: &Graph, seq: &[Vertex]) -> bool {
    let m = seq.len();
    if m < MIN_SQUARE_CYCLE_LEN || seq.iter().any(|&v| v >= g.n()) || !all_distinct(seq) {
        return false;
    }
    (0..m).all(|i| g.has_edge(seq[i], seq[(i + 1) % m]) && g.has_edge(seq[i], seq[(i + 2) % m]))
}

fn all_distinct(seq: &[Vertex]) -> bool {
    let mut seen = HashSet::with_capacity(seq.len());
    seq.iter().all(|v| seen.insert(*v))
}

/// A vertex sequence certified as a square path when it was constructed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SquarePath(Vec<Vertex>);

impl SquarePath {
    pub fn new(g: &Graph, vertices: Vec<Vertex>) -> Result<Self, WalkError> {
        if is_square_path(g, &vertices) {
            Ok(SquarePath(vertices))
        } else {
            Err(WalkError::NotSquarePath)
        }
    }

    pub fn empty() -> Self {
        SquarePath(Vec::new())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    /// Re-checks the certificate against `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        is_square_path(g, &self.0)
    }
}

/// A cyclic vertex sequence certified as a square cycle when it was constructed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SquareCycle(Vec<Vertex>);

impl SquareCycle {
    pub fn new(g: &Graph, vertices: Vec<Vertex>) -> Result<Self, WalkError> {
        if is_square_cycle(g, &vertices) {
            Ok(SquareCycle(vertices))
        } else {
            Err(WalkError::NotSquareCycle)
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub fn is_valid_in(&self, g: &Graph) -> bool {
        is_square_cycle(g, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_state_counts() {
        assert_eq!(edge_states(&Graph::complete(3)).len(), 6);
        assert!(edge_states(&Graph::empty(4)).is_empty());
        let g = Graph::gnp(100, 0.1, 2).unwrap();
        let states = edge_states(&g);
        assert_eq!(states.len(), 2 * g.edge_count());
        assert!(states.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn successors_small_cases() {
        let k4 = Graph::complete(4);
        let s = EdgeState::new(&k4, 0, 1).unwrap();
        assert_eq!(
            successors(&k4, s),
            vec![EdgeState { first: 1, second: 2 }, EdgeState { first: 1, second: 3 }]
        );
        let c4 = Graph::cycle(4);
        for s in edge_states(&c4) {
            assert!(successors(&c4, s).is_empty());
        }
    }

    #[test]
    fn successors_match_brute_force() {
        let g = Graph::gnp(60, 0.4, 9).unwrap();
        for s in edge_states(&g).into_iter().step_by(37) {
            let brute: Vec<_> = (0..g.n())
                .filter(|&w| g.has_edge(s.first, w) && g.has_edge(s.second, w))
                .map(|w| EdgeState { first: s.second, second: w })
                .collect();
            let got = successors(&g, s);
            assert_eq!(got.len(), g.triangles_of_edge(s.first, s.second).unwrap().len());
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn square_path_validity() {
        let k4 = Graph::complete(4);
        assert!(is_square_path(&k4, &[0, 1, 2, 3]));
        assert!(!is_square_path(&k4, &[0, 1, 0]));
        let c5 = Graph::cycle(5);
        assert!(!is_square_path(&c5, &[0, 1, 2]));
        assert!(is_square_path(&c5, &[0, 1]));
        assert!(!is_square_path(&c5, &[0, 2]));
        assert!(is_square_path(&c5, &[3]));
        assert!(is_square_path(&c5, &[]));
        let c6 = Graph::cycle(6);
        for start in 0..6 {
            let seq: Vec<_> = (0..3).map(|i| (start + i) % 6).collect();
            assert!(!is_square_path(&c6, &seq));
        }
    }

    #[test]
    fn square_cycle_validity() {
        let c8 = Graph::square_cycle(8);
        let seq: Vec<_> = (0..8).collect();
        assert!(is_square_cycle(&c8, &seq));
        assert!(SquareCycle::new(&c8, seq).is_ok());
        let k4 = Graph::complete(4);
        assert!(!is_square_cycle(&k4, &[0, 1, 2, 3]));
        assert!(is_square_cycle(&Graph::complete(5), &[0, 1, 2, 3, 4]));
        assert!(SquarePath::new(&c8, vec![0, 1, 4]).is_err());
    }

    #[test]
    fn certificates_serialize_as_arrays() {
        let k5 = Graph::complete(5);
        let p = SquarePath::new(&k5, vec![4, 2, 0]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[4,2,0]");
        let c = SquareCycle::new(&k5, vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), "[0,1,2,3,4]");
    }
}
