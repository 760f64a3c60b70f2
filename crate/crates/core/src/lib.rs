//! Square paths and square cycles in dense subgraphs of random graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: immutable bitset graphs, `G(n, p)`, the text file format.
//! - [`adversary`]: per-vertex resilience deletion and the lower-bound
//!   constructions (neighbourhood wipe, independent blocker, tripartite template).
//! - [`square_walk`]: square paths/cycles as walks over oriented edges, with
//!   exact branch-and-bound and greedy search.
//! - [`regularity`]: densities, sampled `(ε, p)`-regularity tests and a
//!   heuristic equitable partitioner with its reduced graph.
//! - [`blowup`]: chains of classes modelling blow-ups of squared paths, the
//!   triangle pruning process, triangle/edge expansion and square-path counting.
//! - [`embedder`]: the window-by-window greedy square-cycle embedder.

pub mod adversary;
pub mod blowup;
pub mod embedder;
pub mod graph;
pub mod regularity;
pub mod rng;
pub mod square_walk;

pub use graph::{BipartitePairView, Graph, GraphError, Vertex};
pub use square_walk::{EdgeState, SquareCycle, SquarePath};
