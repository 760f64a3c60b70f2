//! Chains of vertex classes modelling blow-ups of squared paths.
//!
//! A [`ChainPartition`] is an ordered list of disjoint classes `V_0, ..., V_{k-1}`
//! over a source graph. It owns a private copy of the edges between classes at
//! distance one or two (its mask), relabelled to chain-local ids in which every
//! class starts on a word boundary. All intersection work (triangles into the
//! next class, layered reachability) then runs on contiguous word slices of a
//! single class, and pruning never touches the shared source graph.

mod count;
mod expansion;
mod prune;

use std::ops::Range;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BernoulliThreshold, Graph, GraphError, Vertex};
use crate::rng::seeded_rng;

pub use count::{count_square_paths_between, count_square_paths_from};
pub use expansion::{
    edge_expansion, triangle_expand, EdgeExpansion, ExpansionBound, ExpansionParams, Reach,
    TriangleExpansion,
};
pub use prune::{
    check_gtilde_ii, forward_triangle_deficits, prune_to_gtilde, ClassExceptions, PairPrune,
    PruneReport, PruneSchedule,
};

const WORD: usize = usize::BITS as usize;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("chain needs at least {min} classes, got {got}")]
    TooFewClasses { min: usize, got: usize },
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("class sizes differ ({0} vs {1})")]
    UnequalClasses(usize, usize),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("({0}, {1}) is not an edge of pair {2} of the chain")]
    NotInPair(Vertex, Vertex, usize),
    #[error("edge set is empty")]
    EmptyEdgeSet,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Ordered disjoint classes over a graph, with the edges between classes at
/// distance one or two.
#[derive(Clone)]
pub struct ChainPartition {
    source: Arc<Graph>,
    classes: Vec<Vec<Vertex>>,
    offsets: Vec<usize>,
    local: Graph,
    global_to_local: Vec<u32>,
    reference_p: f64,
}

impl std::fmt::Debug for ChainPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainPartition")
            .field("k", &self.k())
            .field("class_sizes", &self.class_sizes())
            .field("reference_p", &self.reference_p)
            .field("edges", &self.local.edge_count())
            .finish()
    }
}

/// Synthetic chain on `k·n0` vertices, class `i` being `i·n0..(i+1)·n0`. Pairs
/// at distance one and two are filled with independent `p0`-coins, pair by
/// pair in lexicographic order.
pub fn build_chain_random(k: usize, n0: usize, p0: f64, seed: u64) -> Result<ChainPartition, ChainError> {
    if k < 3 || n0 < 3 {
        return Err(ChainError::InvalidParameter(format!("need k >= 3 and n0 >= 3, got k={k}, n0={n0}")));
    }
    let coin = BernoulliThreshold::new(p0)?;
    let mut rng = seeded_rng(seed);
    let mut g = Graph::empty(k * n0);
    for i in 0..k {
        for j in i + 1..(i + 3).min(k) {
            for a in 0..n0 {
                for b in 0..n0 {
                    if coin.sample(&mut rng) {
                        g.insert_edge(i * n0 + a, j * n0 + b);
                    }
                }
            }
        }
    }
    let classes = (0..k).map(|i| (i * n0..(i + 1) * n0).collect()).collect();
    ChainPartition::view(Arc::new(g), classes, p0)
}

/// Chain view with equal class sizes over `g`; edges between classes at
/// distance three or more, and inside classes, are masked.
pub fn chain_view(g: &Arc<Graph>, classes: Vec<Vec<Vertex>>, reference_p: f64) -> Result<ChainPartition, ChainError> {
    ChainPartition::view(Arc::clone(g), classes, reference_p)
}

impl ChainPartition {
    pub fn view(source: Arc<Graph>, classes: Vec<Vec<Vertex>>, reference_p: f64) -> Result<Self, ChainError> {
        if let Some(first) = classes.first() {
            if let Some(c) = classes.iter().find(|c| c.len() != first.len()) {
                return Err(ChainError::UnequalClasses(first.len(), c.len()));
            }
        }
        Self::pooled(source, classes, reference_p)
    }

    /// Like [`ChainPartition::view`] but classes may differ in size, as happens
    /// for windows over partially used classes.
    pub fn pooled(source: Arc<Graph>, classes: Vec<Vec<Vertex>>, reference_p: f64) -> Result<Self, ChainError> {
        if classes.len() < 2 {
            return Err(ChainError::TooFewClasses {
                min: 2,
                got: classes.len(),
            });
        }
        let mut seen = FixedBitSet::with_capacity(source.n());
        for (i, c) in classes.iter().enumerate() {
            if c.is_empty() {
                return Err(ChainError::EmptyClass(i));
            }
            for &v in c {
                source.check_vertex(v)?;
                if seen.put(v) {
                    return Err(GraphError::Overlap(v).into());
                }
            }
        }
        let offsets = aligned_offsets(&classes);
        let total = *offsets.last().expect("at least two classes");
        let mut global_to_local = vec![u32::MAX; source.n()];
        for (i, c) in classes.iter().enumerate() {
            for (a, &v) in c.iter().enumerate() {
                global_to_local[v] = (offsets[i] + a) as u32;
            }
        }
        let class_sets: Vec<FixedBitSet> = classes
            .iter()
            .map(|c| source.vertex_set(c).expect("validated"))
            .collect();
        let mut local = Graph::empty(total);
        for (i, c) in classes.iter().enumerate() {
            for j in i + 1..(i + 3).min(classes.len()) {
                for &u in c {
                    let lu = global_to_local[u] as usize;
                    for w in source.neighbors(u).intersection(&class_sets[j]) {
                        local.insert_edge(lu, global_to_local[w] as usize);
                    }
                }
            }
        }
        Ok(ChainPartition {
            source,
            classes,
            offsets,
            local,
            global_to_local,
            reference_p,
        })
    }

    /// The same chain read backwards, mask included.
    pub fn reversed(&self) -> Self {
        let classes: Vec<Vec<Vertex>> = self.classes.iter().rev().cloned().collect();
        let offsets = aligned_offsets(&classes);
        let mut global_to_local = vec![u32::MAX; self.source.n()];
        for (i, c) in classes.iter().enumerate() {
            for (a, &v) in c.iter().enumerate() {
                global_to_local[v] = (offsets[i] + a) as u32;
            }
        }
        let mut local = Graph::empty(*offsets.last().expect("non-empty"));
        for (u, v) in self.local.edges() {
            let gu = self.to_global(u);
            let gv = self.to_global(v);
            local.insert_edge(global_to_local[gu] as usize, global_to_local[gv] as usize);
        }
        ChainPartition {
            source: Arc::clone(&self.source),
            classes,
            offsets,
            local,
            global_to_local,
            reference_p: self.reference_p,
        }
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<Vertex>] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &[Vertex] {
        &self.classes[i]
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// The common class size, if all classes have the same size.
    pub fn n0(&self) -> Option<usize> {
        let s = self.classes[0].len();
        self.classes.iter().all(|c| c.len() == s).then_some(s)
    }

    pub fn reference_p(&self) -> f64 {
        self.reference_p
    }

    pub fn source(&self) -> &Arc<Graph> {
        &self.source
    }

    /// Number of surviving chain edges between classes at distance one or two.
    pub fn edge_count(&self) -> usize {
        self.local.edge_count()
    }

    /// Surviving edges of the consecutive pair `(V_i, V_{i+1})`.
    pub fn pair_edge_count(&self, i: usize) -> usize {
        self.classes[i]
            .iter()
            .map(|&u| self.count_in(self.global_to_local[u] as usize, i + 1))
            .sum()
    }

    /// Surviving edges of pair `i` as `(u, v)` with `u ∈ V_i`, `v ∈ V_{i+1}`,
    /// ordered by the positions of `u`, then `v`, within their classes.
    pub fn pair_edges(&self, i: usize) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for &u in &self.classes[i] {
            let lu = self.global_to_local[u] as usize;
            for lv in self.neighbors_in(lu, i + 1) {
                out.push((u, self.to_global(lv)));
            }
        }
        out
    }

    /// Whether `{u, v}` is a surviving chain edge.
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        match (self.local_of(u), self.local_of(v)) {
            (Some(a), Some(b)) => self.local.has_edge(a, b),
            _ => false,
        }
    }

    /// Class index of a source vertex, if it belongs to the chain.
    pub fn class_of(&self, v: Vertex) -> Option<usize> {
        let l = self.local_of(v)?;
        Some(self.offsets.partition_point(|&o| o <= l) - 1)
    }

    /// All surviving chain edges in source ids, `u < v`, sorted.
    pub fn surviving_edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out: Vec<(Vertex, Vertex)> = self
            .local
            .edges()
            .map(|(a, b)| {
                let (u, v) = (self.to_global(a), self.to_global(b));
                (u.min(v), u.max(v))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Class membership and surviving edges, for storing next to the source
    /// graph file.
    pub fn snapshot(&self) -> ChainSnapshot {
        ChainSnapshot {
            reference_p: self.reference_p,
            classes: self.classes.clone(),
            surviving_edges: self.surviving_edges(),
        }
    }

    /// Rebuilds a chain from its source graph and a snapshot. Edges listed in
    /// the snapshot must exist in the source graph and join classes at
    /// distance one or two.
    pub fn from_snapshot(source: Arc<Graph>, snap: &ChainSnapshot) -> Result<Self, ChainError> {
        let full = Self::pooled(source, snap.classes.clone(), snap.reference_p)?;
        let keep: std::collections::HashSet<(Vertex, Vertex)> = snap.surviving_edges.iter().copied().collect();
        for &(u, v) in &keep {
            if !full.has_edge(u, v) {
                return Err(GraphError::NotAnEdge(u, v).into());
            }
        }
        let drop: Vec<(Vertex, Vertex)> = full
            .surviving_edges()
            .into_iter()
            .filter(|e| !keep.contains(e))
            .map(|(u, v)| (full.global_to_local[u] as usize, full.global_to_local[v] as usize))
            .collect();
        Ok(full.with_local_removed(drop))
    }

    pub(crate) fn local(&self) -> &Graph {
        &self.local
    }

    pub(crate) fn local_of(&self, v: Vertex) -> Option<usize> {
        match self.global_to_local.get(v) {
            Some(&l) if l != u32::MAX => Some(l as usize),
            _ => None,
        }
    }

    pub(crate) fn to_global(&self, local: usize) -> Vertex {
        let i = self.offsets.partition_point(|&o| o <= local) - 1;
        self.classes[i][local - self.offsets[i]]
    }

    /// Local id of the `a`-th vertex of class `i`.
    pub(crate) fn local_id(&self, i: usize, a: usize) -> usize {
        self.offsets[i] + a
    }

    /// Word range of class `i` inside any local bitset.
    pub(crate) fn words(&self, i: usize) -> Range<usize> {
        let start = self.offsets[i] / WORD;
        start..start + self.classes[i].len().div_ceil(WORD)
    }

    /// Neighbourhood of local vertex `v` inside class `i`, as a word slice whose
    /// bit `a` stands for the `a`-th vertex of the class.
    pub(crate) fn row(&self, v: usize, i: usize) -> &[usize] {
        &self.local.neighbors(v).as_slice()[self.words(i)]
    }

    pub(crate) fn count_in(&self, v: usize, i: usize) -> usize {
        self.row(v, i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Local ids of the neighbours of `v` in class `i`.
    pub(crate) fn neighbors_in(&self, v: usize, i: usize) -> impl Iterator<Item = usize> + '_ {
        let base = self.offsets[i];
        ones(self.row(v, i)).map(move |a| base + a)
    }

    pub(crate) fn with_local_removed(&self, edges: Vec<(usize, usize)>) -> Self {
        let mut out = self.clone();
        out.local = self.local.without_edges(edges);
        out
    }
}

fn aligned_offsets(classes: &[Vec<Vertex>]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(classes.len() + 1);
    let mut at = 0;
    for c in classes {
        offsets.push(at);
        at += c.len().div_ceil(WORD) * WORD;
    }
    offsets.push(at);
    offsets
}

/// Indices of set bits in a word slice.
pub(crate) fn ones(words: &[usize]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * WORD + b)
        })
    })
}

pub(crate) fn and_count(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Sidecar for a chain: class membership plus the surviving-edge mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub reference_p: f64,
    pub classes: Vec<Vec<Vertex>>,
    pub surviving_edges: Vec<(Vertex, Vertex)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::seq::SliceRandom;

    #[test]
    fn complete_random_chain() {
        let c = build_chain_random(3, 5, 1.0, 1).unwrap();
        assert_eq!(c.pair_edge_count(0), 25);
        assert_eq!(c.pair_edge_count(1), 25);
        assert_eq!(c.edge_count(), 75);
        assert_eq!(build_chain_random(4, 5, 0.0, 1).unwrap().edge_count(), 0);
        assert!(build_chain_random(2, 5, 0.5, 1).is_err());
        assert!(build_chain_random(3, 5, 1.5, 1).is_err());
    }

    #[test]
    fn random_chain_pair_counts_concentrate() {
        let c = build_chain_random(5, 500, 0.1, 3).unwrap();
        let sigma = (250_000.0f64 * 0.1 * 0.9).sqrt();
        for i in 0..4 {
            assert!((c.pair_edge_count(i) as f64 - 25_000.0).abs() <= 5.0 * sigma);
        }
        assert!(c.source().edges().all(|(u, v)| (v / 500) - (u / 500) <= 2));
        assert_eq!(c.source().edge_count(), c.edge_count());
    }

    #[test]
    fn view_masks_far_and_inner_edges() {
        let g = Arc::new(Graph::complete(12));
        let classes: Vec<Vec<Vertex>> = (0..4).map(|i| (3 * i..3 * i + 3).collect()).collect();
        let c = chain_view(&g, classes, 1.0).unwrap();
        // pairs at distance 1: 3 × 9, distance 2: 2 × 9
        assert_eq!(c.edge_count(), 45);
        assert!(!c.has_edge(0, 1));
        assert!(!c.has_edge(0, 9));
        assert!(c.has_edge(0, 6));
        assert_eq!(c.class_of(7), Some(2));
        assert!(chain_view(&g, vec![vec![0, 1], vec![1, 2]], 1.0).is_err());
        assert!(chain_view(&g, vec![vec![0, 1], vec![2]], 1.0).is_err());
    }

    #[test]
    fn disconnected_classes_give_empty_view() {
        let g = Arc::new(Graph::from_edges(6, [(0, 1), (3, 4)]).unwrap());
        let c = chain_view(&g, vec![vec![0, 1, 2], vec![3, 4, 5]], 0.5).unwrap();
        assert_eq!(c.edge_count(), 0);
    }

    #[test]
    fn masked_count_matches_recount_in_gnp() {
        let g = Arc::new(Graph::gnp(300, 0.2, 11).unwrap());
        let mut perm: Vec<Vertex> = (0..300).collect();
        perm.shuffle(&mut seeded_rng(2));
        let classes: Vec<Vec<Vertex>> = perm.chunks(50).take(5).map(|c| c.to_vec()).collect();
        let c = chain_view(&g, classes.clone(), 0.2).unwrap();
        let mut brute = 0;
        for i in 0..5 {
            for j in i + 1..(i + 3).min(5) {
                for &u in &classes[i] {
                    for &v in &classes[j] {
                        brute += g.has_edge(u, v) as usize;
                    }
                }
            }
        }
        assert_eq!(c.edge_count(), brute);
        let pair: usize = classes[1]
            .iter()
            .map(|&u| classes[2].iter().filter(|&&v| g.has_edge(u, v)).count())
            .sum();
        assert_eq!(c.pair_edge_count(1), pair);
        assert_eq!(c.pair_edges(1).len(), pair);
    }

    #[test]
    fn reversal_and_snapshot_round_trip() {
        let c = build_chain_random(4, 70, 0.3, 5).unwrap();
        let r = c.reversed();
        assert_eq!(r.class(0), c.class(3));
        assert_eq!(r.surviving_edges(), c.surviving_edges());
        assert_eq!(r.reversed().surviving_edges(), c.surviving_edges());
        assert_eq!(r.pair_edge_count(0), c.pair_edge_count(2));
        let snap = c.snapshot();
        let json = serde_json::to_string(&snap).unwrap();
        let back: ChainSnapshot = serde_json::from_str(&json).unwrap();
        let rebuilt = ChainPartition::from_snapshot(Arc::clone(c.source()), &back).unwrap();
        assert_eq!(rebuilt.surviving_edges(), c.surviving_edges());
    }

    #[test]
    fn word_helpers() {
        let words = [0b1011usize, 1];
        assert_eq!(ones(&words).collect::<Vec<_>>(), vec![0, 1, 3, WORD]);
        assert_eq!(and_count(&[0b110, 1], &[0b011, 1]), 2);
    }
}
