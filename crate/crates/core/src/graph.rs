//! Immutable simple graphs over dense vertex ids with bitset adjacency.
//!
//! Every downstream operation in this crate is dominated by neighbourhood
//! intersections (triangles through an edge, degrees into a class, common
//! neighbourhoods along a square path), so adjacency is stored as one
//! [`FixedBitSet`] per vertex.

use std::fmt;
use std::io::{self, BufRead, Write};

use fixedbitset::FixedBitSet;
use rand::RngCore;
use thiserror::Error;

use crate::rng::seeded_rng;

/// Dense vertex identifier in `0..n`.
pub type Vertex = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("{{{0}, {1}}} is not an edge")]
    NotAnEdge(Vertex, Vertex),
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(Vertex),
    #[error("malformed graph file at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An undirected simple graph on vertices `0..n`.
///
/// Graphs never change after construction; every deleting operation returns a
/// new graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<FixedBitSet>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adjacency: (0..n).map(|_| FixedBitSet::with_capacity(n)).collect(),
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list. Repeated edges (in either orientation)
    /// are collapsed.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            g.adjacency[u].insert_range(..);
            g.adjacency[u].set(u, false);
        }
        g.edge_count = n * n.saturating_sub(1) / 2;
        g
    }

    /// The plain cycle `0 - 1 - ... - (n-1) - 0`. Requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// The square of the cycle on `n >= 5` vertices in natural order.
    pub fn square_cycle(n: usize) -> Self {
        assert!(n >= 5, "a square cycle needs at least five vertices");
        let edges = (0..n).flat_map(|i| [(i, (i + 1) % n), (i, (i + 2) % n)]);
        Graph::from_edges(n, edges).expect("valid square cycle")
    }

    /// Complete multipartite graph; part `i` occupies a contiguous id range.
    pub fn complete_multipartite(part_sizes: &[usize]) -> Self {
        let n: usize = part_sizes.iter().sum();
        let mut part_of = Vec::with_capacity(n);
        for (i, &s) in part_sizes.iter().enumerate() {
            part_of.extend(std::iter::repeat_n(i, s));
        }
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if part_of[u] != part_of[v] {
                    g.insert_edge(u, v);
                }
            }
        }
        g
    }

    /// Erdős–Rényi `G(n, p)`.
    ///
    /// Pairs `u < v` are visited in lexicographic order and each consumes one
    /// 64-bit draw from a ChaCha8 stream seeded with `seed`; the pair is an edge
    /// iff the draw falls below `p * 2^64`. Only integer comparisons touch the
    /// random stream, so the output is identical on every platform.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        let threshold = BernoulliThreshold::new(p)?;
        let mut rng = seeded_rng(seed);
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if threshold.sample(&mut rng) {
                    g.insert_edge(u, v);
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &FixedBitSet {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].count_ones(..)
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.adjacency[u].contains(v)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// All edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.adjacency[u]
                .ones()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn check_edge(&self, u: Vertex, v: Vertex) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if self.adjacency[u].contains(v) {
            Ok(())
        } else {
            Err(GraphError::NotAnEdge(u, v))
        }
    }

    /// Vertices closing a triangle with the edge `{u, v}`: `N(u) ∩ N(v)`.
    pub fn triangles_of_edge(&self, u: Vertex, v: Vertex) -> Result<Vec<Vertex>, GraphError> {
        self.check_edge(u, v)?;
        Ok(self.adjacency[u].intersection(&self.adjacency[v]).collect())
    }

    /// `|N(u) ∩ N(v)|` without materialising the set. No edge check.
    #[inline]
    pub fn common_neighbor_count(&self, u: Vertex, v: Vertex) -> usize {
        self.adjacency[u].intersection_count(&self.adjacency[v])
    }

    /// `|N(v) ∩ s|`.
    pub fn degree_into(&self, v: Vertex, s: &FixedBitSet) -> Result<usize, GraphError> {
        self.check_vertex(v)?;
        if let Some(bad) = s.ones().find(|&x| x >= self.n) {
            return Err(GraphError::VertexOutOfRange { vertex: bad, n: self.n });
        }
        Ok(self.adjacency[v].intersection_count(s))
    }

    /// Bitset over `0..n` containing exactly `vertices`.
    pub fn vertex_set(&self, vertices: &[Vertex]) -> Result<FixedBitSet, GraphError> {
        let mut set = FixedBitSet::with_capacity(self.n);
        for &v in vertices {
            self.check_vertex(v)?;
            set.insert(v);
        }
        Ok(set)
    }

    /// A copy of this graph with `edges` deleted. Non-edges are ignored.
    pub fn without_edges<I>(&self, edges: I) -> Self
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = self.clone();
        for (u, v) in edges {
            if g.has_edge(u, v) {
                g.adjacency[u].set(v, false);
                g.adjacency[v].set(u, false);
                g.edge_count -= 1;
            }
        }
        g
    }

    /// Induced subgraph on `vertices`; vertex `i` of the result is `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> Result<Graph, GraphError> {
        let mut seen = FixedBitSet::with_capacity(self.n);
        for &v in vertices {
            self.check_vertex(v)?;
            if seen.put(v) {
                return Err(GraphError::Overlap(v));
            }
        }
        let mut g = Graph::empty(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.adjacency[u].contains(v) {
                    g.insert_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    /// Writes the `n m` header followed by one `u v` line per edge, `u < v`,
    /// in lexicographic order.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.n, self.edge_count)?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the text format written by [`Graph::write_text`]. Only the
    /// canonical form is accepted (sorted, `u < v`, no repeats, exact count),
    /// so reading and writing round-trip byte for byte.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, message: &str| GraphError::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing header"))?;
        let header = header?;
        let (n, m) = parse_pair(&header).ok_or_else(|| parse_err(hline, "expected `n m`"))?;
        let mut g = Graph::empty(n);
        let mut last: Option<(usize, usize)> = None;
        for (idx, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (u, v) = parse_pair(&line).ok_or_else(|| parse_err(idx, "expected `u v`"))?;
            if u >= v {
                return Err(parse_err(idx, "edge endpoints must satisfy u < v"));
            }
            if v >= n {
                return Err(parse_err(idx, "vertex id out of range"));
            }
            if last.is_some_and(|prev| prev >= (u, v)) {
                return Err(parse_err(idx, "edges must be sorted and distinct"));
            }
            last = Some((u, v));
            g.insert_edge(u, v);
        }
        if g.edge_count != m {
            return Err(parse_err(
                hline,
                &format!("header declares {m} edges, found {}", g.edge_count),
            ));
        }
        Ok(g)
    }

    pub(crate) fn insert_edge(&mut self, u: Vertex, v: Vertex) {
        if !self.adjacency[u].put(v) {
            self.adjacency[v].insert(u);
            self.edge_count += 1;
        }
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_ascii_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

/// Integer-threshold Bernoulli trial on a 64-bit draw.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BernoulliThreshold {
    threshold: u64,
    always: bool,
}

impl BernoulliThreshold {
    pub(crate) fn new(p: f64) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidProbability(p));
        }
        Ok(BernoulliThreshold {
            // p < 1 keeps the product strictly below 2^64.
            threshold: (p * 18_446_744_073_709_551_616.0) as u64,
            always: p >= 1.0,
        })
    }

    #[inline]
    pub(crate) fn sample<R: RngCore>(&self, rng: &mut R) -> bool {
        let draw = rng.next_u64();
        self.always || draw < self.threshold
    }
}

/// A bipartite view `(left, right)` into a graph with disjoint sides.
#[derive(Clone, Debug)]
pub struct BipartitePairView<'g> {
    graph: &'g Graph,
    left: Vec<Vertex>,
    right: Vec<Vertex>,
}

impl<'g> BipartitePairView<'g> {
    pub fn new(graph: &'g Graph, left: Vec<Vertex>, right: Vec<Vertex>) -> Result<Self, GraphError> {
        let mut seen = FixedBitSet::with_capacity(graph.n());
        for &v in left.iter().chain(&right) {
            graph.check_vertex(v)?;
            if seen.put(v) {
                return Err(GraphError::Overlap(v));
            }
        }
        Ok(BipartitePairView { graph, left, right })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn left(&self) -> &[Vertex] {
        &self.left
    }

    pub fn right(&self) -> &[Vertex] {
        &self.right
    }

    /// Number of edges between the two sides.
    pub fn edge_count(&self) -> usize {
        let right = self.graph.vertex_set(&self.right).expect("validated");
        self.left
            .iter()
            .map(|&u| self.graph.neighbors(u).intersection_count(&right))
            .sum()
    }

    /// The pair's edges as `(left, right)` vertex pairs, ordered by the
    /// position of the left endpoint, then the right one.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for &u in &self.left {
            for &w in &self.right {
                if self.graph.has_edge(u, w) {
                    out.push((u, w));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_triangles(g: &Graph) -> usize {
        let n = g.n();
        let mut t = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        t += 1;
                    }
                }
            }
        }
        t
    }

    fn assert_simple(g: &Graph) {
        let mut degree_sum = 0;
        for v in 0..g.n() {
            assert!(!g.neighbors(v).contains(v), "self-loop at {v}");
            for w in g.neighbors(v).ones() {
                assert!(g.neighbors(w).contains(v), "asymmetric {v}-{w}");
            }
            degree_sum += g.degree(v);
        }
        assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn gnp_extremes() {
        let g = Graph::gnp(5, 0.0, 11).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = Graph::gnp(5, 1.0, 11).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g, Graph::complete(5));
    }

    #[test]
    fn gnp_rejects_bad_probability() {
        assert!(matches!(Graph::gnp(3, 1.5, 0), Err(GraphError::InvalidProbability(_))));
        assert!(matches!(Graph::gnp(3, -0.1, 0), Err(GraphError::InvalidProbability(_))));
        assert!(Graph::gnp(3, f64::NAN, 0).is_err());
    }

    #[test]
    fn gnp_edge_count_concentrates() {
        // Bin(499500, 0.1): mean 49950, sd sqrt(44955).
        let g = Graph::gnp(1000, 0.1, 1).unwrap();
        let sd = (499_500.0f64 * 0.1 * 0.9).sqrt();
        assert!((g.edge_count() as f64 - 49_950.0).abs() <= 4.0 * sd);
        assert_simple(&g);
    }

    #[test]
    fn gnp_is_reproducible() {
        let a = Graph::gnp(200, 0.3, 99).unwrap();
        let b = Graph::gnp(200, 0.3, 99).unwrap();
        let c = Graph::gnp(200, 0.3, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn triangles_of_edge_small_cases() {
        let k3 = Graph::complete(3);
        assert_eq!(k3.triangles_of_edge(0, 1).unwrap(), vec![2]);
        let c4 = Graph::cycle(4);
        assert!(c4.triangles_of_edge(0, 1).unwrap().is_empty());
        assert!(matches!(c4.triangles_of_edge(0, 2), Err(GraphError::NotAnEdge(0, 2))));
    }

    #[test]
    fn triangles_of_edge_matches_brute_force() {
        let g = Graph::gnp(50, 0.5, 7).unwrap();
        let edges: Vec<_> = g.edges().collect();
        for &(u, v) in edges.iter().step_by(edges.len() / 20).take(20) {
            let brute: Vec<_> = (0..g.n())
                .filter(|&w| w != u && w != v && g.has_edge(u, w) && g.has_edge(v, w))
                .collect();
            assert_eq!(g.triangles_of_edge(u, v).unwrap(), brute);
        }
    }

    #[test]
    fn degree_into_cases() {
        let k5 = Graph::complete(5);
        let s = k5.vertex_set(&[1, 2]).unwrap();
        assert_eq!(k5.degree_into(0, &s).unwrap(), 2);
        let e = Graph::empty(5);
        let s = e.vertex_set(&[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(e.degree_into(3, &s).unwrap(), 0);
        assert!(e.degree_into(9, &s).is_err());

        let g = Graph::gnp(200, 0.3, 3).unwrap();
        let members: Vec<_> = (0..200).filter(|v| v % 2 == 1).collect();
        let s = g.vertex_set(&members).unwrap();
        for v in [0, 17, 101, 198] {
            let brute = members.iter().filter(|&&w| g.has_edge(v, w)).count();
            assert_eq!(g.degree_into(v, &s).unwrap(), brute);
        }
    }

    #[test]
    fn text_format_round_trip() {
        let g = Graph::gnp(40, 0.2, 5).unwrap();
        let text = g.to_text();
        let back = Graph::read_text(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
        assert_eq!(Graph::empty(10).to_text(), "10 0\n");
    }

    #[test]
    fn text_format_rejects_noncanonical_input() {
        assert!(Graph::read_text("3 1\n1 0\n".as_bytes()).is_err());
        assert!(Graph::read_text("3 2\n1 2\n0 1\n".as_bytes()).is_err());
        assert!(Graph::read_text("3 2\n0 1\n".as_bytes()).is_err());
        assert!(Graph::read_text("3 1\n0 3\n".as_bytes()).is_err());
        assert!(Graph::read_text("".as_bytes()).is_err());
    }

    #[test]
    fn multipartite_and_square_cycle() {
        let g = Graph::complete_multipartite(&[3, 3, 4]);
        assert_eq!(g.edge_count(), 33);
        let c = Graph::square_cycle(8);
        assert_eq!(c.edge_count(), 16);
        assert!((0..8).all(|v| c.degree(v) == 4));
    }

    #[test]
    fn bipartite_view_rejects_overlap() {
        let g = Graph::complete(6);
        assert!(BipartitePairView::new(&g, vec![0, 1], vec![1, 2]).is_err());
        let view = BipartitePairView::new(&g, vec![0, 1], vec![2, 3, 4]).unwrap();
        assert_eq!(view.edge_count(), 6);
        assert_eq!(view.edges().len(), 6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn generated_graphs_are_simple(n in 0usize..60, p in 0.0f64..=1.0, seed: u64) {
            let g = Graph::gnp(n, p, seed).unwrap();
            assert_simple(&g);
        }

        #[test]
        fn triangle_sum_is_three_times_triangle_count(n in 3usize..=60, p in 0.1f64..0.9, seed: u64) {
            let g = Graph::gnp(n, p, seed).unwrap();
            let mut per_edge = 0;
            for (u, v) in g.edges() {
                let a = g.triangles_of_edge(u, v).unwrap();
                prop_assert_eq!(&a, &g.triangles_of_edge(v, u).unwrap());
                per_edge += a.len();
            }
            prop_assert_eq!(per_edge, 3 * brute_triangles(&g));
        }

        #[test]
        fn text_round_trip(n in 1usize..30, p in 0.0f64..=1.0, seed: u64) {
            let g = Graph::gnp(n, p, seed).unwrap();
            let text = g.to_text();
            let back = Graph::read_text(text.as_bytes()).unwrap();
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
