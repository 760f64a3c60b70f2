//! Triangle expansion and layered reachability of edges through a chain.
//!
//! An edge `(u, v)` of pair `i` reaches `(v, w)` of pair `i + 1` when
//! `w ∈ N(u) ∩ N(v) ∩ V_{i+2}`. Iterating this step gives, for a start edge of
//! the first pair, the set of edges of the last pair at the end of some square
//! path through the chain. Classes are disjoint, so any walk picking one vertex
//! per class is automatically a path; a concrete certificate for any reached
//! edge is recovered by walking the layers backwards.

use serde::Serialize;

use super::{ones, ChainError, ChainPartition};
use crate::graph::Vertex;
use crate::square_walk::{EdgeState, SquarePath};

/// Degree thresholds `s = ln²(n)·n0·p / n^γ` and `s' = 2ε·n0·p0`, always
/// derived from the stored inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionParams {
    pub n: usize,
    pub n0: usize,
    pub p: f64,
    pub p0: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionRegime {
    /// `s_min ≥ s`: at least `|Ṽ| n0 p0² / (2p)` edges.
    LogSquared,
    /// `s_min ≥ s'`: at least `(1−ε)²(|Ṽ| − 5ε n0) n0 p0` edges.
    TwoEpsilon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionBound {
    pub regime: ExpansionRegime,
    pub lower_bound: f64,
}

impl ExpansionParams {
    pub fn s(&self) -> f64 {
        let n = self.n as f64;
        n.ln().powi(2) * self.n0 as f64 * self.p / n.powf(self.gamma)
    }

    pub fn s_prime(&self) -> f64 {
        2.0 * self.epsilon * self.n0 as f64 * self.p0
    }

    /// Lower bound on `△(Ẽ)` for the regime that `s_min` satisfies
    /// (the first one when both do), or `None` below both thresholds.
    pub fn bound(&self, middle: usize, s_min: usize) -> Option<ExpansionBound> {
        let (n0, p0, eps) = (self.n0 as f64, self.p0, self.epsilon);
        let s_min = s_min as f64;
        if s_min >= self.s() {
            Some(ExpansionBound {
                regime: ExpansionRegime::LogSquared,
                lower_bound: middle as f64 * n0 * p0 * p0 / (2.0 * self.p),
            })
        } else if s_min >= self.s_prime() {
            Some(ExpansionBound {
                regime: ExpansionRegime::TwoEpsilon,
                lower_bound: (1.0 - eps).powi(2) * (middle as f64 - 5.0 * eps * n0) * n0 * p0,
            })
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleExpansion {
    /// Edges `(v, w)` of pair `i + 1` closing a triangle with some input edge,
    /// sorted.
    pub edges: Vec<(Vertex, Vertex)>,
    /// `|Ṽ|`: vertices of `V_{i+1}` incident to an input edge.
    pub middle_vertices: usize,
    /// `s = min_{v ∈ Ṽ} deg_Ẽ(v)`.
    pub s_min: usize,
}

/// All edges of `(V_{i+1}, V_{i+2})` forming a triangle with an edge of
/// `edges ⊆ E(V_i, V_{i+1})`. Input edges are `(u, v)` with `u ∈ V_i`.
pub fn triangle_expand(chain: &ChainPartition, i: usize, edges: &[(Vertex, Vertex)]) -> Result<TriangleExpansion, ChainError> {
    if i + 2 >= chain.k() {
        return Err(ChainError::InvalidParameter(format!("pair {i} has no class two steps ahead")));
    }
    if edges.is_empty() {
        return Err(ChainError::EmptyEdgeSet);
    }
    let mut by_middle: Vec<Vec<usize>> = vec![Vec::new(); chain.class(i + 1).len()];
    for &(u, v) in edges {
        let ok = chain.class_of(u) == Some(i) && chain.class_of(v) == Some(i + 1) && chain.has_edge(u, v);
        if !ok {
            return Err(ChainError::NotInPair(u, v, i));
        }
        let lv = chain.local_of(v).expect("checked");
        let lu = chain.local_of(u).expect("checked");
        let bucket = &mut by_middle[lv - chain.local_id(i + 1, 0)];
        if !bucket.contains(&lu) {
            bucket.push(lu);
        }
    }
    let wc = chain.words(i + 2).len();
    let mut out = Vec::new();
    let mut s_min = usize::MAX;
    let mut middle = 0;
    let mut union = vec![0usize; wc];
    for (b, us) in by_middle.iter().enumerate() {
        if us.is_empty() {
            continue;
        }
        middle += 1;
        s_min = s_min.min(us.len());
        union.iter_mut().for_each(|w| *w = 0);
        for &lu in us {
            for (acc, w) in union.iter_mut().zip(chain.row(lu, i + 2)) {
                *acc |= w;
            }
        }
        let lv = chain.local_id(i + 1, b);
        let v = chain.to_global(lv);
        for (acc, w) in union.iter_mut().zip(chain.row(lv, i + 2)) {
            *acc &= w;
        }
        for c in ones(&union) {
            out.push((v, chain.class(i + 2)[c]));
        }
    }
    out.sort_unstable();
    Ok(TriangleExpansion {
        edges: out,
        middle_vertices: middle,
        s_min,
    })
}

/// Layered forward closure from one start edge.
#[derive(Clone, Debug)]
pub struct Reach<'c> {
    chain: &'c ChainPartition,
    first_pair: usize,
    start: (usize, usize),
    /// `layers[t]` holds, for pair `first_pair + t`, one row of words over
    /// `V_{j+1}` per vertex of `V_j`.
    layers: Vec<Vec<usize>>,
}

impl<'c> Reach<'c> {
    /// Closure from `(u, v)`, `u ∈ V_i`, `v ∈ V_{i+1}` (source ids), up to the
    /// last pair of the chain.
    pub fn new(chain: &'c ChainPartition, i: usize, u: Vertex, v: Vertex) -> Result<Self, ChainError> {
        if i + 1 >= chain.k() || chain.class_of(u) != Some(i) || chain.class_of(v) != Some(i + 1) || !chain.has_edge(u, v) {
            return Err(ChainError::NotInPair(u, v, i));
        }
        let (lu, lv) = (chain.local_of(u).expect("checked"), chain.local_of(v).expect("checked"));
        let k = chain.k();
        let mut layers = Vec::with_capacity(k - 1 - i);
        let wc = chain.words(i + 1).len();
        let mut first = vec![0usize; chain.class(i).len() * wc];
        let (a, b) = (lu - chain.local_id(i, 0), lv - chain.local_id(i + 1, 0));
        first[a * wc + b / usize::BITS as usize] |= 1 << (b % usize::BITS as usize);
        layers.push(first);
        for j in i..k - 2 {
            let rows = layers.last().expect("non-empty");
            let wc_cur = chain.words(j + 1).len();
            let wc_next = chain.words(j + 2).len();
            let mut next = vec![0usize; chain.class(j + 1).len() * wc_next];
            for a in 0..chain.class(j).len() {
                let row = &rows[a * wc_cur..(a + 1) * wc_cur];
                if row.iter().all(|&w| w == 0) {
                    continue;
                }
                let na = chain.row(chain.local_id(j, a), j + 2);
                for b in ones(row) {
                    let nb = chain.row(chain.local_id(j + 1, b), j + 2);
                    let out = &mut next[b * wc_next..(b + 1) * wc_next];
                    for ((o, x), y) in out.iter_mut().zip(na).zip(nb) {
                        *o |= x & y;
                    }
                }
            }
            layers.push(next);
        }
        Ok(Reach {
            chain,
            first_pair: i,
            start: (lu, lv),
            layers,
        })
    }

    pub fn last_pair(&self) -> usize {
        self.first_pair + self.layers.len() - 1
    }

    fn rows(&self, pair: usize) -> (&[usize], usize) {
        (&self.layers[pair - self.first_pair], self.chain.words(pair + 1).len())
    }

    pub fn reached_count(&self, pair: usize) -> usize {
        self.rows(pair).0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Reached edges of `pair` as `(u, v)` source ids, `u ∈ V_pair`.
    pub fn reached_edges(&self, pair: usize) -> Vec<(Vertex, Vertex)> {
        let (rows, wc) = self.rows(pair);
        let mut out = Vec::new();
        for a in 0..self.chain.class(pair).len() {
            for b in ones(&rows[a * wc..(a + 1) * wc]) {
                out.push((self.chain.class(pair)[a], self.chain.class(pair + 1)[b]));
            }
        }
        out
    }

    pub fn contains(&self, pair: usize, u: Vertex, v: Vertex) -> bool {
        if pair < self.first_pair || pair > self.last_pair() {
            return false;
        }
        let (Some(lu), Some(lv)) = (self.chain.local_of(u), self.chain.local_of(v)) else {
            return false;
        };
        if self.chain.class_of(u) != Some(pair) || self.chain.class_of(v) != Some(pair + 1) {
            return false;
        }
        let (rows, wc) = self.rows(pair);
        let a = lu - self.chain.local_id(pair, 0);
        let b = lv - self.chain.local_id(pair + 1, 0);
        rows[a * wc + b / usize::BITS as usize] >> (b % usize::BITS as usize) & 1 == 1
    }

    /// A square path from the start edge to the reached edge `(u, v)` of
    /// `pair`, re-validated against the source graph.
    pub fn certificate(&self, pair: usize, u: Vertex, v: Vertex) -> Option<SquarePath> {
        if !self.contains(pair, u, v) {
            return None;
        }
        let chain = self.chain;
        let mut rev = vec![chain.local_of(v)?, chain.local_of(u)?];
        let mut j = pair;
        while j > self.first_pair {
            let (x, y) = (rev[rev.len() - 1], rev[rev.len() - 2]);
            let ax = x - chain.local_id(j, 0);
            let (rows, wc) = self.rows(j - 1);
            let bit = |z: usize| rows[z * wc + ax / usize::BITS as usize] >> (ax % usize::BITS as usize) & 1 == 1;
            let z = ones(chain.row(y, j - 1)).find(|&z| bit(z))?;
            rev.push(chain.local_id(j - 1, z));
            j -= 1;
        }
        debug_assert_eq!((rev[rev.len() - 1], rev[rev.len() - 2]), self.start);
        let seq: Vec<Vertex> = rev.iter().rev().map(|&l| chain.to_global(l)).collect();
        SquarePath::new(chain.source(), seq).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeExpansion {
    pub start: EdgeState,
    pub target_pair: usize,
    pub reached: usize,
    pub target_edges: usize,
    pub fraction: f64,
}

/// Fraction of the surviving edges of the last pair reachable from `e`, an
/// edge of the first pair (`e.first ∈ V_0`).
pub fn edge_expansion(chain: &ChainPartition, e: EdgeState) -> Result<EdgeExpansion, ChainError> {
    let reach = Reach::new(chain, 0, e.first, e.second)?;
    let last = reach.last_pair();
    let reached = reach.reached_count(last);
    let target_edges = chain.pair_edge_count(last);
    Ok(EdgeExpansion {
        start: e,
        target_pair: last,
        reached,
        target_edges,
        fraction: if target_edges == 0 { 0.0 } else { reached as f64 / target_edges as f64 },
    })
}
