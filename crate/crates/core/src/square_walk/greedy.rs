use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use super::SquarePath;
use crate::graph::{Graph, Vertex};
use crate::rng::seeded_rng;

/// Grows a square path greedily from a seeded random start edge.
///
/// At each step the candidate successors `w ∈ N(x) ∩ N(y)` of the current end
/// state `(x, y)` are scored by the number of onward states over unused vertices
/// reachable within `lookahead_depth` further steps; the best score wins and ties
/// are broken by the seeded generator. When the front end is stuck the path is
/// reversed once and grown from its other end.
pub fn greedy_square_path(g: &Graph, seed: u64, lookahead_depth: usize) -> SquarePath {
    let n = g.n();
    if n == 0 {
        return SquarePath::empty();
    }
    let mut rng = seeded_rng(seed);
    let edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    if edges.is_empty() {
        let v = rng.gen_range(0..n);
        return SquarePath::new(g, vec![v]).expect("single vertex");
    }
    let (a, b) = edges[rng.gen_range(0..edges.len())];
    let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    let mut path = vec![a, b];
    let mut used = FixedBitSet::with_capacity(n);
    used.insert(a);
    used.insert(b);
    for round in 0..2 {
        if round == 1 {
            path.reverse();
        }
        loop {
            let k = path.len();
            let (x, y) = (path[k - 2], path[k - 1]);
            let mut best: Vec<Vertex> = Vec::new();
            let mut best_score = 0usize;
            for w in g.neighbors(x).intersection(g.neighbors(y)) {
                if used.contains(w) {
                    continue;
                }
                used.insert(w);
                let score = lookahead(g, y, w, &mut used, lookahead_depth);
                used.set(w, false);
                if best.is_empty() || score > best_score {
                    best.clear();
                    best.push(w);
                    best_score = score;
                } else if score == best_score {
                    best.push(w);
                }
            }
            let Some(&w) = best.choose(&mut rng) else { break };
            used.insert(w);
            path.push(w);
        }
    }
    SquarePath::new(g, path).expect("greedy extension keeps square-path validity")
}

fn lookahead(g: &Graph, x: Vertex, y: Vertex, used: &mut FixedBitSet, depth: usize) -> usize {
    if depth == 0 {
        return 0;
    }
    let cands: Vec<Vertex> = g
        .neighbors(x)
        .intersection(g.neighbors(y))
        .filter(|&w| !used.contains(w))
        .collect();
    if depth == 1 {
        return cands.len();
    }
    let mut total = cands.len();
    for w in cands {
        used.insert(w);
        total += lookahead(g, y, w, used, depth - 1);
        used.set(w, false);
    }
    total
}
