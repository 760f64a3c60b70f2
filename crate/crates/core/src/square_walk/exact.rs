//! Exact branch-and-bound searches over edge states.
//!
//! All searches count visited search nodes against a caller-supplied budget.
//! Running out of budget is reported in the outcome, never as an error: the
//! best object found so far is still a valid certificate, only optimality (or
//! non-existence) is no longer established.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{SquareCycle, SquarePath, MIN_SQUARE_CYCLE_LEN};
use crate::graph::{Graph, Vertex};

#[derive(Clone, Debug)]
pub struct PathSearchOutcome {
    pub path: SquarePath,
    /// `true` when the search space was exhausted, i.e. `path` is maximum.
    pub complete: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "cycle")]
pub enum HamiltonVerdict {
    Found(SquareCycle),
    /// Exhaustive search found no spanning square cycle.
    None,
    /// Node budget ran out first.
    Unknown,
}

impl HamiltonVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            HamiltonVerdict::Found(_) => "yes",
            HamiltonVerdict::None => "none",
            HamiltonVerdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CycleSearchOutcome {
    pub verdict: HamiltonVerdict,
    pub nodes: u64,
}

/// Longest square cycle found by [`longest_square_cycle_exact`].
#[derive(Clone, Debug)]
pub struct LongestCycleOutcome {
    pub cycle: Option<SquareCycle>,
    pub complete: bool,
    pub nodes: u64,
}

/// Maximum-cardinality square path by depth-first branch and bound.
///
/// Every oriented edge is tried as a start state and paths are grown at their
/// far end. Children are explored in increasing order of their own onward
/// successor counts. A branch is cut when its length plus the number of unused
/// vertices reachable in the state graph (revisits ignored) cannot beat the
/// incumbent.
pub fn longest_square_path_exact(g: &Graph, node_budget: u64) -> PathSearchOutcome {
    let n = g.n();
    if n == 0 {
        return PathSearchOutcome {
            path: SquarePath::empty(),
            complete: true,
            nodes: 0,
        };
    }
    let mut search = Search::new(g, node_budget);
    search.best = vec![0];
    let mut starts: Vec<(usize, Vertex, Vertex)> = (0..n)
        .flat_map(|u| g.neighbors(u).ones().map(move |v| (u, v)))
        .map(|(u, v)| (g.common_neighbor_count(u, v), u, v))
        .collect();
    starts.sort_unstable();
    for (_, u, v) in starts {
        if search.best.len() == n || search.exhausted {
            break;
        }
        search.push(u);
        search.push(v);
        search.extend_path();
        search.pop();
        search.pop();
    }
    let complete = !search.exhausted;
    PathSearchOutcome {
        path: SquarePath::new(g, search.best).expect("search only stores square paths"),
        complete,
        nodes: search.nodes,
    }
}

/// Searches for a spanning square cycle.
pub fn has_square_hamilton_cycle(g: &Graph, node_budget: u64) -> CycleSearchOutcome {
    let n = g.n();
    let none = |nodes| CycleSearchOutcome {
        verdict: HamiltonVerdict::None,
        nodes,
    };
    if n < MIN_SQUARE_CYCLE_LEN {
        return none(0);
    }
    // Every vertex of a spanning square cycle has four cycle neighbours and
    // lies in a triangle.
    if (0..n).any(|v| g.degree(v) < 4 || !in_triangle(g, v)) {
        return none(0);
    }
    let anchor = (0..n).min_by_key(|&v| (g.degree(v), v)).expect("n > 0");
    let mut search = Search::new(g, node_budget);
    let mut seconds: Vec<Vertex> = g.neighbors(anchor).ones().collect();
    seconds.sort_by_key(|&v| (g.common_neighbor_count(anchor, v), v));
    for v in seconds {
        search.push(anchor);
        search.push(v);
        let found = search.extend_hamilton();
        if found {
            let cycle = SquareCycle::new(g, search.stack.clone()).expect("closure was checked");
            return CycleSearchOutcome {
                verdict: HamiltonVerdict::Found(cycle),
                nodes: search.nodes,
            };
        }
        search.pop();
        search.pop();
        if search.exhausted {
            return CycleSearchOutcome {
                verdict: HamiltonVerdict::Unknown,
                nodes: search.nodes,
            };
        }
    }
    none(search.nodes)
}

/// Longest square cycle (at least [`MIN_SQUARE_CYCLE_LEN`] vertices), `None`
/// if the graph has none. Each cycle is enumerated from its smallest vertex.
pub fn longest_square_cycle_exact(g: &Graph, node_budget: u64) -> LongestCycleOutcome {
    let n = g.n();
    let mut search = Search::new(g, node_budget);
    let mut best: Option<Vec<Vertex>> = None;
    for s in 0..n {
        if search.exhausted {
            break;
        }
        if best.as_ref().is_some_and(|b| b.len() >= n - s) {
            break;
        }
        // Vertices below `s` are excluded by marking them used.
        let mut allowed = FixedBitSet::with_capacity(n);
        allowed.insert_range(s..);
        search.used = FixedBitSet::with_capacity(n);
        search.used.insert_range(..s);
        let mut seconds: Vec<Vertex> = g.neighbors(s).ones().filter(|&v| v > s).collect();
        seconds.sort_unstable();
        for v in seconds {
            search.push(s);
            search.push(v);
            search.extend_cycle(&mut best);
            search.pop();
            search.pop();
            if search.exhausted {
                break;
            }
        }
    }
    let complete = !search.exhausted;
    LongestCycleOutcome {
        cycle: best.map(|b| SquareCycle::new(g, b).expect("closure was checked")),
        complete,
        nodes: search.nodes,
    }
}

fn in_triangle(g: &Graph, v: Vertex) -> bool {
    g.neighbors(v).ones().any(|w| g.common_neighbor_count(v, w) > 0)
}

struct Search<'g> {
    g: &'g Graph,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    stack: Vec<Vertex>,
    used: FixedBitSet,
    best: Vec<Vertex>,
    // Scratch for the reachability bound.
    seen_states: FixedBitSet,
    frontier: Vec<(Vertex, Vertex)>,
}

impl<'g> Search<'g> {
    fn new(g: &'g Graph, budget: u64) -> Self {
        let n = g.n();
        Search {
            g,
            budget,
            nodes: 0,
            exhausted: false,
            stack: Vec::with_capacity(n),
            used: FixedBitSet::with_capacity(n),
            best: Vec::new(),
            seen_states: FixedBitSet::with_capacity(n * n),
            frontier: Vec::new(),
        }
    }

    fn push(&mut self, v: Vertex) {
        self.used.insert(v);
        self.stack.push(v);
    }

    fn pop(&mut self) {
        let v = self.stack.pop().expect("non-empty stack");
        self.used.set(v, false);
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn tail(&self) -> (Vertex, Vertex) {
        let k = self.stack.len();
        (self.stack[k - 2], self.stack[k - 1])
    }

    /// Unused vertices `w ∈ N(x) ∩ N(y)`, ordered by their onward successor
    /// counts (fewest first).
    fn candidates(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let g = self.g;
        let mut c: Vec<(usize, Vertex)> = g
            .neighbors(x)
            .intersection(g.neighbors(y))
            .filter(|&w| !self.used.contains(w))
            .map(|w| (onward_count(g, y, w, &self.used), w))
            .collect();
        c.sort_unstable();
        c.into_iter().map(|(_, w)| w).collect()
    }

    /// Number of unused vertices that appear in some state reachable from
    /// `(x, y)` when vertex reuse is ignored.
    fn reachable_vertices(&mut self, x: Vertex, y: Vertex) -> usize {
        let g = self.g;
        let n = g.n();
        self.seen_states.clear();
        self.frontier.clear();
        let mut reached = FixedBitSet::with_capacity(n);
        self.frontier.push((x, y));
        self.seen_states.insert(x * n + y);
        while let Some((a, b)) = self.frontier.pop() {
            for w in g.neighbors(a).intersection(g.neighbors(b)) {
                if self.used.contains(w) {
                    continue;
                }
                reached.insert(w);
                if !self.seen_states.put(b * n + w) {
                    self.frontier.push((b, w));
                }
            }
        }
        reached.count_ones(..)
    }

    fn extend_path(&mut self) {
        if !self.tick() {
            return;
        }
        if self.stack.len() > self.best.len() {
            self.best.clone_from(&self.stack);
        }
        let n = self.g.n();
        if self.best.len() == n {
            return;
        }
        let (x, y) = self.tail();
        if self.stack.len() + self.reachable_vertices(x, y) <= self.best.len() {
            return;
        }
        for w in self.candidates(x, y) {
            self.push(w);
            self.extend_path();
            self.pop();
            if self.exhausted || self.best.len() == n {
                return;
            }
        }
    }

    /// Grows the stack towards a spanning square cycle; leaves the stack holding
    /// the cycle and returns `true` on success.
    fn extend_hamilton(&mut self) -> bool {
        if !self.tick() {
            return false;
        }
        let g = self.g;
        let n = g.n();
        let len = self.stack.len();
        let (first, second) = (self.stack[0], self.stack[1]);
        if len == n {
            let (x, y) = self.tail();
            return g.has_edge(x, first) && g.has_edge(y, first) && g.has_edge(y, second);
        }
        if !self.hamilton_feasible() {
            return false;
        }
        let (x, y) = self.tail();
        for w in self.candidates(x, y) {
            self.push(w);
            if self.extend_hamilton() {
                return true;
            }
            self.pop();
            if self.exhausted {
                return false;
            }
        }
        false
    }

    /// Necessary conditions for completing the current prefix to a spanning
    /// square cycle.
    fn hamilton_feasible(&self) -> bool {
        let g = self.g;
        let n = g.n();
        let len = self.stack.len();
        let remaining = n - len;
        let (first, second) = (self.stack[0], self.stack[1]);
        let (x, y) = self.tail();
        let mut free = self.used.clone();
        free.toggle_range(..);
        // The first vertex still needs its two predecessors on the cycle and the
        // second vertex its one predecessor.
        let first_free = g.neighbors(first).intersection_count(&free);
        if first_free < remaining.min(2) || g.neighbors(second).intersection_count(&free) < 1 {
            return false;
        }
        let mut open = free.clone();
        for v in [first, second, x, y] {
            open.insert(v);
        }
        free.ones().all(|w| {
            let d = g.neighbors(w).intersection_count(&open);
            d >= 4
        })
    }

    fn extend_cycle(&mut self, best: &mut Option<Vec<Vertex>>) {
        if !self.tick() {
            return;
        }
        let g = self.g;
        let len = self.stack.len();
        let (first, second) = (self.stack[0], self.stack[1]);
        let (x, y) = self.tail();
        if len >= MIN_SQUARE_CYCLE_LEN
            && best.as_ref().is_none_or(|b| b.len() < len)
            && g.has_edge(x, first)
            && g.has_edge(y, first)
            && g.has_edge(y, second)
        {
            *best = Some(self.stack.clone());
        }
        let best_len = best.as_ref().map_or(0, |b| b.len());
        // A longer cycle must keep the first vertex reachable for closing.
        if len + self.reachable_vertices(x, y) <= best_len {
            return;
        }
        for w in self.candidates(x, y) {
            self.push(w);
            self.extend_cycle(best);
            self.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

#[inline]
fn onward_count(g: &Graph, y: Vertex, w: Vertex, used: &FixedBitSet) -> usize {
    g.neighbors(y)
        .as_slice()
        .iter()
        .zip(g.neighbors(w).as_slice())
        .zip(used.as_slice())
        .map(|((a, b), u)| (a & b & !u).count_ones() as usize)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::square_walk::{is_square_cycle, is_square_path};

    const BUDGET: u64 = 50_000_000;

    /// Exhaustive enumeration of vertex sequences by prefix, pruning only on
    /// adjacency. Independent of the edge-state machinery above.
    fn brute_longest(g: &Graph) -> usize {
        fn grow(g: &Graph, seq: &mut Vec<Vertex>, best: &mut usize) {
            *best = (*best).max(seq.len());
            for w in 0..g.n() {
                if seq.contains(&w) {
                    continue;
                }
                let k = seq.len();
                if k >= 1 && !g.has_edge(seq[k - 1], w) {
                    continue;
                }
                if k >= 2 && !g.has_edge(seq[k - 2], w) {
                    continue;
                }
                seq.push(w);
                grow(g, seq, best);
                seq.pop();
            }
        }
        let mut best = 0;
        grow(g, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn longest_path_small_cases() {
        assert_eq!(longest_square_path_exact(&Graph::complete(5), BUDGET).path.len(), 5);
        let c6 = longest_square_path_exact(&Graph::cycle(6), BUDGET);
        assert!(c6.complete);
        assert_eq!(c6.path.len(), 2);
        assert_eq!(longest_square_path_exact(&Graph::empty(3), BUDGET).path.len(), 1);
        assert_eq!(longest_square_path_exact(&Graph::empty(0), BUDGET).path.len(), 0);
    }

    #[test]
    fn longest_path_matches_exhaustive_oracle() {
        for seed in 0..40u64 {
            let n = 6 + (seed % 6) as usize;
            let p = [0.3, 0.5, 0.7][(seed % 3) as usize];
            let g = Graph::gnp(n, p, 1000 + seed).unwrap();
            let out = longest_square_path_exact(&g, BUDGET);
            assert!(out.complete);
            assert!(is_square_path(&g, out.path.vertices()));
            assert_eq!(out.path.len(), brute_longest(&g), "seed {seed}");
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let g = Graph::gnp(40, 0.6, 3).unwrap();
        let out = longest_square_path_exact(&g, 10);
        assert!(!out.complete);
        assert!(out.path.is_valid_in(&g));
    }

    #[test]
    fn hamilton_cycle_on_complete_and_squared_cycles() {
        for n in 5..=12 {
            match has_square_hamilton_cycle(&Graph::complete(n), BUDGET).verdict {
                HamiltonVerdict::Found(c) => assert_eq!(c.len(), n),
                other => panic!("K{n}: {other:?}"),
            }
        }
        let c8 = Graph::square_cycle(8);
        match has_square_hamilton_cycle(&c8, BUDGET).verdict {
            HamiltonVerdict::Found(c) => assert!(is_square_cycle(&c8, c.vertices())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tripartite_templates_have_no_square_hamilton_cycle() {
        for m in 2..=4 {
            let g = Graph::complete_multipartite(&[m, m, m + 1]);
            assert_eq!(has_square_hamilton_cycle(&g, BUDGET).verdict, HamiltonVerdict::None);
        }
    }

    #[test]
    fn small_graphs_have_no_square_cycle() {
        assert_eq!(
            has_square_hamilton_cycle(&Graph::complete(4), BUDGET).verdict,
            HamiltonVerdict::None
        );
        assert!(longest_square_cycle_exact(&Graph::complete(4), BUDGET).cycle.is_none());
    }

    #[test]
    fn longest_cycle_matches_brute_force() {
        fn brute(g: &Graph) -> usize {
            fn grow(g: &Graph, seq: &mut Vec<Vertex>, best: &mut usize) {
                if is_square_cycle(g, seq) {
                    *best = (*best).max(seq.len());
                }
                for w in 0..g.n() {
                    if seq.contains(&w) || w < seq[0] {
                        continue;
                    }
                    let k = seq.len();
                    if !g.has_edge(seq[k - 1], w) || (k >= 2 && !g.has_edge(seq[k - 2], w)) {
                        continue;
                    }
                    seq.push(w);
                    grow(g, seq, best);
                    seq.pop();
                }
            }
            let mut best = 0;
            for s in 0..g.n() {
                grow(g, &mut vec![s], &mut best);
            }
            best
        }
        for seed in 0..20u64 {
            let g = Graph::gnp(9, 0.6, 77 + seed).unwrap();
            let out = longest_square_cycle_exact(&g, BUDGET);
            assert!(out.complete);
            assert_eq!(out.cycle.as_ref().map_or(0, |c| c.len()), brute(&g), "seed {seed}");
        }
    }
}
