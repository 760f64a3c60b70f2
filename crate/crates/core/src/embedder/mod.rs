//! The greedy square-cycle embedder.
//!
//! A run goes partition → reduced graph → square Hamilton cycle of the reduced
//! graph → window-by-window extension of a square path through the classes in
//! cycle order → closing through the reserved sets. Every vertex `j` of the
//! result lies in the class at position `j mod r` of the reduced cycle, so a
//! closed result always has a length divisible by `r`.
//!
//! Each window is a [`ChainPartition`] over the current end edge and the
//! unused pools of the next classes; reachability inside it is exact, so a
//! window stalls only when no square path through the pools exists.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::{edge_expansion, ChainError, ChainPartition, Reach};
use crate::graph::{Graph, Vertex};
use crate::regularity::{partition_heuristic, EquitablePartition, PartitionParams, RegularityError};
use crate::rng::{derive_seed, seeded_rng};
use crate::square_walk::{
    has_square_hamilton_cycle, is_square_path, longest_square_cycle_exact, EdgeState, HamiltonVerdict, SquareCycle, SquarePath,
    WalkError,
};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("reduced graph has no edges: {0}")]
    EmptyReduced(String),
    #[error("reduced graph contains no square cycle")]
    NoReducedCycle,
    #[error("no edge between the first two classes of the reduced cycle")]
    NoStartEdge,
    #[error(transparent)]
    Regularity(#[from] RegularityError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AsymptoticRegime,
    DenseSurrogate,
}

impl Mode {
    /// The asymptotic regime needs `p = n^{-1/2 + γ/2} < 1`; any other density
    /// (in particular every `γ ≥ 1`) runs as a dense surrogate.
    pub fn for_density(n: usize, gamma: f64, p: f64) -> Self {
        let regime = (n as f64).powf(-0.5 + gamma / 2.0);
        if regime < 1.0 && (p - regime).abs() <= 1e-9 * regime {
            Mode::AsymptoticRegime
        } else {
            Mode::DenseSurrogate
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::AsymptoticRegime => "asymptotic-regime",
            Mode::DenseSurrogate => "dense-surrogate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    /// Reduced minimum-degree fraction.
    pub mu: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub good_threshold: f64,
    pub reserve_fraction: f64,
    /// Reference density `p` of the host.
    pub reference_p: f64,
    /// Subset fraction used when testing class pairs; `epsilon_prime` itself
    /// would give one-vertex subsets at this scale.
    pub partition_epsilon: f64,
    pub sample_count: usize,
    pub refinement_rounds: usize,
    pub node_budget: u64,
    /// Reached edges tried per window when looking for a good target.
    pub max_candidates: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            gamma: 3.0,
            nu: 0.1,
            alpha: 0.1,
            epsilon: 0.05,
            epsilon_prime: 0.01,
            mu: 2.0 / 3.0,
            r_min: 15,
            r_max: 30,
            good_threshold: 0.51,
            reserve_fraction: 0.05,
            reference_p: 1.0,
            partition_epsilon: 0.25,
            sample_count: 200,
            refinement_rounds: 0,
            node_budget: 2_000_000,
            max_candidates: 50,
        }
    }
}

impl PipelineParams {
    pub fn k0(&self) -> usize {
        (3.0 / self.gamma).ceil() as usize + 4
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: String| Err(EmbedError::Params(m));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must be positive", self.gamma));
        }
        if !(0.0 < self.epsilon_prime && self.epsilon_prime < self.epsilon && self.epsilon < self.nu && self.nu < 1.0) {
            return bad(format!(
                "need 0 < epsilon' < epsilon < nu < 1, got {} / {} / {}",
                self.epsilon_prime, self.epsilon, self.nu
            ));
        }
        let k0 = self.k0();
        if self.r_min < 3 * k0 {
            return bad(format!("r_min = {} is below 3 k0 = {}", self.r_min, 3 * k0));
        }
        if self.r_min > self.r_max {
            return bad(format!("r_min = {} exceeds r_max = {}", self.r_min, self.r_max));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("mu", self.mu),
            ("good_threshold", self.good_threshold),
            ("reserve_fraction", self.reserve_fraction),
            ("reference_p", self.reference_p),
            ("partition_epsilon", self.partition_epsilon),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} = {v} must lie in (0, 1]"));
            }
        }
        if self.sample_count == 0 || self.max_candidates == 0 {
            return bad("sample_count and max_candidates must be positive".into());
        }
        Ok(())
    }

    pub fn partition_params(&self) -> PartitionParams {
        PartitionParams {
            reference_p: self.reference_p,
            epsilon: self.partition_epsilon,
            alpha: self.alpha,
            mu: self.mu,
            nu: self.nu,
            r_min: self.r_min,
            r_max: self.r_max,
            sample_count: self.sample_count,
            refinement_rounds: self.refinement_rounds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedGraph {
    #[serde(skip)]
    pub graph: Graph,
    pub min_degree: usize,
    pub mu_r: f64,
    pub meets_mu: bool,
}

/// The graph on the classes of `partition` with an edge for every pair in
/// `adjacency`.
pub fn reduced_graph(partition: &EquitablePartition, adjacency: &[Vec<usize>], mu: f64) -> Result<ReducedGraph, EmbedError> {
    let r = partition.r();
    if adjacency.len() != r {
        return Err(EmbedError::Params(format!("adjacency has {} rows for {r} classes", adjacency.len())));
    }
    let edges = adjacency
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().filter(move |&&j| i < j).map(move |&j| (i, j)));
    let graph = Graph::from_edges(r, edges).map_err(ChainError::from)?;
    let min_degree = graph.min_degree();
    let mu_r = mu * r as f64;
    Ok(ReducedGraph {
        min_degree,
        mu_r,
        meets_mu: min_degree as f64 >= mu_r,
        graph,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedCycle {
    pub cycle: Option<SquareCycle>,
    pub spanning: bool,
    /// `false` when a node budget ran out, so the result is best-found only.
    pub complete: bool,
    pub nodes: u64,
}

/// Spanning square cycle of a (small) reduced graph by exact search, falling
/// back to the longest square cycle found.
pub fn square_cycle_in_reduced(r_graph: &Graph, node_budget: u64) -> ReducedCycle {
    let ham = has_square_hamilton_cycle(r_graph, node_budget);
    match ham.verdict {
        HamiltonVerdict::Found(c) => ReducedCycle {
            cycle: Some(c),
            spanning: true,
            complete: true,
            nodes: ham.nodes,
        },
        verdict => {
            let longest = longest_square_cycle_exact(r_graph, node_budget);
            ReducedCycle {
                cycle: longest.cycle,
                spanning: false,
                complete: verdict == HamiltonVerdict::None && longest.complete,
                nodes: ham.nodes + longest.nodes,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodEdges {
    pub pair_edges: usize,
    pub examined: usize,
    pub good: Vec<(Vertex, Vertex)>,
    /// Expansion fraction of every examined edge, in examination order.
    pub fractions: Vec<f64>,
    pub good_fraction: f64,
    /// Whether only a sample of the first pair was examined.
    pub extrapolated: bool,
}

/// Expansion of first-pair edges of `window` to its last pair; at most
/// `max_samples` edges are examined, chosen by `seed`.
pub fn classify_good_edges(window: &ChainPartition, threshold: f64, max_samples: usize, seed: u64) -> Result<GoodEdges, EmbedError> {
    let mut edges = window.pair_edges(0);
    let pair_edges = edges.len();
    let extrapolated = pair_edges > max_samples;
    if extrapolated {
        edges.shuffle(&mut seeded_rng(seed));
        edges.truncate(max_samples);
        edges.sort_unstable();
    }
    let mut good = Vec::new();
    let mut fractions = Vec::with_capacity(edges.len());
    for (u, v) in edges {
        let x = edge_expansion(window, EdgeState { first: u, second: v })?;
        if x.fraction >= threshold {
            good.push((u, v));
        }
        fractions.push(x.fraction);
    }
    let examined = fractions.len();
    Ok(GoodEdges {
        pair_edges,
        examined,
        good_fraction: if examined == 0 { 0.0 } else { good.len() as f64 / examined as f64 },
        good,
        fractions,
        extrapolated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowRecord {
    pub index: usize,
    /// Path position of the window's first vertex.
    pub start_position: usize,
    pub t: usize,
    /// Partition class of every window position.
    pub classes: Vec<usize>,
    /// Fraction of the last pair reached from the current end edge.
    pub expansion: f64,
    pub candidates_examined: usize,
    /// Fraction of examined candidates that are good for the next window.
    pub good_fraction: f64,
    pub chosen_edge: (Vertex, Vertex),
    pub chosen_good: bool,
    pub path_length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Some class has fewer than `ε ñ` unused vertices left.
    PoolExhausted,
    /// No square path through the next window's pools.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosingStatus {
    Closed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "vertices")]
pub enum Embedded {
    Cycle(SquareCycle),
    /// Closing failed; the longest square path built, flagged.
    Path(SquarePath),
}

impl Embedded {
    pub fn vertices(&self) -> &[Vertex] {
        match self {
            Embedded::Cycle(c) => c.vertices(),
            Embedded::Path(p) => p.vertices(),
        }
    }

    pub fn is_cycle(&self) -> bool {
        matches!(self, Embedded::Cycle(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingTrace {
    pub mode: Mode,
    pub k0: usize,
    pub r: usize,
    pub class_size: usize,
    pub reserve_size: usize,
    /// Partition classes in reduced-cycle order.
    pub class_order: Vec<usize>,
    pub start_edge: (Vertex, Vertex),
    pub start_backward_expansion: f64,
    pub windows: Vec<WindowRecord>,
    pub stop_reason: StopReason,
    pub path_length_before_closing: usize,
    pub closing: ClosingStatus,
    /// Vertices dropped from the end of the path before closing succeeded.
    pub truncated: usize,
    pub result: Embedded,
    pub length: usize,
    pub flags: Vec<String>,
}

struct State<'a> {
    g: &'a Arc<Graph>,
    order: &'a [usize],
    classes: &'a [Vec<Vertex>],
    used: FixedBitSet,
    reserved: FixedBitSet,
    p: f64,
}

impl State<'_> {
    fn class_at(&self, pos: usize) -> usize {
        self.order[pos % self.order.len()]
    }

    fn pool(&self, pos: usize, with_reserved: bool) -> Vec<Vertex> {
        self.classes[self.class_at(pos)]
            .iter()
            .copied()
            .filter(|&v| !self.used[v] && (with_reserved || !self.reserved[v]))
            .collect()
    }

    /// Chain `{x}, {y}, pools(from..=to)`, optionally followed by `tail`
    /// singletons; `None` when a pool is empty.
    fn chain(&self, x: Vertex, y: Vertex, from: usize, to: usize, with_reserved: bool, tail: &[Vertex], exclude: &[Vertex]) -> Option<ChainPartition> {
        let mut classes = vec![vec![x], vec![y]];
        for pos in from..=to {
            let mut pool = self.pool(pos, with_reserved);
            pool.retain(|v| !exclude.contains(v));
            if pool.is_empty() {
                return None;
            }
            classes.push(pool);
        }
        classes.extend(tail.iter().map(|&v| vec![v]));
        ChainPartition::pooled(self.g.clone(), classes, self.p).ok()
    }
}

fn last_pair_fraction(reach: &Reach<'_>, chain: &ChainPartition) -> f64 {
    let last = reach.last_pair();
    let total = chain.pair_edge_count(last);
    if total == 0 {
        0.0
    } else {
        reach.reached_count(last) as f64 / total as f64
    }
}

/// Embeds a long square cycle following `reduced_cycle` (a cyclic sequence of
/// class indices of `partition`).
pub fn embed_square_cycle(
    g: &Arc<Graph>,
    partition: &EquitablePartition,
    reduced_cycle: &SquareCycle,
    params: &PipelineParams,
    seed: u64,
) -> Result<EmbeddingTrace, EmbedError> {
    params.validate()?;
    let order = reduced_cycle.vertices();
    let r = order.len();
    let k0 = params.k0();
    if r < 3 * k0 {
        return Err(EmbedError::Params(format!("reduced cycle on {r} classes is shorter than 3 k0 = {}", 3 * k0)));
    }
    if !partition.is_valid_for(g.n()) || order.iter().any(|&c| c >= partition.r()) {
        return Err(EmbedError::Params("reduced cycle does not match the partition".into()));
    }
    let n_tilde = partition.class_size();
    let reserve = (params.reserve_fraction * n_tilde as f64).ceil() as usize;
    if reserve == 0 || reserve + 2 > n_tilde {
        return Err(EmbedError::Params(format!("classes of {n_tilde} vertices cannot hold a reserve of {reserve}")));
    }
    let mut rng = seeded_rng(seed);
    let mut flags = Vec::new();
    let mut st = State {
        g,
        order,
        classes: &partition.classes,
        used: FixedBitSet::with_capacity(g.n()),
        reserved: FixedBitSet::with_capacity(g.n()),
        p: params.reference_p,
    };

    // reserves of positions 2..r first; the start edge then fixes part of the
    // first two
    let mut reserved_sets: Vec<Vec<Vertex>> = vec![Vec::new(); r];
    for pos in 2..r {
        let set: Vec<Vertex> = partition.classes[order[pos]].choose_multiple(&mut rng, reserve).copied().collect();
        set.iter().for_each(|&v| st.reserved.insert(v));
        reserved_sets[pos] = set;
    }

    // start edge: expands backwards through the reserves of positions
    // r-1, ..., r-k0
    let mut candidates: Vec<(Vertex, Vertex)> = Vec::new();
    for &s1 in &partition.classes[order[0]] {
        for &s2 in &partition.classes[order[1]] {
            if g.has_edge(s1, s2) {
                candidates.push((s1, s2));
            }
        }
    }
    if candidates.is_empty() {
        return Err(EmbedError::NoStartEdge);
    }
    candidates.shuffle(&mut rng);
    candidates.truncate(params.max_candidates);
    let mut best: Option<((Vertex, Vertex), f64)> = None;
    for &(s1, s2) in &candidates {
        let mut classes = vec![vec![s2], vec![s1]];
        classes.extend((r - k0..r).rev().map(|pos| reserved_sets[pos].clone()));
        let chain = ChainPartition::pooled(g.clone(), classes, st.p)?;
        let reach = Reach::new(&chain, 0, s2, s1)?;
        let f = last_pair_fraction(&reach, &chain);
        if best.is_none_or(|(_, b)| f > b) {
            best = Some(((s1, s2), f));
        }
        if f >= params.good_threshold {
            break;
        }
    }
    let ((s1, s2), start_backward_expansion) = best.expect("non-empty candidates");
    if start_backward_expansion < params.good_threshold {
        flags.push(format!("start edge expands backwards to only {start_backward_expansion:.3}"));
    }
    for (pos, s) in [(0, s1), (1, s2)] {
        let rest: Vec<Vertex> = partition.classes[order[pos]].iter().copied().filter(|&v| v != s).collect();
        let mut set = vec![s];
        set.extend(rest.choose_multiple(&mut rng, reserve - 1).copied());
        set.iter().for_each(|&v| st.reserved.insert(v));
        reserved_sets[pos] = set;
    }
    st.used.insert(s1);
    st.used.insert(s2);

    // extension
    let mut path = vec![s1, s2];
    let mut windows = Vec::new();
    let floor = params.epsilon * n_tilde as f64;
    let t = k0;
    let stop_reason = loop {
        let low = (0..r).any(|pos| (st.pool(pos, false).len() as f64) < floor);
        if low {
            break StopReason::PoolExhausted;
        }
        let m = path.len() - 1;
        let (x, y) = (path[m - 1], path[m]);
        let Some(chain) = st.chain(x, y, m + 1, m + t - 1, false, &[], &[]) else {
            break StopReason::Stalled;
        };
        let reach = Reach::new(&chain, 0, x, y)?;
        let last = reach.last_pair();
        let mut reached = reach.reached_edges(last);
        if reached.is_empty() {
            break StopReason::Stalled;
        }
        let expansion = last_pair_fraction(&reach, &chain);
        reached.shuffle(&mut rng);
        let mut examined = 0;
        let mut good_count = 0;
        let mut chosen: Option<(SquarePath, f64)> = None;
        for &(a, b) in reached.iter().take(params.max_candidates) {
            let cert = reach.certificate(last, a, b).expect("reached edges have certificates");
            examined += 1;
            let segment = &cert.vertices()[2..];
            let next_m = m + t - 1;
            let f = match st.chain(a, b, next_m + 1, next_m + t - 1, false, &[], segment) {
                Some(next) => last_pair_fraction(&Reach::new(&next, 0, a, b)?, &next),
                None => 0.0,
            };
            let good = f >= params.good_threshold;
            good_count += good as usize;
            if chosen.as_ref().is_none_or(|(_, best)| f > *best) {
                chosen = Some((cert, f));
            }
            if good {
                break;
            }
        }
        let (cert, f) = chosen.expect("at least one candidate");
        let new = &cert.vertices()[2..];
        for &v in new {
            assert!(!st.reserved[v] && !st.used[v], "extension touched a reserved or used vertex");
            st.used.insert(v);
        }
        path.extend_from_slice(new);
        assert!(is_square_path(g, &path), "extension broke the square path");
        assert!((k0..=2 * k0).contains(&t));
        let chosen_edge = (path[path.len() - 2], path[path.len() - 1]);
        windows.push(WindowRecord {
            index: windows.len(),
            start_position: m - 1,
            t,
            classes: (m - 1..m + t).map(|pos| st.class_at(pos)).collect(),
            expansion,
            candidates_examined: examined,
            good_fraction: good_count as f64 / examined as f64,
            chosen_edge,
            chosen_good: f >= params.good_threshold,
            path_length: path.len(),
        });
    };
    let path_length_before_closing = path.len();

    // closing: from the end edge through unused and reserved vertices of the
    // rest of the lap back into the start edge
    let mut truncated = 0;
    let limit = 2 * r;
    let result = loop {
        let m = path.len() - 1;
        let (x, y) = (path[m - 1], path[m]);
        let to = m + (r - 1 - m % r);
        let closed = st.chain(x, y, m + 1, to, true, &[s1, s2], &[]).and_then(|chain| {
            let reach = Reach::new(&chain, 0, x, y).ok()?;
            reach.certificate(reach.last_pair(), s1, s2)
        });
        if let Some(cert) = closed {
            let mut seq = path.clone();
            let v = cert.vertices();
            seq.extend_from_slice(&v[2..v.len() - 2]);
            if let Ok(c) = SquareCycle::new(g, seq) {
                break Embedded::Cycle(c);
            }
        }
        if path.len() <= 3 || truncated >= limit {
            flags.push("closing failed; returning the path".into());
            break Embedded::Path(SquarePath::new(g, path.clone())?);
        }
        let v = path.pop().expect("non-empty");
        st.used.set(v, false);
        truncated += 1;
    };
    let (closing, truncated) = match &result {
        Embedded::Cycle(_) => (ClosingStatus::Closed, truncated),
        Embedded::Path(_) => (ClosingStatus::Failed, truncated),
    };
    Ok(EmbeddingTrace {
        mode: Mode::for_density(g.n(), params.gamma, params.reference_p),
        k0,
        r,
        class_size: n_tilde,
        reserve_size: reserve,
        class_order: order.to_vec(),
        start_edge: (s1, s2),
        start_backward_expansion,
        windows,
        stop_reason,
        path_length_before_closing,
        closing,
        truncated,
        length: result.vertices().len(),
        result,
        flags,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineOutcome {
    pub mode: Mode,
    pub n: usize,
    pub r: usize,
    pub reduced_min_degree: usize,
    pub reduced_meets_mu: bool,
    pub reduced_cycle_len: usize,
    pub reduced_spanning: bool,
    pub partition_warnings: Vec<String>,
    pub trace: EmbeddingTrace,
    pub length: usize,
    /// `length / ((1 − ν) n)`.
    pub ratio: f64,
    /// A closed, re-validated square cycle on at least `(1 − ν) n` vertices.
    pub success: bool,
}

/// Partition, reduce, find the reduced square cycle and embed.
pub fn run_pipeline(g: &Graph, params: &PipelineParams, seed: u64) -> Result<PipelineOutcome, EmbedError> {
    params.validate()?;
    let outcome = partition_heuristic(g, &params.partition_params(), derive_seed(seed, 1))?;
    let reduced = reduced_graph(&outcome.partition, &outcome.reduced_adjacency, params.mu)?;
    if reduced.graph.edge_count() == 0 {
        return Err(EmbedError::EmptyReduced(format!(
            "{} of {} class pairs are sparse, {} violated",
            outcome.pairs_sparse,
            outcome.pairs_sparse + outcome.pairs_tested,
            outcome.pairs_violated
        )));
    }
    let rc = square_cycle_in_reduced(&reduced.graph, params.node_budget);
    let cycle = rc.cycle.ok_or(EmbedError::NoReducedCycle)?;
    let host = Arc::new(g.clone());
    let trace = embed_square_cycle(&host, &outcome.partition, &cycle, params, derive_seed(seed, 2))?;
    let length = trace.length;
    let bar = (1.0 - params.nu) * g.n() as f64;
    let success = trace.result.is_cycle() && crate::square_walk::is_square_cycle(g, trace.result.vertices()) && length as f64 >= bar;
    Ok(PipelineOutcome {
        mode: trace.mode,
        n: g.n(),
        r: outcome.partition.r(),
        reduced_min_degree: reduced.min_degree,
        reduced_meets_mu: reduced.meets_mu,
        reduced_cycle_len: cycle.len(),
        reduced_spanning: rc.spanning,
        partition_warnings: outcome.warnings,
        trace,
        length,
        ratio: length as f64 / bar,
        success,
    })
}
