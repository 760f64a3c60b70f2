//! Densities, sampled regularity tests and a heuristic equitable partitioner.
//!
//! A pair `(U, W)` is `(ε, p)`-regular when every `U' ⊆ U`, `W' ⊆ W` with
//! `|U'| ≥ ε|U|`, `|W'| ≥ ε|W|` has density within `εp` of the pair density,
//! and `(ε, p)`-lower-regular when every such subpair has density at least
//! `(1 − ε)p`. Certifying either property exactly quantifies over exponentially
//! many subset pairs, so the testers here draw a fixed number of subset pairs and
//! report the first one that breaks the bound. A violation therefore comes with a
//! witness that can be replayed; the absence of one is only evidence.
//!
//! Subset pairs are drawn from a fixed schedule keyed by the sample index:
//! even indices are uniform, odd indices are seeded by a random vertex `u ∈ U`
//! and a vertex `w` of the chosen `W'`, taking `W'` from the neighbours of `u`
//! and `U'` from the neighbours of `w` (or from the non-neighbours, alternately).
//! Every subset still has exactly `⌈ε|U|⌉` resp. `⌈ε|W|⌉` vertices. Uniform
//! samples almost never land inside a small dense or sparse block; the seeded
//! ones do, which is what makes block-structured irregular pairs detectable
//! with a few hundred samples.

use fixedbitset::FixedBitSet;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartitePairView, Graph, GraphError, Vertex};
use crate::rng::{derive_seed, seeded_rng, SeededRng};

pub const DEFAULT_SAMPLE_COUNT: usize = 200;

#[derive(Debug, Error)]
pub enum RegularityError {
    #[error("vertex set is empty")]
    EmptySet,
    #[error("subset of size {size} is below the floor {floor}")]
    Undersized { size: usize, floor: usize },
    #[error("vertex {0} is not on the expected side of the pair")]
    NotInPair(Vertex),
    #[error("target of {target} edges exceeds the {available} edges of the pair")]
    TargetTooLarge { target: usize, available: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An edge density `e(A, B) / (|A||B|)` kept as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Density {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

impl Density {
    fn new(numerator: u64, denominator: u64) -> Self {
        Density {
            numerator,
            denominator,
            value: numerator as f64 / denominator as f64,
        }
    }
}

pub fn density(g: &Graph, a: &[Vertex], b: &[Vertex]) -> Result<Density, RegularityError> {
    if a.is_empty() || b.is_empty() {
        return Err(RegularityError::EmptySet);
    }
    let aset = g.vertex_set(a)?;
    let bset = g.vertex_set(b)?;
    if let Some(v) = aset.intersection(&bset).next() {
        return Err(GraphError::Overlap(v).into());
    }
    Ok(subset_density(g, a, &bset, b.len()))
}

fn subset_density(g: &Graph, a: &[Vertex], bset: &FixedBitSet, b_len: usize) -> Density {
    let edges: usize = a.iter().map(|&u| g.neighbors(u).intersection_count(bset)).sum();
    Density::new(edges as u64, (a.len() * b_len) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMode {
    /// `|d(U', W') − d(U, W)| ≤ εp`.
    TwoSided,
    /// `d(U', W') ≥ (1 − ε)p`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Violated,
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub left: Vec<Vertex>,
    pub right: Vec<Vertex>,
    pub density: Density,
    /// `|d(witness) − d(pair)|` in two-sided mode, `(1 − ε)p − d(witness)` in
    /// lower mode; strictly above the bound whenever reported.
    pub deviation: f64,
    pub sample_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub mode: TestMode,
    pub left_size: usize,
    pub right_size: usize,
    pub density: Density,
    pub reference_p: f64,
    pub epsilon: f64,
    pub samples_drawn: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl RegularityReport {
    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// Subset sizes `⌈ε|U|⌉`, `⌈ε|W|⌉`, clamped to the side sizes.
pub fn subset_floor(epsilon: f64, side: usize) -> usize {
    ((epsilon * side as f64).ceil() as usize).clamp(1, side.max(1))
}

pub fn test_regular(
    pair: &BipartitePairView<'_>,
    reference_p: f64,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<RegularityReport, RegularityError> {
    run_test(pair, reference_p, epsilon, sample_count, seed, TestMode::TwoSided)
}

pub fn test_lower_regular(
    pair: &BipartitePairView<'_>,
    reference_p: f64,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<RegularityReport, RegularityError> {
    run_test(pair, reference_p, epsilon, sample_count, seed, TestMode::Lower)
}

fn run_test(
    pair: &BipartitePairView<'_>,
    reference_p: f64,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
    mode: TestMode,
) -> Result<RegularityReport, RegularityError> {
    if sample_count == 0 {
        return Err(RegularityError::InvalidParameter("sample_count must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(RegularityError::InvalidParameter(format!("epsilon {epsilon} not in (0, 1]")));
    }
    let (left, right) = (pair.left(), pair.right());
    if left.is_empty() || right.is_empty() {
        return Err(RegularityError::EmptySet);
    }
    let g = pair.graph();
    let right_set = g.vertex_set(right)?;
    let left_set = g.vertex_set(left)?;
    let whole = subset_density(g, left, &right_set, right.len());
    let mut sampler = Sampler {
        g,
        left,
        right,
        left_set: &left_set,
        right_set: &right_set,
        su: subset_floor(epsilon, left.len()),
        sw: subset_floor(epsilon, right.len()),
        rng: seeded_rng(seed),
    };
    let mut witness = None;
    let mut drawn = 0;
    for i in 0..sample_count {
        drawn += 1;
        let (u_sub, w_sub) = sampler.draw(i);
        let w_bits = g.vertex_set(&w_sub)?;
        let d = subset_density(g, &u_sub, &w_bits, w_sub.len());
        let deviation = match mode {
            TestMode::TwoSided => (d.value - whole.value).abs(),
            TestMode::Lower => (1.0 - epsilon) * reference_p - d.value,
        };
        let bound = match mode {
            TestMode::TwoSided => epsilon * reference_p,
            TestMode::Lower => 0.0,
        };
        if deviation > bound {
            let (mut l, mut r) = (u_sub, w_sub);
            l.sort_unstable();
            r.sort_unstable();
            witness = Some(Witness {
                left: l,
                right: r,
                density: d,
                deviation,
                sample_index: i,
            });
            break;
        }
    }
    Ok(RegularityReport {
        mode,
        left_size: left.len(),
        right_size: right.len(),
        density: whole,
        reference_p,
        epsilon,
        samples_drawn: drawn,
        verdict: if witness.is_some() {
            Verdict::Violated
        } else {
            Verdict::NoViolationFound
        },
        witness,
    })
}

/// Recomputes a witness's density from the graph alone.
pub fn replay_witness(g: &Graph, witness: &Witness) -> Result<Density, RegularityError> {
    density(g, &witness.left, &witness.right)
}

struct Sampler<'a> {
    g: &'a Graph,
    left: &'a [Vertex],
    right: &'a [Vertex],
    left_set: &'a FixedBitSet,
    right_set: &'a FixedBitSet,
    su: usize,
    sw: usize,
    rng: SeededRng,
}

impl Sampler<'_> {
    fn draw(&mut self, i: usize) -> (Vec<Vertex>, Vec<Vertex>) {
        if i.is_multiple_of(2) {
            let u = pick(&mut self.rng, self.left, self.su);
            let w = pick(&mut self.rng, self.right, self.sw);
            return (u, w);
        }
        let dense = i % 4 == 1;
        let u = self.left[self.rng.gen_range(0..self.left.len())];
        let w_pool = side_pool(self.g, u, self.right, self.right_set, dense);
        let w_sub = pick_padded(&mut self.rng, &w_pool, self.right, self.sw);
        let w = w_sub[self.rng.gen_range(0..w_sub.len())];
        let u_pool = side_pool(self.g, w, self.left, self.left_set, dense);
        let u_sub = pick_padded(&mut self.rng, &u_pool, self.left, self.su);
        (u_sub, w_sub)
    }
}

/// Neighbours (or non-neighbours) of `x` on one side of the pair.
fn side_pool(g: &Graph, x: Vertex, side: &[Vertex], side_set: &FixedBitSet, dense: bool) -> Vec<Vertex> {
    if dense {
        g.neighbors(x).intersection(side_set).collect()
    } else {
        side.iter().copied().filter(|&v| !g.has_edge(x, v)).collect()
    }
}

fn pick(rng: &mut SeededRng, from: &[Vertex], k: usize) -> Vec<Vertex> {
    index::sample(rng, from.len(), k).into_iter().map(|i| from[i]).collect()
}

/// `k` vertices from `pool` if it is large enough, otherwise all of `pool`
/// padded with uniform vertices of `side`.
fn pick_padded(rng: &mut SeededRng, pool: &[Vertex], side: &[Vertex], k: usize) -> Vec<Vertex> {
    if pool.len() >= k {
        return pick(rng, pool, k);
    }
    let mut out = pool.to_vec();
    let mut rest: Vec<Vertex> = side.iter().copied().filter(|v| !pool.contains(v)).collect();
    rest.shuffle(rng);
    out.extend(rest.into_iter().take(k - pool.len()));
    out
}

/// Number of left vertices whose degree into `w_sub` falls below
/// `(1 − ε)|W'|p` (or, with `two_sided`, also above `(1 + ε)|W'|p`).
pub fn degree_exception_count(
    pair: &BipartitePairView<'_>,
    w_sub: &[Vertex],
    reference_p: f64,
    epsilon: f64,
    two_sided: bool,
) -> Result<usize, RegularityError> {
    let g = pair.graph();
    let right = g.vertex_set(pair.right())?;
    for &w in w_sub {
        if !right.contains(w) {
            return Err(RegularityError::NotInPair(w));
        }
    }
    let floor = subset_floor(epsilon, pair.right().len());
    if w_sub.len() < floor {
        return Err(RegularityError::Undersized {
            size: w_sub.len(),
            floor,
        });
    }
    let w_bits = g.vertex_set(w_sub)?;
    let expected = w_sub.len() as f64 * reference_p;
    Ok(pair
        .left()
        .iter()
        .filter(|&&u| {
            let d = g.neighbors(u).intersection_count(&w_bits) as f64;
            d < (1.0 - epsilon) * expected || (two_sided && d > (1.0 + epsilon) * expected)
        })
        .count())
}

/// Deletes `e(pair) − target_m` seeded-random edges of the pair.
pub fn extract_exact_count_subgraph(
    pair: &BipartitePairView<'_>,
    target_m: usize,
    seed: u64,
) -> Result<Graph, RegularityError> {
    let edges = pair.edges();
    if target_m > edges.len() {
        return Err(RegularityError::TargetTooLarge {
            target: target_m,
            available: edges.len(),
        });
    }
    let drop = index::sample(&mut seeded_rng(seed), edges.len(), edges.len() - target_m);
    Ok(pair.graph().without_edges(drop.into_iter().map(|i| edges[i])))
}

/// Exceptional set `V₀` plus `r` disjoint classes of equal size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquitablePartition {
    pub exceptional: Vec<Vertex>,
    pub classes: Vec<Vec<Vertex>>,
}

impl EquitablePartition {
    /// Seeded random partition into `r` classes of size `⌊n / r⌋`; the remainder
    /// goes into the exceptional set.
    pub fn random(n: usize, r: usize, seed: u64) -> Result<Self, RegularityError> {
        if r == 0 || r > n {
            return Err(RegularityError::InvalidParameter(format!("cannot split {n} vertices into {r} classes")));
        }
        let mut perm: Vec<Vertex> = (0..n).collect();
        perm.shuffle(&mut seeded_rng(seed));
        let size = n / r;
        let mut exceptional = perm.split_off(size * r);
        exceptional.sort_unstable();
        let classes = perm
            .chunks(size)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_unstable();
                c
            })
            .collect();
        Ok(EquitablePartition { exceptional, classes })
    }

    pub fn r(&self) -> usize {
        self.classes.len()
    }

    pub fn class_size(&self) -> usize {
        self.classes.first().map_or(0, Vec::len)
    }

    /// Checks disjointness, equal class sizes and coverage of `0..n`.
    pub fn is_valid_for(&self, n: usize) -> bool {
        let size = self.class_size();
        let mut seen = FixedBitSet::with_capacity(n);
        for v in self.classes.iter().flatten().chain(&self.exceptional) {
            if *v >= n || seen.put(*v) {
                return false;
            }
        }
        self.classes.iter().all(|c| c.len() == size) && seen.count_ones(..) == n
    }

    /// Class index of every vertex, `None` for exceptional vertices.
    pub fn class_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, c) in self.classes.iter().enumerate() {
            for &v in c {
                out[v] = Some(i);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionParams {
    pub reference_p: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub sample_count: usize,
    /// Rounds of witness-guided splitting; 0 keeps the random partition.
    pub refinement_rounds: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionOutcome {
    pub partition: EquitablePartition,
    /// For each class the sorted indices of classes forming a dense pair with
    /// no sampled violation.
    pub reduced_adjacency: Vec<Vec<usize>>,
    pub dense_regular_counts: Vec<usize>,
    pub pairs_tested: usize,
    pub pairs_sparse: usize,
    pub pairs_violated: usize,
    pub refinement_rounds_used: usize,
    pub warnings: Vec<String>,
}

/// Random equitable partition with `r = r_min` classes, followed by a density
/// and sampled regularity test of every class pair.
///
/// With `refinement_rounds > 0`, classes touched by a violation are split
/// along its witness and the partition is re-equalised with twice as many
/// classes, as long as that stays within `r_max`.
pub fn partition_heuristic(g: &Graph, params: &PartitionParams, seed: u64) -> Result<PartitionOutcome, RegularityError> {
    if params.r_min > params.r_max || params.r_min == 0 {
        return Err(RegularityError::InvalidParameter(format!(
            "class-count range [{}, {}] is empty",
            params.r_min, params.r_max
        )));
    }
    let n = g.n();
    let mut warnings = Vec::new();
    let need = (params.mu + params.nu) * n as f64 * params.reference_p;
    if (g.min_degree() as f64) < need {
        warnings.push(format!(
            "minimum degree {} is below (mu + nu) n p = {need:.1}",
            g.min_degree()
        ));
    }
    let mut partition = EquitablePartition::random(n, params.r_min, seed)?;
    let mut rounds = 0;
    loop {
        let scan = scan_pairs(g, &partition, params, seed)?;
        let can_refine = rounds < params.refinement_rounds
            && !scan.witnesses.is_empty()
            && partition.r() * 2 <= params.r_max
            && partition.class_size() >= 2;
        if !can_refine {
            let mut out = finish(g, partition, scan, params);
            out.refinement_rounds_used = rounds;
            warnings.append(&mut out.warnings);
            out.warnings = warnings;
            return Ok(out);
        }
        partition = refine(&partition, &scan.witnesses, n);
        rounds += 1;
    }
}

/// Density and sampled regularity test of every class pair of a given
/// partition, without refinement.
pub fn assess_partition(
    g: &Graph,
    partition: EquitablePartition,
    params: &PartitionParams,
    seed: u64,
) -> Result<PartitionOutcome, RegularityError> {
    if !partition.is_valid_for(g.n()) {
        return Err(RegularityError::InvalidParameter("partition is not equitable".into()));
    }
    let scan = scan_pairs(g, &partition, params, seed)?;
    Ok(finish(g, partition, scan, params))
}

fn finish(g: &Graph, partition: EquitablePartition, scan: PairScan, params: &PartitionParams) -> PartitionOutcome {
    let mut warnings = Vec::new();
    let counts: Vec<usize> = scan.adjacency.iter().map(Vec::len).collect();
    let mu_r = params.mu * partition.r() as f64;
    if counts.iter().any(|&c| (c as f64) < mu_r) {
        warnings.push(format!(
            "reduced minimum degree {} is below mu r = {mu_r:.1}",
            counts.iter().min().copied().unwrap_or(0)
        ));
    }
    if partition.exceptional.len() as f64 > params.epsilon * g.n() as f64 {
        warnings.push(format!("exceptional set of {} exceeds epsilon n", partition.exceptional.len()));
    }
    PartitionOutcome {
        partition,
        dense_regular_counts: counts,
        reduced_adjacency: scan.adjacency,
        pairs_tested: scan.tested,
        pairs_sparse: scan.sparse,
        pairs_violated: scan.witnesses.len(),
        refinement_rounds_used: 0,
        warnings,
    }
}

struct PairScan {
    adjacency: Vec<Vec<usize>>,
    witnesses: Vec<Witness>,
    tested: usize,
    sparse: usize,
}

fn scan_pairs(g: &Graph, partition: &EquitablePartition, params: &PartitionParams, seed: u64) -> Result<PairScan, RegularityError> {
    let r = partition.r();
    let mut scan = PairScan {
        adjacency: vec![Vec::new(); r],
        witnesses: Vec::new(),
        tested: 0,
        sparse: 0,
    };
    for i in 0..r {
        for j in i + 1..r {
            let pair = BipartitePairView::new(g, partition.classes[i].clone(), partition.classes[j].clone())?;
            let d = density(g, pair.left(), pair.right())?;
            if d.value < params.alpha * params.reference_p {
                scan.sparse += 1;
                continue;
            }
            scan.tested += 1;
            let pair_seed = derive_seed(seed, (i * r + j) as u64);
            let report = test_regular(&pair, params.reference_p, params.epsilon, params.sample_count, pair_seed)?;
            match report.witness {
                Some(w) => scan.witnesses.push(w),
                None => {
                    scan.adjacency[i].push(j);
                    scan.adjacency[j].push(i);
                }
            }
        }
    }
    Ok(scan)
}

/// Splits every class in two, putting vertices that appear in witnesses first so
/// that witness sets tend to stay together in one half.
fn refine(partition: &EquitablePartition, witnesses: &[Witness], n: usize) -> EquitablePartition {
    let mut hits = vec![0usize; n];
    for w in witnesses {
        for &v in w.left.iter().chain(&w.right) {
            hits[v] += 1;
        }
    }
    let half = partition.class_size() / 2;
    let mut exceptional = partition.exceptional.clone();
    let mut classes = Vec::with_capacity(partition.r() * 2);
    for c in &partition.classes {
        let mut c = c.clone();
        c.sort_by_key(|&v| (std::cmp::Reverse(hits[v]), v));
        let mut a = c[..half].to_vec();
        let mut b = c[half..2 * half].to_vec();
        exceptional.extend_from_slice(&c[2 * half..]);
        a.sort_unstable();
        b.sort_unstable();
        classes.push(a);
        classes.push(b);
    }
    exceptional.sort_unstable();
    EquitablePartition { exceptional, classes }
}
