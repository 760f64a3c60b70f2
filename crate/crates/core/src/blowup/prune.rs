//! The triangle pruning process and the neighbourhood condition it aims for.

use serde::Serialize;

use super::{and_count, ChainError, ChainPartition};
use crate::graph::BipartitePairView;
use crate::regularity::test_lower_regular;
use crate::rng::derive_seed;

/// Constants of the pruning argument.
///
/// With `β = (α/(4e))³`, `δ_i = (ε_{i−1}/4)⁴/2` and
/// `ε_i = min{δ_i/4, ε_cor(β, δ_i)}` the sequence collapses doubly
/// exponentially (already `δ_4 < 10⁻⁵⁰⁰` for `ε_0 = 0.1`), so it is kept in
/// log space. `ε_cor` is taken as `eps_cor_ratio · δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruneSchedule {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon_0: f64,
    pub eps_cor_ratio: f64,
    /// `ln δ_i` for `i = 1..k−1` (index 0 holds `δ_1`).
    pub ln_delta: Vec<f64>,
    /// `ln ε_i` for `i = 0..k−1`.
    pub ln_epsilon: Vec<f64>,
    /// `m_i = ⌈(1 − ε_i) n0² p0⌉` for `i = 1..k−1`.
    pub m: Vec<u64>,
}

impl PruneSchedule {
    /// Schedule for a chain with `k` classes of size `n0` and density `p0`;
    /// the pairs `1..k−1` of the argument are the consecutive pairs of the
    /// chain.
    pub fn new(k: usize, n0: usize, p0: f64, alpha: f64, epsilon_0: f64, eps_cor_ratio: f64) -> Result<Self, ChainError> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(alpha) || !unit(epsilon_0) || !(eps_cor_ratio > 0.0) || k < 2 {
            return Err(ChainError::InvalidParameter(format!(
                "schedule needs alpha, epsilon_0 in (0,1), eps_cor_ratio > 0, k >= 2 \
                 (got {alpha}, {epsilon_0}, {eps_cor_ratio}, {k})"
            )));
        }
        let beta = (alpha / (4.0 * std::f64::consts::E)).powi(3);
        let mut ln_epsilon = vec![epsilon_0.ln()];
        let mut ln_delta = Vec::with_capacity(k - 1);
        let mut m = Vec::with_capacity(k - 1);
        let n0sq_p0 = (n0 * n0) as f64 * p0;
        for i in 1..k {
            let ln_d = 4.0 * (ln_epsilon[i - 1] - 4f64.ln()) - 2f64.ln();
            let ln_e = (ln_d - 4f64.ln()).min(ln_d + eps_cor_ratio.ln());
            ln_delta.push(ln_d);
            ln_epsilon.push(ln_e);
            m.push(((1.0 - ln_e.exp()) * n0sq_p0).ceil() as u64);
        }
        Ok(PruneSchedule {
            alpha,
            beta,
            epsilon_0,
            eps_cor_ratio,
            ln_delta,
            ln_epsilon,
            m,
        })
    }

    /// `ln(2 δ_i m_i)` for pair `i` (1-based as in the argument).
    pub fn ln_budget(&self, i: usize) -> f64 {
        2f64.ln() + self.ln_delta[i - 1] + (self.m[i - 1] as f64).ln()
    }

    /// Strictly decreasing `ε_0 > δ_1 > ε_1 > ... > δ_{k−1} > ε_{k−1}`.
    pub fn is_strictly_decreasing(&self) -> bool {
        let mut seq = vec![self.ln_epsilon[0]];
        for (d, e) in self.ln_delta.iter().zip(&self.ln_epsilon[1..]) {
            seq.push(*d);
            seq.push(*e);
        }
        seq.windows(2).all(|w| w[0] > w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairPrune {
    /// Consecutive pair `(V_i, V_{i+1})`, 0-based.
    pub pair: usize,
    pub edges_before: usize,
    pub removed: usize,
    pub fraction: f64,
    /// `ln(2 δ m)` for this pair.
    pub ln_budget: f64,
    pub exceeds_budget: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruneReport {
    pub epsilon: f64,
    pub triangle_threshold: f64,
    /// In processing order (last pair first).
    pub pairs: Vec<PairPrune>,
    pub total_removed: usize,
    pub max_fraction: f64,
}

/// For `i = k−3` down to `0`, removes every surviving edge of `(V_i, V_{i+1})`
/// that closes fewer than `(1−ε) n0 p0²` triangles with `V_{i+2}` over the
/// surviving edges. Thresholds within one step are evaluated before any of
/// that step's removals.
pub fn prune_to_gtilde(
    chain: &ChainPartition,
    epsilon: f64,
    schedule: &PruneSchedule,
) -> Result<(ChainPartition, PruneReport), ChainError> {
    let k = chain.k();
    if k < 3 {
        return Err(ChainError::TooFewClasses { min: 3, got: k });
    }
    if schedule.m.len() < k - 2 {
        return Err(ChainError::InvalidParameter(format!("schedule covers {} pairs, chain has {}", schedule.m.len(), k - 2)));
    }
    let p0 = chain.reference_p();
    let mut current = chain.clone();
    let mut pairs = Vec::new();
    let mut threshold = 0.0;
    for i in (0..k - 2).rev() {
        threshold = (1.0 - epsilon) * chain.class(i + 2).len() as f64 * p0 * p0;
        let mut drop = Vec::new();
        let mut before = 0;
        for a in 0..current.class(i).len() {
            let u = current.local_id(i, a);
            for v in current.neighbors_in(u, i + 1) {
                before += 1;
                let t = and_count(current.row(u, i + 2), current.row(v, i + 2));
                if (t as f64) < threshold {
                    drop.push((u, v));
                }
            }
        }
        let ln_budget = schedule.ln_budget(i + 1);
        let removed = drop.len();
        pairs.push(PairPrune {
            pair: i,
            edges_before: before,
            removed,
            fraction: if before == 0 { 0.0 } else { removed as f64 / before as f64 },
            ln_budget,
            exceeds_budget: removed > 0 && (removed as f64).ln() > ln_budget,
        });
        if removed > 0 {
            current = current.with_local_removed(drop);
        }
    }
    let total_removed = pairs.iter().map(|p| p.removed).sum();
    let max_fraction = pairs.iter().map(|p| p.fraction).fold(0.0, f64::max);
    Ok((
        current,
        PruneReport {
            epsilon,
            triangle_threshold: threshold,
            pairs,
            total_removed,
            max_fraction,
        },
    ))
}

/// For each consecutive pair `i ≤ k−3`, the number of surviving edges that
/// close fewer than `(1−ε)|V_{i+2}| p0²` triangles with `V_{i+2}`; all zero
/// exactly when the forward triangle condition holds.
pub fn forward_triangle_deficits(chain: &ChainPartition, epsilon: f64) -> Vec<usize> {
    let p0 = chain.reference_p();
    (0..chain.k().saturating_sub(2))
        .map(|i| {
            let threshold = (1.0 - epsilon) * chain.class(i + 2).len() as f64 * p0 * p0;
            (0..chain.class(i).len())
                .map(|a| {
                    let u = chain.local_id(i, a);
                    chain
                        .neighbors_in(u, i + 1)
                        .filter(|&v| (and_count(chain.row(u, i + 2), chain.row(v, i + 2)) as f64) < threshold)
                        .count()
                })
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassExceptions {
    /// Middle class `V_j`, between `V_{j−1}` and `V_{j+1}`.
    pub class: usize,
    /// Vertices with a neighbourhood outside `(1 ± ε) n0 p0` on either side.
    pub size_exceptions: usize,
    /// Vertices with sizes in range whose neighbourhood pair was refuted by the
    /// sampled lower-regularity test.
    pub regularity_exceptions: usize,
    pub total: usize,
    pub budget: f64,
    pub within_budget: bool,
}

/// Counts, for every middle class `V_j`, the vertices whose neighbourhoods in
/// `V_{j−1}` and `V_{j+1}` have the wrong size or do not span a lower-regular
/// pair (by sampling), against the budget `ε n0`.
pub fn check_gtilde_ii(
    chain: &ChainPartition,
    epsilon: f64,
    reference_p: f64,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<ClassExceptions>, ChainError> {
    let k = chain.k();
    if k < 3 {
        return Err(ChainError::TooFewClasses { min: 3, got: k });
    }
    let local = chain.local();
    let mut out = Vec::new();
    for j in 1..k - 1 {
        let lo = (1.0 - epsilon) * reference_p;
        let hi = (1.0 + epsilon) * reference_p;
        let in_window = |size: usize, side: usize| {
            let s = size as f64;
            s >= lo * side as f64 && s <= hi * side as f64
        };
        let (mut size_exc, mut reg_exc) = (0, 0);
        for a in 0..chain.class(j).len() {
            let v = chain.local_id(j, a);
            let left: Vec<usize> = chain.neighbors_in(v, j - 1).collect();
            let right: Vec<usize> = chain.neighbors_in(v, j + 1).collect();
            if left.is_empty()
                || right.is_empty()
                || !in_window(left.len(), chain.class(j - 1).len())
                || !in_window(right.len(), chain.class(j + 1).len())
            {
                size_exc += 1;
                continue;
            }
            let pair = BipartitePairView::new(local, left, right)?;
            let report = test_lower_regular(&pair, reference_p, epsilon, sample_count, derive_seed(seed, v as u64))
                .map_err(|e| ChainError::InvalidParameter(e.to_string()))?;
            if report.violated() {
                reg_exc += 1;
            }
        }
        let budget = epsilon * chain.class(j).len() as f64;
        let total = size_exc + reg_exc;
        out.push(ClassExceptions {
            class: j,
            size_exceptions: size_exc,
            regularity_exceptions: reg_exc,
            total,
            budget,
            within_budget: total as f64 <= budget,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::build_chain_random;
    use crate::graph::Graph;
    use std::sync::Arc;

    fn schedule(k: usize, n0: usize, p0: f64) -> PruneSchedule {
        PruneSchedule::new(k, n0, p0, 0.1, 0.1 / 3.0, 0.25).unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = PruneSchedule::new(4, 100, 0.5, 0.1, 0.1, 0.25).unwrap();
        let d1 = (0.1f64 / 4.0).powi(4) / 2.0;
        assert!((s.ln_delta[0] - d1.ln()).abs() < 1e-12);
        assert!((s.ln_epsilon[1] - (d1 / 4.0).ln()).abs() < 1e-12);
        assert!((s.beta - (0.1 / (4.0 * std::f64::consts::E)).powi(3)).abs() < 1e-18);
        assert_eq!(s.m[0], 5000);
        assert!(s.is_strictly_decreasing());
        // the tail is far below f64 range yet stays finite in log space
        let long = PruneSchedule::new(8, 100, 0.5, 0.1, 0.1, 0.25).unwrap();
        assert!(long.ln_delta[6].is_finite() && long.ln_delta[6] < -1e4);
        assert!(long.is_strictly_decreasing());
        // a smaller ε_cor takes over from δ/4
        let c = PruneSchedule::new(3, 100, 0.5, 0.1, 0.1, 0.01).unwrap();
        assert!((c.ln_epsilon[1] - (0.01 * d1).ln()).abs() < 1e-9);
        assert!(PruneSchedule::new(3, 10, 0.5, 0.0, 0.1, 0.25).is_err());
    }

    #[test]
    fn complete_chain_loses_nothing() {
        let c = build_chain_random(5, 6, 1.0, 1).unwrap();
        let (p, rep) = prune_to_gtilde(&c, 0.1, &schedule(5, 6, 1.0)).unwrap();
        assert_eq!(rep.total_removed, 0);
        assert_eq!(p.edge_count(), c.edge_count());
        assert_eq!(rep.pairs.iter().map(|x| x.pair).collect::<Vec<_>>(), vec![2, 1, 0]);
    }

    fn complete_chain_edges(k: usize, n0: usize) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..(i + 3).min(k) {
                for a in 0..n0 {
                    for b in 0..n0 {
                        edges.push((i * n0 + a, j * n0 + b));
                    }
                }
            }
        }
        edges
    }

    #[test]
    fn constructed_violation_removes_exactly_that_edge() {
        // k = 5 classes of 4; u ∈ V_2 and v ∈ V_3 see disjoint halves of V_4
        let (k, n0) = (5, 4);
        let (u, v) = (2 * n0, 3 * n0);
        let mut edges = complete_chain_edges(k, n0);
        edges.retain(|&(x, y)| !((x == u && y >= 4 * n0 + 2) || (x == v && y < 4 * n0 + 2 && y >= 4 * n0)));
        let g = Arc::new(Graph::from_edges(k * n0, edges).unwrap());
        let classes = (0..k).map(|i| (i * n0..(i + 1) * n0).collect()).collect();
        let c = ChainPartition::view(g, classes, 1.0).unwrap();
        let (p, rep) = prune_to_gtilde(&c, 0.5, &schedule(k, n0, 1.0)).unwrap();
        assert_eq!(rep.pairs[0].pair, 2);
        assert_eq!(rep.pairs[0].removed, 1);
        assert_eq!(rep.total_removed, 1);
        assert!(!p.has_edge(u, v));
        assert_eq!(p.edge_count(), c.edge_count() - 1);
        assert!(forward_triangle_deficits(&p, 0.5).iter().all(|&d| d == 0));
    }

    #[test]
    fn pruning_is_idempotent_and_meets_the_threshold() {
        for seed in 0..5 {
            let c = build_chain_random(5, 150, 0.3, seed).unwrap();
            let s = schedule(5, 150, 0.3);
            let (p, rep) = prune_to_gtilde(&c, 0.1, &s).unwrap();
            assert!(rep.total_removed > 0);
            assert!(forward_triangle_deficits(&p, 0.1).iter().all(|&d| d == 0));
            let (_, again) = prune_to_gtilde(&p, 0.1, &s).unwrap();
            assert_eq!(again.total_removed, 0);
            // the last pair is never touched
            assert_eq!(p.pair_edge_count(3), c.pair_edge_count(3));
        }
    }

    #[test]
    fn gtilde_ii_on_complete_and_damaged_chains() {
        let c = build_chain_random(4, 8, 1.0, 1).unwrap();
        let ex = check_gtilde_ii(&c, 0.1, 1.0, 20, 3).unwrap();
        assert!(ex.iter().all(|e| e.total == 0), "{ex:?}");
        // isolate vertex 8, the first vertex of V_1
        let n0 = 8;
        let mut edges = complete_chain_edges(4, n0);
        edges.retain(|&(x, y)| x != 8 && y != 8);
        let g = Arc::new(Graph::from_edges(32, edges).unwrap());
        let classes = (0..4).map(|i| (i * n0..(i + 1) * n0).collect()).collect();
        let d = ChainPartition::view(g, classes, 1.0).unwrap();
        // ε = 0.2 keeps the 7-vertex neighbourhoods in V_1 inside the window
        let ex = check_gtilde_ii(&d, 0.2, 1.0, 20, 3).unwrap();
        assert_eq!(ex[0].class, 1);
        assert_eq!(ex[0].size_exceptions, 1);
        assert_eq!(ex[1].total, 0);
    }
}
