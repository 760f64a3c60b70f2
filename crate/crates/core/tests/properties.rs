//! Property tests over seeded random inputs.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use sqlab_core::adversary::{independent_blocker, neighborhood_wipe, per_vertex_deletion};
use sqlab_core::blowup::{
    build_chain_random, count_square_paths_between, count_square_paths_from, edge_expansion, forward_triangle_deficits, prune_to_gtilde,
    triangle_expand, ChainPartition, PruneSchedule, Reach,
};
use sqlab_core::regularity::{density, extract_exact_count_subgraph, subset_floor, test_lower_regular, test_regular};
use sqlab_core::square_walk::{greedy_square_path, is_square_cycle, is_square_path, longest_square_cycle_exact};
use sqlab_core::{BipartitePairView, EdgeState, Graph};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn blocker_removes_exactly_the_edges_inside_u(n in 2usize..60, p in 0.0f64..=1.0, c in 0.05f64..0.95, seed: u64) {
        let g = Graph::gnp(n, p, seed).unwrap();
        let (h, u) = independent_blocker(&g, c, seed ^ 1).unwrap();
        prop_assert_eq!(u.len(), ((1.0 - c) * n as f64).floor() as usize);
        let in_u: BTreeSet<usize> = u.iter().copied().collect();
        for (a, b) in g.edges() {
            let inside = in_u.contains(&a) && in_u.contains(&b);
            prop_assert_eq!(h.has_edge(a, b), !inside);
        }
        prop_assert!(h.edges().all(|(a, b)| g.has_edge(a, b)));
    }

    #[test]
    fn per_vertex_deletion_respects_every_budget(n in 2usize..80, p in 0.0f64..=1.0, r in 0.0f64..=1.0, seed: u64) {
        let g = Graph::gnp(n, p, seed).unwrap();
        let h = per_vertex_deletion(&g, r, seed).unwrap();
        for v in 0..n {
            let deleted = g.degree(v) - h.degree(v);
            prop_assert!(deleted <= (r * g.degree(v) as f64).floor() as usize);
        }
        prop_assert!(h.edges().all(|(a, b)| g.has_edge(a, b)));
    }

    #[test]
    fn greedy_paths_are_square_paths(n in 0usize..60, p in 0.0f64..=1.0, seed: u64, depth in 0usize..3) {
        let g = Graph::gnp(n, p, seed).unwrap();
        let path = greedy_square_path(&g, seed, depth);
        prop_assert!(is_square_path(&g, path.vertices()));
        prop_assert_eq!(path.is_empty(), n == 0);
    }

    #[test]
    fn extraction_keeps_exactly_the_target(a in 1usize..15, b in 1usize..15, p in 0.0f64..=1.0, frac in 0.0f64..=1.0, seed: u64) {
        let g = Graph::gnp(a + b, p, seed).unwrap();
        let pair = BipartitePairView::new(&g, (0..a).collect(), (a..a + b).collect()).unwrap();
        let m = pair.edge_count();
        let target = (frac * m as f64).floor() as usize;
        let h = extract_exact_count_subgraph(&pair, target, seed).unwrap();
        let after = BipartitePairView::new(&h, (0..a).collect(), (a..a + b).collect()).unwrap();
        prop_assert_eq!(after.edge_count(), target);
        prop_assert!(h.edges().all(|(x, y)| g.has_edge(x, y)));
        // edges outside the pair are untouched
        prop_assert_eq!(g.edge_count() - h.edge_count(), m - target);
        prop_assert!(extract_exact_count_subgraph(&pair, m + 1, seed).is_err());
    }

    #[test]
    fn witnesses_replay_and_shrinking_epsilon_keeps_them(p in 0.1f64..0.9, eps in 0.1f64..0.5, seed: u64) {
        let g = Graph::gnp(80, p, seed).unwrap();
        let pair = BipartitePairView::new(&g, (0..40).collect(), (40..80).collect()).unwrap();
        let rep = test_regular(&pair, p, eps, 50, seed).unwrap();
        if let Some(w) = rep.witness {
            let d = density(&g, &w.left, &w.right).unwrap();
            prop_assert_eq!(d, w.density);
            prop_assert!((d.value - rep.density.value).abs() > eps * p);
            for smaller in [eps / 2.0, eps / 4.0] {
                prop_assert!(w.left.len() >= subset_floor(smaller, 40) && w.right.len() >= subset_floor(smaller, 40));
                prop_assert!(w.deviation > smaller * p);
            }
        }
        let low = test_lower_regular(&pair, p, eps, 50, seed).unwrap();
        if let Some(w) = low.witness {
            prop_assert!(density(&g, &w.left, &w.right).unwrap().value < (1.0 - eps) * p);
        }
    }
}

fn small_chain() -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (3usize..7, 3usize..7, 0.2f64..=1.0, any::<u64>())
}

fn first_pair_edge(chain: &ChainPartition, pick: usize) -> Option<EdgeState> {
    let edges = chain.pair_edges(0);
    (!edges.is_empty()).then(|| {
        let (a, b) = edges[pick % edges.len()];
        EdgeState { first: a, second: b }
    })
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn triangle_expansion_is_monotone((k, n0, p0, seed) in small_chain(), split in 0.0f64..=1.0) {
        let chain = build_chain_random(k, n0, p0, seed).unwrap();
        let edges = chain.pair_edges(0);
        prop_assume!(!edges.is_empty());
        let cut = ((split * edges.len() as f64) as usize).max(1);
        let small: BTreeSet<_> = triangle_expand(&chain, 0, &edges[..cut]).unwrap().edges.into_iter().collect();
        let large: BTreeSet<_> = triangle_expand(&chain, 0, &edges).unwrap().edges.into_iter().collect();
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn reach_shrinks_when_last_pair_edges_are_deleted((k, n0, p0, seed) in small_chain(), pick: usize, drop in 0.0f64..=1.0) {
        let chain = build_chain_random(k, n0, p0, seed).unwrap();
        let Some(e) = first_pair_edge(&chain, pick) else { return Ok(()) };
        let last = k - 2;
        let before = Reach::new(&chain, 0, e.first, e.second).unwrap();
        let last_edges = chain.pair_edges(last);
        let removed: Vec<_> = last_edges.iter().take((drop * last_edges.len() as f64) as usize).copied().collect();
        let thinner = Arc::new(chain.source().without_edges(removed));
        let view = ChainPartition::view(thinner, chain.classes().to_vec(), chain.reference_p()).unwrap();
        let after = Reach::new(&view, 0, e.first, e.second).unwrap();
        let a: BTreeSet<_> = after.reached_edges(last).into_iter().collect();
        let b: BTreeSet<_> = before.reached_edges(last).into_iter().collect();
        prop_assert!(a.is_subset(&b));
        for &(u, v) in a.iter().take(5) {
            let cert = after.certificate(last, u, v).expect("reached edges are certified");
            prop_assert!(is_square_path(view.source(), cert.vertices()));
        }
        let x = edge_expansion(&view, e).unwrap();
        prop_assert_eq!(x.reached, a.len());
    }

    #[test]
    fn counts_sum_to_the_forward_total((k, n0, p0, seed) in small_chain(), pick: usize) {
        let chain = build_chain_random(k, n0, p0, seed).unwrap();
        let Some(e1) = first_pair_edge(&chain, pick) else { return Ok(()) };
        let total: u128 = chain
            .pair_edges(k - 2)
            .into_iter()
            .map(|(a, b)| count_square_paths_between(&chain, e1, EdgeState { first: a, second: b }).unwrap())
            .sum();
        prop_assert_eq!(total, count_square_paths_from(&chain, e1).unwrap());
        // a positive count means the target is reachable
        let reach = Reach::new(&chain, 0, e1.first, e1.second).unwrap();
        prop_assert_eq!(total > 0, reach.reached_count(k - 2) > 0);
    }

    #[test]
    fn pruning_is_idempotent_and_leaves_no_deficits(k in 3usize..6, n0 in 5usize..25, p0 in 0.3f64..=1.0, eps in 0.05f64..0.5, seed: u64) {
        let chain = build_chain_random(k, n0, p0, seed).unwrap();
        let schedule = PruneSchedule::new(k, n0, p0, 0.1, eps / 3.0, 0.25).unwrap();
        let (pruned, report) = prune_to_gtilde(&chain, eps, &schedule).unwrap();
        prop_assert_eq!(report.total_removed, chain.edge_count() - pruned.edge_count());
        prop_assert!(forward_triangle_deficits(&pruned, eps).iter().all(|&d| d == 0));
        let (again, second) = prune_to_gtilde(&pruned, eps, &schedule).unwrap();
        prop_assert_eq!(second.total_removed, 0);
        prop_assert_eq!(again.edge_count(), pruned.edge_count());
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn wiped_vertex_never_lies_on_a_square_cycle(n in 6usize..14, p in 0.3f64..=1.0, seed: u64, v in 0usize..6) {
        let g = neighborhood_wipe(&Graph::gnp(n, p, seed).unwrap(), v).unwrap();
        let out = longest_square_cycle_exact(&g, 1_000_000);
        if let Some(c) = out.cycle {
            prop_assert!(!c.contains(v));
            prop_assert!(is_square_cycle(&g, c.vertices()));
        }
    }
}
