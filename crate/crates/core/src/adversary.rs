//! Edge-deleting adversaries and the lower-bound constructions.
//!
//! The resilience adversary may delete at every vertex at most an `r`-fraction
//! of its incident edges. The remaining constructions show why the results
//! cannot be pushed further: wiping a neighbourhood isolates one vertex from
//! every triangle, a large independent set caps the length of any square path,
//! and the unbalanced complete tripartite graph has high minimum degree but no
//! spanning square cycle.

use fixedbitset::FixedBitSet;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, Vertex};
use crate::rng::seeded_rng;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("fraction {name} = {value} is outside its allowed range")]
    InvalidFraction { name: &'static str, value: f64 },
    #[error("tripartite template needs m >= 1")]
    EmptyTemplate,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Configuration of one adversary, as written under `"adversary"` in
/// experiment configs. Each kind carries exactly its own fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarySpec {
    PerVertexFraction { r: f64, seed: u64 },
    NeighborhoodWipe { target: Vertex },
    IndependentBlocker { c: f64, seed: u64 },
    /// Replaces the input graph by the template on `3m + 1` vertices.
    TripartiteTemplate { m: usize },
}

impl AdversarySpec {
    pub fn label(&self) -> String {
        match self {
            AdversarySpec::PerVertexFraction { r, .. } => format!("per-vertex-fraction(r={r})"),
            AdversarySpec::NeighborhoodWipe { target } => format!("neighborhood-wipe(v={target})"),
            AdversarySpec::IndependentBlocker { c, .. } => format!("independent-blocker(c={c})"),
            AdversarySpec::TripartiteTemplate { m } => format!("tripartite-template(m={m})"),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            AdversarySpec::PerVertexFraction { seed, .. } | AdversarySpec::IndependentBlocker { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Copy of the spec with its seed (if any) replaced, for per-trial reseeding.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self.clone() {
            AdversarySpec::PerVertexFraction { r, .. } => AdversarySpec::PerVertexFraction { r, seed },
            AdversarySpec::IndependentBlocker { c, .. } => AdversarySpec::IndependentBlocker { c, seed },
            other => other,
        }
    }
}

/// Result of applying an [`AdversarySpec`].
#[derive(Clone, Debug)]
pub struct Attack {
    pub graph: Graph,
    pub report: AttackReport,
    /// The independent set of the blocker, sorted.
    pub blocked: Option<Vec<Vertex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub adversary: String,
    pub n: usize,
    pub edges_before: usize,
    pub edges_after: usize,
    pub edges_removed: usize,
    pub min_degree_before: usize,
    pub min_degree_after: usize,
    /// Largest `deleted(v) / deg(v)` over vertices of positive degree.
    pub max_deleted_fraction: f64,
}

pub fn apply(g: &Graph, spec: &AdversarySpec) -> Result<Attack, AdversaryError> {
    let (after, blocked) = match *spec {
        AdversarySpec::PerVertexFraction { r, seed } => (per_vertex_deletion(g, r, seed)?, None),
        AdversarySpec::NeighborhoodWipe { target } => (neighborhood_wipe(g, target)?, None),
        AdversarySpec::IndependentBlocker { c, seed } => {
            let (h, u) = independent_blocker(g, c, seed)?;
            (h, Some(u))
        }
        AdversarySpec::TripartiteTemplate { m } => {
            let t = tripartite_template(m)?;
            let report = report(&spec.label(), &t, &t);
            return Ok(Attack {
                graph: t,
                report,
                blocked: None,
            });
        }
    };
    Ok(Attack {
        report: report(&spec.label(), g, &after),
        graph: after,
        blocked,
    })
}

/// Compares a graph with a spanning subgraph of it.
pub fn report(label: &str, before: &Graph, after: &Graph) -> AttackReport {
    let max_deleted_fraction = (0..before.n())
        .filter(|&v| before.degree(v) > 0)
        .map(|v| (before.degree(v) - after.degree(v)) as f64 / before.degree(v) as f64)
        .fold(0.0, f64::max);
    AttackReport {
        adversary: label.to_string(),
        n: before.n(),
        edges_before: before.edge_count(),
        edges_after: after.edge_count(),
        edges_removed: before.edge_count() - after.edge_count(),
        min_degree_before: before.min_degree(),
        min_degree_after: after.min_degree(),
        max_deleted_fraction,
    }
}

/// Deletes edges in seeded random order, skipping any deletion that would
/// exceed `⌊r·deg(v)⌋` at either endpoint.
pub fn per_vertex_deletion(g: &Graph, r: f64, seed: u64) -> Result<Graph, AdversaryError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(AdversaryError::InvalidFraction { name: "r", value: r });
    }
    let mut budget: Vec<usize> = (0..g.n())
        .map(|v| (r * g.degree(v) as f64).floor() as usize)
        .collect();
    let mut edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    edges.shuffle(&mut seeded_rng(seed));
    let mut removed = Vec::new();
    for (u, v) in edges {
        if budget[u] > 0 && budget[v] > 0 {
            budget[u] -= 1;
            budget[v] -= 1;
            removed.push((u, v));
        }
    }
    Ok(g.without_edges(removed))
}

/// Deletes every edge with both endpoints in `N(target)`.
pub fn neighborhood_wipe(g: &Graph, target: Vertex) -> Result<Graph, AdversaryError> {
    g.check_vertex(target)?;
    let nb: Vec<Vertex> = g.neighbors(target).ones().collect();
    let inside = g.neighbors(target);
    let removed: Vec<(Vertex, Vertex)> = nb
        .iter()
        .flat_map(|&u| {
            g.neighbors(u)
                .intersection(inside)
                .filter(move |&w| w > u)
                .map(move |w| (u, w))
        })
        .collect();
    Ok(g.without_edges(removed))
}

/// Picks a seeded uniform set `U` of `⌊(1−c)n⌋` vertices and deletes all edges
/// inside it. Returns the result and `U` (sorted).
pub fn independent_blocker(g: &Graph, c: f64, seed: u64) -> Result<(Graph, Vec<Vertex>), AdversaryError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(AdversaryError::InvalidFraction { name: "c", value: c });
    }
    let n = g.n();
    let size = ((1.0 - c) * n as f64).floor() as usize;
    let mut blocked = index::sample(&mut seeded_rng(seed), n, size).into_vec();
    blocked.sort_unstable();
    let mut set = FixedBitSet::with_capacity(n);
    for &u in &blocked {
        set.insert(u);
    }
    let removed: Vec<(Vertex, Vertex)> = blocked
        .iter()
        .flat_map(|&u| {
            g.neighbors(u)
                .intersection(&set)
                .filter(move |&w| w > u)
                .map(move |w| (u, w))
        })
        .collect();
    Ok((g.without_edges(removed), blocked))
}

/// The complete tripartite graph with parts `m, m, m + 1`; vertices
/// `0..m`, `m..2m`, `2m..3m+1`.
pub fn tripartite_template(m: usize) -> Result<Graph, AdversaryError> {
    if m == 0 {
        return Err(AdversaryError::EmptyTemplate);
    }
    Ok(Graph::complete_multipartite(&[m, m, m + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::square_walk::{
        has_square_hamilton_cycle, longest_square_cycle_exact, longest_square_path_exact,
        HamiltonVerdict,
    };
    use rand::Rng;

    #[test]
    fn per_vertex_deletion_extremes() {
        let k5 = Graph::complete(5);
        assert_eq!(per_vertex_deletion(&k5, 0.0, 3).unwrap(), k5);
        let h = per_vertex_deletion(&k5, 1.0, 3).unwrap();
        assert!(h.edges().all(|(u, v)| k5.has_edge(u, v)));
        assert!(per_vertex_deletion(&k5, 1.5, 3).is_err());
    }

    #[test]
    fn per_vertex_budget_holds() {
        let g = Graph::gnp(500, 0.2, 1).unwrap();
        let h = per_vertex_deletion(&g, 0.3, 2).unwrap();
        for v in 0..g.n() {
            let deleted = g.degree(v) - h.degree(v);
            assert!(deleted <= (0.3 * g.degree(v) as f64).floor() as usize);
            assert!(g.neighbors(v).is_superset(h.neighbors(v)));
        }
        assert!(report("x", &g, &h).max_deleted_fraction <= 0.3);
    }

    #[test]
    fn wipe_on_k4() {
        let h = neighborhood_wipe(&Graph::complete(4), 0).unwrap();
        assert_eq!(h.edge_count(), 3);
        assert!((1..4).all(|w| h.has_edge(0, w)));
        assert_eq!(neighborhood_wipe(&Graph::empty(5), 2).unwrap(), Graph::empty(5));
    }

    #[test]
    fn wiped_vertex_is_in_no_square_cycle() {
        let g = Graph::gnp(100, 0.3, 5).unwrap();
        let h = neighborhood_wipe(&g, 17).unwrap();
        for w in h.neighbors(17).ones() {
            assert!(h.triangles_of_edge(17, w).unwrap().is_empty());
        }
        let mut rng = seeded_rng(99);
        for _ in 0..20 {
            let mut verts: Vec<Vertex> = vec![17];
            while verts.len() < 12 {
                let v = rng.gen_range(0..100);
                if !verts.contains(&v) {
                    verts.push(v);
                }
            }
            let sub = h.induced_subgraph(&verts).unwrap();
            if let Some(c) = longest_square_cycle_exact(&sub, 10_000_000).cycle {
                assert!(!c.contains(0));
            }
            assert!(!matches!(
                has_square_hamilton_cycle(&sub, 10_000_000).verdict,
                HamiltonVerdict::Found(_)
            ));
        }
    }

    #[test]
    fn blocker_on_k9() {
        let (h, u) = independent_blocker(&Graph::complete(9), 1.0 / 3.0, 4).unwrap();
        assert_eq!(u.len(), 6);
        assert_eq!(Graph::complete(9).edge_count() - h.edge_count(), 15);
        for &a in &u {
            assert_eq!(h.degree(a), 3);
        }
        let best = longest_square_path_exact(&h, 10_000_000);
        assert!(best.complete);
        assert_eq!(best.path.len(), 5);
    }

    #[test]
    fn blocker_on_edgeless_graph() {
        let (h, u) = independent_blocker(&Graph::empty(10), 0.5, 1).unwrap();
        assert_eq!(h, Graph::empty(10));
        assert_eq!(u.len(), 5);
        assert!(independent_blocker(&Graph::empty(3), 0.0, 1).is_err());
    }

    #[test]
    fn tripartite_templates() {
        let t2 = tripartite_template(2).unwrap();
        assert_eq!((t2.n(), t2.min_degree()), (7, 4));
        let t1 = tripartite_template(1).unwrap();
        assert_eq!((t1.n(), t1.edge_count()), (4, 5));
        assert_eq!(tripartite_template(3).unwrap().edge_count(), 33);
        assert!(tripartite_template(0).is_err());
    }

    #[test]
    fn spec_json_shapes() {
        let s: AdversarySpec = serde_json::from_str(r#"{"kind":"per-vertex-fraction","r":0.3,"seed":2}"#).unwrap();
        assert_eq!(s, AdversarySpec::PerVertexFraction { r: 0.3, seed: 2 });
        let w: AdversarySpec = serde_json::from_str(r#"{"kind":"neighborhood-wipe","target":0}"#).unwrap();
        assert_eq!(w, AdversarySpec::NeighborhoodWipe { target: 0 });
        assert!(serde_json::from_str::<AdversarySpec>(r#"{"kind":"neighborhood-wipe","target":0,"r":1}"#).is_err());
        assert!(serde_json::from_str::<AdversarySpec>(r#"{"kind":"meteor"}"#).is_err());
    }

    #[test]
    fn apply_reports_removals() {
        let a = apply(&Graph::complete(4), &AdversarySpec::NeighborhoodWipe { target: 0 }).unwrap();
        assert_eq!(a.report.edges_removed, 3);
        let b = apply(
            &Graph::complete(9),
            &AdversarySpec::IndependentBlocker { c: 1.0 / 3.0, seed: 1 },
        )
        .unwrap();
        assert_eq!(b.report.edges_removed, 15);
        assert_eq!(b.blocked.unwrap().len(), 6);
    }
}
