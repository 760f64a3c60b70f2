//! Counting square paths through a chain.
//!
//! Counts go through a state DP over oriented edges of consecutive pairs, met
//! in the middle so that neither frontier has to span the whole chain. Counts
//! saturate at `u128::MAX`.

use std::collections::HashMap;

use super::{ChainError, ChainPartition};
use crate::square_walk::EdgeState;

type Layer = HashMap<(usize, usize), u128>;

fn local_edge(chain: &ChainPartition, e: EdgeState, pair: usize) -> Result<(usize, usize), ChainError> {
    let ok = chain.class_of(e.first) == Some(pair) && chain.class_of(e.second) == Some(pair + 1) && chain.has_edge(e.first, e.second);
    if !ok {
        return Err(ChainError::NotInPair(e.first, e.second, pair));
    }
    Ok((chain.local_of(e.first).expect("checked"), chain.local_of(e.second).expect("checked")))
}

/// Advances a layer of pair `j` to pair `j + 1`.
fn forward(chain: &ChainPartition, layer: &Layer, j: usize) -> Layer {
    let mut next = Layer::new();
    for (&(a, b), &c) in layer {
        let (ra, rb) = (chain.row(a, j + 2), chain.row(b, j + 2));
        let base = chain.local_id(j + 2, 0);
        let common: Vec<usize> = ra.iter().zip(rb).map(|(x, y)| x & y).collect();
        for w in super::ones(&common) {
            let slot = next.entry((b, base + w)).or_insert(0);
            *slot = slot.saturating_add(c);
        }
    }
    next
}

/// Pulls a layer of pair `j + 1` back to pair `j`.
fn backward(chain: &ChainPartition, layer: &Layer, j: usize) -> Layer {
    let mut prev = Layer::new();
    for (&(b, c), &cnt) in layer {
        let (rb, rc) = (chain.row(b, j), chain.row(c, j));
        let base = chain.local_id(j, 0);
        let common: Vec<usize> = rb.iter().zip(rc).map(|(x, y)| x & y).collect();
        for a in super::ones(&common) {
            let slot = prev.entry((base + a, b)).or_insert(0);
            *slot = slot.saturating_add(cnt);
        }
    }
    prev
}

/// Number of square paths `v_0 … v_{k-1}`, one vertex per class, starting
/// with `e1` on the first pair and ending with `e2` on the last pair.
pub fn count_square_paths_between(chain: &ChainPartition, e1: EdgeState, e2: EdgeState) -> Result<u128, ChainError> {
    let last = chain.k() - 2;
    let s = local_edge(chain, e1, 0)?;
    let t = local_edge(chain, e2, last)?;
    let mid = last / 2;
    let mut f = Layer::from([(s, 1)]);
    for j in 0..mid {
        f = forward(chain, &f, j);
    }
    let mut g = Layer::from([(t, 1)]);
    for j in (mid..last).rev() {
        g = backward(chain, &g, j);
    }
    Ok(f
        .iter()
        .filter_map(|(key, &a)| g.get(key).map(|&b| a.saturating_mul(b)))
        .fold(0u128, u128::saturating_add))
}

/// Number of square paths through the whole chain starting with `e1`.
pub fn count_square_paths_from(chain: &ChainPartition, e1: EdgeState) -> Result<u128, ChainError> {
    let mut f = Layer::from([(local_edge(chain, e1, 0)?, 1)]);
    for j in 0..chain.k() - 2 {
        f = forward(chain, &f, j);
    }
    Ok(f.values().copied().fold(0u128, u128::saturating_add))
}
