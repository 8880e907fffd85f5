//! Core distances, mutual reachability, and Prim's minimum spanning tree over
//! the implicit complete mutual-reachability graph. Prim runs in O(n²) time
//! and O(n) extra memory; no distance matrix is materialized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::PointSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Distance from each point to its k-th nearest other point.
pub(crate) fn core_distances_in(space: &PointSpace, k: usize) -> Result<Vec<f64>> {
    let n = space.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "core distance needs 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| space.distance(i, j)).collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

pub fn mutual_reachability(core_i: f64, core_j: f64, distance: f64) -> f64 {
    core_i.max(core_j).max(distance)
}

/// Prim from point 0. Among equal candidate weights the lowest point index
/// is attached first, and a point keeps its earliest-found best parent.
pub(crate) fn prim_in(space: &PointSpace, core: &[f64]) -> Vec<MstEdge> {
    let n = space.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n < 2 {
        return edges;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let c = current;
        let updates: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&j| !in_tree[j])
            .filter_map(|j| {
                let w = mutual_reachability(core[c], core[j], space.distance(c, j));
                (w < best[j]).then_some((j, w))
            })
            .collect();
        for (j, w) in updates {
            best[j] = w;
            parent[j] = c;
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(MstEdge {
            i: parent[next],
            j: next,
            weight: best[next],
        });
        current = next;
    }
    edges
}
