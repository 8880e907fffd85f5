//! Single-linkage hierarchy, condensed tree, and excess-of-mass selection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::mst::MstEdge;

/// One row of the condensed tree. Children below `n` are points; cluster ids
/// start at `n` (the root).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub child_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub n_points: usize,
    pub root_lambda: f64,
    pub edges: Vec<CondensedEdge>,
}

impl CondensedTree {
    pub fn root(&self) -> usize {
        self.n_points
    }

    pub fn clusters(&self) -> BTreeSet<usize> {
        let mut c: BTreeSet<usize> = self.edges.iter().map(|e| e.parent).collect();
        c.extend(self.edges.iter().filter(|e| e.child >= self.n_points).map(|e| e.child));
        c.insert(self.root());
        c
    }

    fn birth(&self, cluster: usize) -> f64 {
        if cluster == self.root() {
            return self.root_lambda;
        }
        self.edges
            .iter()
            .find(|e| e.child == cluster)
            .map_or(self.root_lambda, |e| e.lambda)
    }

    fn cluster_children(&self, cluster: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.parent == cluster && e.child >= self.n_points)
            .map(|e| e.child)
            .collect()
    }
}

/// Merge node of the single-linkage dendrogram; ids below `n` are points.
#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

fn single_linkage(mst: &[MstEdge], n: usize) -> Vec<Merge> {
    let mut sorted = mst.to_vec();
    // stable: equal weights keep MST discovery order
    sorted.sort_by(|a, b| a.weight.total_cmp(&b.weight));
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(n - 1);
    for (k, e) in sorted.iter().enumerate() {
        let (a, b) = (uf.find(e.i), uf.find(e.j));
        let node = n + k;
        size[node] = size[a] + size[b];
        uf.parent[a] = node;
        uf.parent[b] = node;
        merges.push(Merge {
            left: a,
            right: b,
            distance: e.weight,
            size: size[node],
        });
    }
    merges
}

fn lambda_of(distance: f64, lambda_max: f64) -> f64 {
    if distance <= 0.0 {
        lambda_max
    } else {
        (1.0 / distance).min(lambda_max)
    }
}

/// Builds the condensed tree from an MST. Children smaller than
/// `min_cluster_size` fall out of their parent as points; a split where both
/// sides are large enough creates two new clusters.
pub fn condense_tree(mst: &[MstEdge], n: usize, min_cluster_size: usize, lambda_max: f64) -> CondensedTree {
    if n < 2 {
        return CondensedTree {
            n_points: n,
            root_lambda: 0.0,
            edges: (0..n)
                .map(|p| CondensedEdge { parent: n, child: p, lambda: lambda_max, child_size: 1 })
                .collect(),
        };
    }
    let merges = single_linkage(mst, n);
    let node_size = |id: usize| if id < n { 1 } else { merges[id - n].size };
    let leaves_of = |id: usize| {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let m = merges[x - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out.sort_unstable();
        out
    };

    let root = 2 * n - 2;
    let root_lambda = lambda_of(merges[root - n].distance, lambda_max);
    let mut relabel = vec![usize::MAX; 2 * n - 1];
    relabel[root] = n;
    let mut next_label = n + 1;
    let mut edges = Vec::with_capacity(n + 16);
    // breadth-first over internal nodes
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        let m = merges[node - n];
        let lambda = lambda_of(m.distance, lambda_max);
        let parent = relabel[node];
        let (ls, rs) = (node_size(m.left), node_size(m.right));
        let big_l = ls >= min_cluster_size;
        let big_r = rs >= min_cluster_size;
        let fall_out = |child: usize, edges: &mut Vec<CondensedEdge>| {
            for p in leaves_of(child) {
                edges.push(CondensedEdge { parent, child: p, lambda, child_size: 1 });
            }
        };
        match (big_l, big_r) {
            (true, true) => {
                for (child, size) in [(m.left, ls), (m.right, rs)] {
                    relabel[child] = next_label;
                    edges.push(CondensedEdge { parent, child: next_label, lambda, child_size: size });
                    next_label += 1;
                    if child >= n {
                        queue.push_back(child);
                    } else {
                        edges.push(CondensedEdge {
                            parent: relabel[child],
                            child,
                            lambda: lambda_max,
                            child_size: 1,
                        });
                    }
                }
            }
            (false, false) => {
                fall_out(m.left, &mut edges);
                fall_out(m.right, &mut edges);
            }
            (true, false) | (false, true) => {
                let (big, small) = if big_l { (m.left, m.right) } else { (m.right, m.left) };
                fall_out(small, &mut edges);
                relabel[big] = parent;
                if big >= n {
                    queue.push_back(big);
                } else {
                    edges.push(CondensedEdge { parent, child: big, lambda: lambda_max, child_size: 1 });
                }
            }
        }
    }
    CondensedTree { n_points: n, root_lambda, edges }
}

/// Stability of each condensed cluster: Σ (λ_exit − λ_birth) · child_size
/// over its rows.
pub fn stabilities(tree: &CondensedTree) -> BTreeMap<usize, f64> {
    let births: BTreeMap<usize, f64> = tree.clusters().into_iter().map(|c| (c, tree.birth(c))).collect();
    let mut out: BTreeMap<usize, f64> = births.keys().map(|&c| (c, 0.0)).collect();
    for e in &tree.edges {
        let b = births[&e.parent];
        *out.get_mut(&e.parent).unwrap() += (e.lambda - b).max(0.0) * e.child_size as f64;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Per point: index into `selected`, or −1 for noise.
    pub labels: Vec<i64>,
    pub selected: Vec<usize>,
    pub stabilities: BTreeMap<usize, f64>,
}

/// Excess-of-mass selection. The root is only eligible when it has no child
/// clusters; in that case it becomes one cluster of the points that leave it
/// above its birth λ, provided there are at least `min_cluster_size` of them.
pub fn extract_clusters(tree: &CondensedTree, min_cluster_size: usize) -> Extraction {
    let n = tree.n_points;
    let root = tree.root();
    let stab = stabilities(tree);
    let clusters = tree.clusters();
    let mut point_parent = vec![root; n];
    let mut point_lambda = vec![0.0; n];
    let mut cluster_parent: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &tree.edges {
        if e.child < n {
            point_parent[e.child] = e.parent;
            point_lambda[e.child] = e.lambda;
        } else {
            cluster_parent.insert(e.child, e.parent);
        }
    }

    if clusters.len() == 1 {
        let members: Vec<usize> = (0..n).filter(|&p| point_lambda[p] > tree.root_lambda).collect();
        let mut labels = vec![-1i64; n];
        if members.len() >= min_cluster_size.max(1) {
            for p in members {
                labels[p] = 0;
            }
            return Extraction { labels, selected: vec![root], stabilities: stab };
        }
        return Extraction { labels, selected: vec![], stabilities: stab };
    }

    let mut selected: BTreeSet<usize> = clusters.iter().copied().filter(|&c| c != root).collect();
    let mut subtree = stab.clone();
    // children always carry larger ids than their parents
    for &c in clusters.iter().rev().filter(|&&c| c != root) {
        let children = tree.cluster_children(c);
        let child_sum: f64 = children.iter().map(|k| subtree[k]).sum();
        if !children.is_empty() && child_sum > stab[&c] {
            selected.remove(&c);
            subtree.insert(c, child_sum);
        } else {
            let mut stack = children;
            while let Some(d) = stack.pop() {
                selected.remove(&d);
                stack.extend(tree.cluster_children(d));
            }
        }
    }

    let index: BTreeMap<usize, i64> = selected.iter().enumerate().map(|(i, &c)| (c, i as i64)).collect();
    let labels = (0..n)
        .map(|p| {
            let mut c = point_parent[p];
            loop {
                if let Some(&l) = index.get(&c) {
                    return l;
                }
                match cluster_parent.get(&c) {
                    Some(&up) => c = up,
                    None => return -1,
                }
            }
        })
        .collect();
    Extraction { labels, selected: selected.into_iter().collect(), stabilities: stab }
}
