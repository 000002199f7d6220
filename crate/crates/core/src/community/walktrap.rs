//! Walktrap hierarchical clustering (Pons-Latapy).
//!
//! A t-step random walk induces a distance between vertices,
//! r_ij = sqrt(Σ_k (P^t_ik − P^t_jk)² / d(k)), which drives a Ward-style
//! agglomeration: at every step the adjacent community pair with the smallest
//! Δσ = |C1||C2| / (|C1|+|C2|) · r²(C1,C2) / n is merged. Zero-degree nodes
//! are excluded from the walk matrix and stay as their own leaf components.

use std::collections::{BTreeMap, BTreeSet};

use crate::projection::SourceGraph;

use super::{densify, Dendrogram, Merge, Partition, WorkingGraph};

/// Pairwise walk distances between nodes of positive degree.
pub struct WalkDistances {
    /// original node indices with positive degree, ascending
    pub nodes: Vec<usize>,
    walk_index: BTreeMap<usize, usize>,
    dist: Vec<Vec<f64>>,
}

impl WalkDistances {
    /// Distance between two original node indices; `None` if either node is
    /// outside the walk matrix.
    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        let ia = *self.walk_index.get(&a)?;
        let ib = *self.walk_index.get(&b)?;
        Some(self.dist[ia][ib])
    }
}

struct Walk {
    nodes: Vec<usize>,
    degree: Vec<f64>,
    /// P^t rows, one per walk node
    pt: Vec<Vec<f64>>,
    /// original adjacency restricted to walk indices
    adjacent: Vec<BTreeSet<usize>>,
}

fn walk_setup(graph: &SourceGraph, t: u32) -> Walk {
    assert!(t >= 1, "walk length must be at least 1");
    let n = graph.n_nodes();
    let adj = graph.adjacency();
    let nodes: Vec<usize> = (0..n).filter(|&i| !adj[i].is_empty()).collect();
    let walk_index: BTreeMap<usize, usize> =
        nodes.iter().enumerate().map(|(w, &i)| (i, w)).collect();
    let nw = nodes.len();

    let mut degree = vec![0.0; nw];
    let mut p = vec![vec![0.0; nw]; nw];
    let mut adjacent = vec![BTreeSet::new(); nw];
    for (w, &i) in nodes.iter().enumerate() {
        let d: f64 = adj[i].iter().map(|&(_, w)| w).sum();
        degree[w] = d;
        for &(j, wt) in &adj[i] {
            let wj = walk_index[&j];
            p[w][wj] = wt / d;
            adjacent[w].insert(wj);
        }
    }

    // P^t by repeated multiplication
    let mut pt = p.clone();
    for _ in 1..t {
        let mut next = vec![vec![0.0; nw]; nw];
        for i in 0..nw {
            for k in 0..nw {
                let pik = pt[i][k];
                if pik == 0.0 {
                    continue;
                }
                for j in 0..nw {
                    next[i][j] += pik * p[k][j];
                }
            }
        }
        pt = next;
    }

    Walk {
        nodes,
        degree,
        pt,
        adjacent,
    }
}

fn sq_distance(a: &[f64], b: &[f64], degree: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(degree)
        .map(|((&x, &y), &d)| (x - y) * (x - y) / d)
        .sum()
}

/// The Pons-Latapy vertex distance matrix for diagnostics and tests.
pub fn vertex_distances(graph: &SourceGraph, t: u32) -> WalkDistances {
    let walk = walk_setup(graph, t);
    let nw = walk.nodes.len();
    let mut dist = vec![vec![0.0; nw]; nw];
    for i in 0..nw {
        for j in (i + 1)..nw {
            let d = sq_distance(&walk.pt[i], &walk.pt[j], &walk.degree).sqrt();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let walk_index = walk
        .nodes
        .iter()
        .enumerate()
        .map(|(w, &i)| (i, w))
        .collect();
    WalkDistances {
        nodes: walk.nodes,
        walk_index,
        dist,
    }
}

struct Community {
    size: usize,
    /// mean of member P^t rows
    prob: Vec<f64>,
    adjacent: BTreeSet<usize>,
    height: f64,
}

pub fn walktrap(graph: &SourceGraph, t: u32) -> Dendrogram {
    let n = graph.n_nodes();
    let walk = walk_setup(graph, t);
    let nw = walk.nodes.len();

    // active communities keyed by dendrogram cluster id; leaves use original
    // node indices, merged clusters take ids n, n+1, ...
    let mut active: BTreeMap<usize, Community> = BTreeMap::new();
    for (w, &orig) in walk.nodes.iter().enumerate() {
        active.insert(
            orig,
            Community {
                size: 1,
                prob: walk.pt[w].clone(),
                adjacent: walk.adjacent[w]
                    .iter()
                    .map(|&wj| walk.nodes[wj])
                    .filter(|&j| j != orig)
                    .collect(),
                height: 0.0,
            },
        );
    }

    let mut merges = Vec::new();
    let mut next_id = n;
    loop {
        // smallest Δσ over adjacent pairs; ties to the smallest id pair
        let mut best: Option<(f64, usize, usize)> = None;
        for (&a, ca) in &active {
            for &b in ca.adjacent.range(a + 1..) {
                let cb = &active[&b];
                let r2 = sq_distance(&ca.prob, &cb.prob, &walk.degree);
                let dsigma =
                    (ca.size * cb.size) as f64 / (ca.size + cb.size) as f64 * r2 / nw as f64;
                if best.map(|(d, _, _)| dsigma < d).unwrap_or(true) {
                    best = Some((dsigma, a, b));
                }
            }
        }
        let Some((dsigma, a, b)) = best else { break };

        let ca = active.remove(&a).expect("community a active");
        let cb = active.remove(&b).expect("community b active");
        let size = ca.size + cb.size;
        let prob: Vec<f64> = ca
            .prob
            .iter()
            .zip(&cb.prob)
            .map(|(&pa, &pb)| (ca.size as f64 * pa + cb.size as f64 * pb) / size as f64)
            .collect();
        let mut adjacent: BTreeSet<usize> = ca
            .adjacent
            .union(&cb.adjacent)
            .copied()
            .filter(|&x| x != a && x != b)
            .collect();
        let height = dsigma.max(ca.height).max(cb.height);

        let id = next_id;
        next_id += 1;
        for &x in &adjacent {
            let cx = active.get_mut(&x).expect("adjacent community active");
            cx.adjacent.remove(&a);
            cx.adjacent.remove(&b);
            cx.adjacent.insert(id);
        }
        adjacent = adjacent.into_iter().collect();
        active.insert(
            id,
            Community {
                size,
                prob,
                adjacent,
                height,
            },
        );
        merges.push(Merge {
            left: a,
            right: b,
            height,
            merged: id,
        });
    }

    // leaf order by DFS over the final forest, roots ascending
    let children: BTreeMap<usize, (usize, usize)> = merges
        .iter()
        .map(|m| (m.merged, (m.left, m.right)))
        .collect();
    let mut is_child: BTreeSet<usize> = BTreeSet::new();
    for m in &merges {
        is_child.insert(m.left);
        is_child.insert(m.right);
    }
    let mut roots: Vec<usize> = (0..n).filter(|i| !is_child.contains(i)).collect();
    roots.extend(
        merges
            .iter()
            .map(|m| m.merged)
            .filter(|id| !is_child.contains(id)),
    );
    roots.sort_unstable();
    let mut leaf_order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = roots.into_iter().rev().collect();
    while let Some(id) = stack.pop() {
        match children.get(&id) {
            Some(&(l, r)) => {
                stack.push(r);
                stack.push(l);
            }
            None => leaf_order.push(id),
        }
    }

    Dendrogram {
        n_leaves: n,
        merges,
        leaf_order,
    }
}

/// Replays the merge sequence and returns the cut with maximum modularity,
/// together with that modularity. On a zero-weight graph the singleton
/// partition is returned with modularity 0.
pub fn best_modularity_cut(graph: &SourceGraph, dendrogram: &Dendrogram) -> (Partition, f64) {
    let n = graph.n_nodes();
    assert_eq!(dendrogram.n_leaves, n, "dendrogram does not match graph");
    let singletons: Vec<u32> = (0..n as u32).collect();
    if graph.total_weight() <= 0.0 {
        return (Partition::from_graph_labels(graph, &singletons), 0.0);
    }
    let wg = WorkingGraph::from_source_graph(graph);

    let mut labels: Vec<u32> = singletons.clone();
    let mut best_q = wg.modularity(&labels);
    let mut best_step = 0usize;
    let mut members: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    for (step, m) in dendrogram.merges.iter().enumerate() {
        let left = members.remove(&m.left).expect("left cluster present");
        let right = members.remove(&m.right).expect("right cluster present");
        let mut merged = left;
        merged.extend(right);
        // label space indexed by cluster id; densified per evaluation
        for &node in &merged {
            labels[node] = m.merged as u32;
        }
        members.insert(m.merged, merged);
        let q = wg.modularity(&densify(&labels));
        if q > best_q + 1e-15 {
            best_q = q;
            best_step = step + 1;
        }
    }

    // rebuild the best prefix
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut members: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    for m in &dendrogram.merges[..best_step] {
        let left = members.remove(&m.left).expect("left cluster present");
        let right = members.remove(&m.right).expect("right cluster present");
        let mut merged = left;
        merged.extend(right);
        for &node in &merged {
            labels[node] = m.merged as u32;
        }
        members.insert(m.merged, merged);
    }
    (
        Partition::from_graph_labels(graph, &densify(&labels)),
        best_q,
    )
}
