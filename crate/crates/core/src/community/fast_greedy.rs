//! Fast Greedy (Clauset-Newman-Moore) agglomerative modularity optimization.
//!
//! Starts from isolated nodes and repeatedly merges the connected community
//! pair with the largest modularity increase, tracked in a max-heap with lazy
//! invalidation. The returned partition is the cut of the merge sequence with
//! the highest modularity; ties among candidate merges go to the smallest
//! (label_i, label_j) pair.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::projection::SourceGraph;

use super::{densify, Partition};

#[derive(Debug, Clone)]
pub struct FastGreedyRun {
    pub partition: Partition,
    pub modularity: f64,
}

#[derive(Debug, PartialEq)]
struct Candidate {
    dq: f64,
    pair: (usize, usize),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger gain first; among equal gains the smallest pair wins
        self.dq
            .total_cmp(&other.dq)
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn fast_greedy(graph: &SourceGraph) -> FastGreedyRun {
    let n = graph.n_nodes();
    let two_m = 2.0 * graph.total_weight();
    if n == 0 || two_m <= 0.0 {
        let labels: Vec<u32> = (0..n as u32).collect();
        return FastGreedyRun {
            partition: Partition::from_graph_labels(graph, &labels),
            modularity: 0.0,
        };
    }

    // community state; a community keeps the smallest member label
    let mut alive = vec![true; n];
    let mut neighbors: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut degree = vec![0.0; n];
    for (a, b, w) in graph.edges() {
        *neighbors[a].entry(b).or_insert(0.0) += w;
        *neighbors[b].entry(a).or_insert(0.0) += w;
        degree[a] += w;
        degree[b] += w;
    }

    let dq_of = |w_ab: f64, deg_a: f64, deg_b: f64| -> f64 {
        2.0 * (w_ab / two_m - (deg_a / two_m) * (deg_b / two_m))
    };

    let mut heap = BinaryHeap::new();
    for a in 0..n {
        for (&b, &w) in neighbors[a].range(a + 1..) {
            heap.push(Candidate {
                dq: dq_of(w, degree[a], degree[b]),
                pair: (a, b),
            });
        }
    }

    // Q of the all-singletons start
    let mut q: f64 = (0..n).map(|i| -(degree[i] / two_m).powi(2)).sum();
    let mut best_q = q;
    let mut best_step = 0usize;
    let mut merge_log: Vec<(usize, usize)> = Vec::new();

    while let Some(Candidate { dq, pair: (a, b) }) = heap.pop() {
        if !alive[a] || !alive[b] {
            continue;
        }
        let Some(&w_ab) = neighbors[a].get(&b) else {
            continue;
        };
        // stale entry: the pair's gain changed since it was pushed
        let current = dq_of(w_ab, degree[a], degree[b]);
        if current != dq {
            continue;
        }

        // merge b into a (a < b by construction)
        alive[b] = false;
        merge_log.push((a, b));
        q += dq;
        if q > best_q + 1e-15 {
            best_q = q;
            best_step = merge_log.len();
        }

        let b_neighbors: Vec<(usize, f64)> = neighbors[b]
            .iter()
            .filter(|(&x, _)| x != a)
            .map(|(&x, &w)| (x, w))
            .collect();
        neighbors[a].remove(&b);
        neighbors[b].clear();
        for (x, w) in b_neighbors {
            neighbors[x].remove(&b);
            *neighbors[a].entry(x).or_insert(0.0) += w;
            let back = neighbors[a][&x];
            neighbors[x].insert(a, back);
        }
        degree[a] += degree[b];

        for (&x, &w) in &neighbors[a] {
            let pair = (a.min(x), a.max(x));
            heap.push(Candidate {
                dq: dq_of(w, degree[pair.0], degree[pair.1]),
                pair,
            });
        }
    }

    // replay the best prefix
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &merge_log[..best_step] {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        parent[rb.max(ra)] = rb.min(ra);
    }
    let labels: Vec<u32> = (0..n).map(|i| find(&mut parent, i) as u32).collect();
    let partition = Partition::from_graph_labels(graph, &densify(&labels));
    FastGreedyRun {
        partition,
        modularity: best_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity;

    #[test]
    fn single_edge_merges_both_endpoints() {
        let g = SourceGraph::from_weighted_edges(2, &[(0, 1, 1.0)]);
        let run = fast_greedy(&g);
        assert_eq!(run.partition.k(), 1);
        assert_eq!(run.modularity, 0.0);
    }

    #[test]
    fn two_disjoint_triangles_become_two_communities() {
        let g = SourceGraph::from_weighted_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        );
        let run = fast_greedy(&g);
        assert_eq!(run.partition.k(), 2);
        let q = modularity(&g, &run.partition).unwrap();
        assert!((q - run.modularity).abs() < 1e-12);
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reported_modularity_matches_recount() {
        let g = SourceGraph::from_weighted_edges(
            7,
            &[(0, 1, 2.0), (1, 2, 1.0), (2, 0, 1.5), (3, 4, 1.0), (4, 5, 2.0), (5, 6, 1.0), (2, 3, 0.25)],
        );
        let run = fast_greedy(&g);
        let q = modularity(&g, &run.partition).unwrap();
        assert!((q - run.modularity).abs() < 1e-12);
    }

    #[test]
    fn edgeless_graph_stays_singletons() {
        let g = SourceGraph::from_weighted_edges(4, &[]);
        let run = fast_greedy(&g);
        assert_eq!(run.partition.k(), 4);
    }

    #[test]
    fn isolated_node_keeps_its_own_community() {
        let g = SourceGraph::from_weighted_edges(3, &[(0, 1, 1.0)]);
        let run = fast_greedy(&g);
        let p = &run.partition;
        assert_eq!(p.label_of_index(0), p.label_of_index(1));
        assert_ne!(p.label_of_index(2), p.label_of_index(0));
    }
}
