//! Louvain greedy modularity optimization.
//!
//! Each iteration runs two phases: local moving (every node is offered to its
//! neighbors' communities, taking the best positive modularity gain) and
//! aggregation (communities collapse into macro nodes). The node visiting
//! order is a seeded shuffle per sweep; gain ties go to the lowest community
//! label, which makes runs reproducible under a fixed seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::projection::SourceGraph;

use super::{densify, Partition, WorkingGraph};

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LouvainRun {
    pub partition: Partition,
    pub modularity: f64,
    /// Modularity after every phase-1 sweep, across all levels;
    /// non-decreasing by construction.
    pub sweep_modularity: Vec<f64>,
}

pub fn louvain(graph: &SourceGraph, seed: u64) -> LouvainRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.n_nodes();
    let mut working = WorkingGraph::from_source_graph(graph);
    // labels of original nodes in terms of current macro nodes
    let mut node_to_macro: Vec<u32> = (0..n as u32).collect();
    let mut sweep_modularity = Vec::new();

    loop {
        let (macro_labels, moved) = local_moving(&working, &mut rng, &mut sweep_modularity);
        if !moved {
            break;
        }
        let dense = densify(&macro_labels);
        for l in node_to_macro.iter_mut() {
            *l = dense[*l as usize];
        }
        working = working.aggregate(&dense);
        if working.n() <= 1 {
            break;
        }
    }

    let partition = Partition::from_graph_labels(graph, &node_to_macro);
    let modularity = if working.total > 0.0 {
        WorkingGraph::from_source_graph(graph).modularity(partition.labels())
    } else {
        0.0
    };
    LouvainRun {
        partition,
        modularity,
        sweep_modularity,
    }
}

/// Phase 1: sweeps of single-node moves until a full sweep changes nothing.
/// Returns the macro-node labels and whether any move happened at all.
fn local_moving(
    g: &WorkingGraph,
    rng: &mut ChaCha8Rng,
    sweep_modularity: &mut Vec<f64>,
) -> (Vec<u32>, bool) {
    let n = g.n();
    let two_m = g.total;
    let mut labels: Vec<u32> = (0..n as u32).collect();
    if two_m <= 0.0 {
        return (labels, false);
    }
    // Σ of degrees per community
    let mut sigma_tot: Vec<f64> = g.degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let mut any_move = false;
    let mut prev_q = g.modularity(&labels);

    loop {
        order.shuffle(rng);
        let mut moved_in_sweep = false;
        for &i in &order {
            let current = labels[i] as usize;
            let k_i = g.degree[i];

            // weight from i to each neighboring community
            let mut to_comm: BTreeMap<usize, f64> = BTreeMap::new();
            for (&j, &w) in &g.adj[i] {
                *to_comm.entry(labels[j] as usize).or_insert(0.0) += w;
            }
            to_comm.entry(current).or_insert(0.0);

            // take i out of its community
            sigma_tot[current] -= k_i;

            // gain of inserting i into community c; the self-loop and k_i²
            // terms are shared by every candidate and dropped
            let gain = |c: usize, k_i_c: f64| -> f64 {
                2.0 * k_i_c / two_m - 2.0 * sigma_tot[c] * k_i / (two_m * two_m)
            };

            let stay_gain = gain(current, to_comm[&current]);
            let mut best_comm = current;
            let mut best_gain = stay_gain;
            // ascending label order: the lowest community wins ties
            for (&c, &k_i_c) in &to_comm {
                if c == current {
                    continue;
                }
                let cand = gain(c, k_i_c);
                if cand > best_gain + GAIN_EPS {
                    best_gain = cand;
                    best_comm = c;
                }
            }

            sigma_tot[best_comm] += k_i;
            if best_comm != current {
                labels[i] = best_comm as u32;
                moved_in_sweep = true;
                any_move = true;
            }
        }

        let q = g.modularity(&labels);
        assert!(
            q >= prev_q - 1e-9,
            "modularity decreased during a Louvain sweep: {prev_q} -> {q}"
        );
        sweep_modularity.push(q);
        prev_q = q;
        if !moved_in_sweep {
            break;
        }
    }
    (labels, any_move)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity;

    fn two_cliques_bridged() -> SourceGraph {
        // K4 + K4 joined by one unit edge
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                edges.push((a, b, 1.0));
                edges.push((a + 4, b + 4, 1.0));
            }
        }
        edges.push((3, 4, 1.0));
        SourceGraph::from_weighted_edges(8, &edges)
    }

    #[test]
    fn recovers_two_cliques() {
        let g = two_cliques_bridged();
        let run = louvain(&g, 7);
        let p = &run.partition;
        assert_eq!(p.k(), 2);
        for i in 1..4 {
            assert_eq!(p.label_of_index(i), p.label_of_index(0));
            assert_eq!(p.label_of_index(i + 4), p.label_of_index(4));
        }
        assert_ne!(p.label_of_index(0), p.label_of_index(4));
        assert!((modularity(&g, p).unwrap() - run.modularity).abs() < 1e-12);
    }

    #[test]
    fn edgeless_graph_yields_singletons() {
        let g = SourceGraph::from_weighted_edges(5, &[]);
        let run = louvain(&g, 0);
        assert_eq!(run.partition.k(), 5);
        assert_eq!(run.modularity, 0.0);
        assert!(run.sweep_modularity.is_empty());
    }

    #[test]
    fn sweeps_never_decrease_modularity() {
        let g = two_cliques_bridged();
        let run = louvain(&g, 42);
        for w in run.sweep_modularity.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let g = two_cliques_bridged();
        let a = louvain(&g, 123);
        let b = louvain(&g, 123);
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.sweep_modularity, b.sweep_modularity);
    }

    #[test]
    fn complete_graph_collapses_to_one_community() {
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in (a + 1)..5 {
                edges.push((a, b, 1.0));
            }
        }
        let g = SourceGraph::from_weighted_edges(5, &edges);
        let run = louvain(&g, 3);
        assert_eq!(run.partition.k(), 1);
        assert!(run.modularity.abs() < 1e-12);
    }
}
