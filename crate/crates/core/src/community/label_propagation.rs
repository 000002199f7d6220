//! Asynchronous label propagation.
//!
//! Every node starts in its own community and repeatedly adopts the label
//! with the largest total edge weight in its neighborhood. Updates are
//! asynchronous in a seeded shuffle order; a node only changes when its
//! current label is strictly below the neighborhood maximum, and ties among
//! maximal labels are broken by a seeded draw. The sweep loop stops when
//! every node's label is among its neighborhood's maximal-weight labels.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::projection::SourceGraph;

use super::{densify, Partition};

const WEIGHT_EPS: f64 = 1e-12;
const MAX_SWEEPS: usize = 1000;

pub fn label_propagation(graph: &SourceGraph, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.n_nodes();
    let adj = graph.adjacency();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..MAX_SWEEPS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &i in &order {
            if adj[i].is_empty() {
                continue; // isolated nodes keep their own label
            }
            let mut weight_by_label: BTreeMap<u32, f64> = BTreeMap::new();
            for &(j, w) in &adj[i] {
                *weight_by_label.entry(labels[j]).or_insert(0.0) += w;
            }
            let max_w = weight_by_label
                .values()
                .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let current_w = weight_by_label
                .get(&labels[i])
                .copied()
                .unwrap_or(0.0);
            if current_w >= max_w - WEIGHT_EPS {
                continue; // current label already maximal
            }
            let maximal: Vec<u32> = weight_by_label
                .iter()
                .filter(|(_, &w)| w >= max_w - WEIGHT_EPS)
                .map(|(&l, _)| l)
                .collect();
            let pick = maximal[rng.random_range(0..maximal.len())];
            labels[i] = pick;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    Partition::from_graph_labels(graph, &densify(&labels))
}
