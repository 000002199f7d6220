//! Community detection on the projected source graph.
//!
//! Five algorithms spanning the main families: greedy modularity
//! optimization ([`louvain`], [`fast_greedy`]), label dynamics
//! ([`label_propagation`]), and random-walk approaches ([`walktrap`],
//! [`infomap`]). All of them consume an immutable [`SourceGraph`] and return
//! a [`Partition`] with dense labels; runs with a fixed seed are reproducible
//! bit for bit.

mod fast_greedy;
mod infomap;
mod label_propagation;
mod louvain;
mod walktrap;

pub use fast_greedy::{fast_greedy, FastGreedyRun};
pub use infomap::{description_length, infomap, InfomapRun};
pub use label_propagation::label_propagation;
pub use louvain::{louvain, LouvainRun};
pub use walktrap::{best_modularity_cut, vertex_distances, walktrap};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::projection::SourceGraph;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("degenerate graph: total edge weight is zero")]
    DegenerateGraph,
    #[error("partition does not cover the graph's node set (missing {missing:?}, extra {extra:?})")]
    NodeSetMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
}

/// Assignment of every node to exactly one community. Labels are dense
/// integers 0..k; the fingerprint ties the partition to the node set it was
/// computed on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    nodes: Vec<String>,
    labels: Vec<u32>,
    k: u32,
    fingerprint: [u8; 32],
}

impl Partition {
    /// Builds a partition over the graph's nodes from per-index labels,
    /// renumbering them densely in order of first appearance.
    pub fn from_graph_labels(graph: &SourceGraph, raw_labels: &[u32]) -> Partition {
        assert_eq!(raw_labels.len(), graph.n_nodes());
        Self::from_labels_with_fingerprint(
            graph.node_ids().to_vec(),
            raw_labels,
            graph.fingerprint(),
        )
    }

    /// Builds a partition from explicit node ids and labels (testkit and
    /// file-loading path).
    pub fn from_labels(nodes: Vec<String>, raw_labels: &[u32]) -> Partition {
        let fp = fingerprint_of(&nodes);
        Self::from_labels_with_fingerprint(nodes, raw_labels, fp)
    }

    fn from_labels_with_fingerprint(
        nodes: Vec<String>,
        raw_labels: &[u32],
        fingerprint: [u8; 32],
    ) -> Partition {
        assert_eq!(nodes.len(), raw_labels.len());
        let mut dense: HashMap<u32, u32> = HashMap::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        for &raw in raw_labels {
            let next = dense.len() as u32;
            let label = *dense.entry(raw).or_insert(next);
            labels.push(label);
        }
        Partition {
            nodes,
            labels,
            k: dense.len() as u32,
            fingerprint,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of communities.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn label_of_index(&self, idx: usize) -> u32 {
        self.labels[idx]
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }

    /// Node indices grouped by community label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k as usize];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l as usize].push(i);
        }
        groups
    }

    /// Community label for a node id.
    pub fn label_of(&self, node: &str) -> Option<u32> {
        self.nodes
            .iter()
            .position(|n| n == node)
            .map(|i| self.labels[i])
    }

    /// Labels of this partition arranged to follow `order`. Errors with the
    /// symmetric difference when the node sets disagree.
    pub fn labels_in_order(&self, order: &[String]) -> Result<Vec<u32>, CommunityError> {
        let by_id: HashMap<&str, u32> = self
            .nodes
            .iter()
            .zip(&self.labels)
            .map(|(n, &l)| (n.as_str(), l))
            .collect();
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(order.len());
        for id in order {
            match by_id.get(id.as_str()) {
                Some(&l) => out.push(l),
                None => missing.push(id.clone()),
            }
        }
        let order_set: std::collections::HashSet<&str> =
            order.iter().map(String::as_str).collect();
        let extra: Vec<String> = self
            .nodes
            .iter()
            .filter(|n| !order_set.contains(n.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() || order.len() != self.nodes.len() {
            return Err(CommunityError::NodeSetMismatch { missing, extra });
        }
        Ok(out)
    }
}

pub(crate) fn fingerprint_of(nodes: &[String]) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut ids: Vec<&str> = nodes.iter().map(String::as_str).collect();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.as_bytes());
        hasher.update([0u8]);
    }
    hasher.finalize().into()
}

/// One agglomeration step: `left` and `right` are cluster ids (leaves are
/// 0..n, internal clusters continue upward), `merged` the new cluster id.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub merged: usize,
}

/// Hierarchical clustering result. Per connected component of n leaves there
/// are exactly n-1 merges; heights are non-decreasing along any root path.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

/// Newman-Girvan weighted modularity
/// Q = (1/2m) Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j).
pub fn modularity(graph: &SourceGraph, partition: &Partition) -> Result<f64, CommunityError> {
    let labels = partition.labels_in_order(graph.node_ids())?;
    let two_m = 2.0 * graph.total_weight();
    if two_m <= 0.0 {
        return Err(CommunityError::DegenerateGraph);
    }
    let k = partition.k() as usize;
    let mut intra = vec![0.0; k];
    let mut degree_sum = vec![0.0; k];
    for (a, b, w) in graph.edges() {
        degree_sum[labels[a] as usize] += w;
        degree_sum[labels[b] as usize] += w;
        if labels[a] == labels[b] {
            intra[labels[a] as usize] += w;
        }
    }
    let mut q = 0.0;
    for c in 0..k {
        q += 2.0 * intra[c] / two_m - (degree_sum[c] / two_m).powi(2);
    }
    Ok(q)
}

/// Mutable multigraph the greedy optimizers work on: neighbor maps plus
/// self-loop weights, with the convention that a self-loop of weight w
/// contributes 2w to the adjacency entry and to the degree. Aggregating a
/// partition preserves modularity and map-equation values.
#[derive(Debug, Clone)]
pub(crate) struct WorkingGraph {
    /// adj[i][j] = A_ij for i != j
    pub adj: Vec<BTreeMap<usize, f64>>,
    /// A_ii (already doubled)
    pub self_weight: Vec<f64>,
    /// k_i = Σ_j A_ij including the self entry
    pub degree: Vec<f64>,
    /// 2m = Σ_i k_i
    pub total: f64,
}

impl WorkingGraph {
    pub fn from_source_graph(g: &SourceGraph) -> WorkingGraph {
        let n = g.n_nodes();
        let mut adj = vec![BTreeMap::new(); n];
        let mut degree = vec![0.0; n];
        for (a, b, w) in g.edges() {
            adj[a].insert(b, w);
            adj[b].insert(a, w);
            degree[a] += w;
            degree[b] += w;
        }
        let total = degree.iter().sum();
        WorkingGraph {
            adj,
            self_weight: vec![0.0; n],
            degree,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Modularity of a label assignment over this working graph.
    pub fn modularity(&self, labels: &[u32]) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        let k = labels.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
        let mut intra2 = vec![0.0; k]; // Σ A_ij over ordered intra pairs
        let mut degree_sum = vec![0.0; k];
        for i in 0..self.n() {
            degree_sum[labels[i] as usize] += self.degree[i];
            intra2[labels[i] as usize] += self.self_weight[i];
            for (&j, &w) in &self.adj[i] {
                if labels[j] == labels[i] {
                    intra2[labels[i] as usize] += w;
                }
            }
        }
        let mut q = 0.0;
        for c in 0..k {
            q += intra2[c] / self.total - (degree_sum[c] / self.total).powi(2);
        }
        q
    }

    /// Collapses each community into a macro node. Returns the aggregated
    /// graph; macro node c corresponds to label c.
    pub fn aggregate(&self, labels: &[u32]) -> WorkingGraph {
        let k = labels.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
        let mut adj = vec![BTreeMap::new(); k];
        let mut self_weight = vec![0.0; k];
        for i in 0..self.n() {
            let ci = labels[i] as usize;
            self_weight[ci] += self.self_weight[i];
            for (&j, &w) in &self.adj[i] {
                let cj = labels[j] as usize;
                if ci == cj {
                    // each intra edge visited from both endpoints: sums to 2w
                    self_weight[ci] += w;
                } else {
                    *adj[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let mut degree = vec![0.0; k];
        for c in 0..k {
            degree[c] = self_weight[c] + adj[c].values().sum::<f64>();
        }
        let total = degree.iter().sum();
        WorkingGraph {
            adj,
            self_weight,
            degree,
            total,
        }
    }
}

/// Renumbers labels densely in order of first appearance.
pub(crate) fn densify(labels: &[u32]) -> Vec<u32> {
    let mut map: HashMap<u32, u32> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> SourceGraph {
        SourceGraph::from_weighted_edges(2, &[(0, 1, 1.0)])
    }

    fn two_disjoint_edges() -> SourceGraph {
        SourceGraph::from_weighted_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)])
    }

    #[test]
    fn modularity_of_singletons_on_single_edge() {
        let g = single_edge();
        let p = Partition::from_graph_labels(&g, &[0, 1]);
        assert_eq!(modularity(&g, &p).unwrap(), -0.5);
    }

    #[test]
    fn modularity_of_component_partition_on_two_edges() {
        let g = two_disjoint_edges();
        let p = Partition::from_graph_labels(&g, &[0, 0, 1, 1]);
        assert_eq!(modularity(&g, &p).unwrap(), 0.5);
    }

    #[test]
    fn modularity_of_all_in_one_is_zero() {
        let g = two_disjoint_edges();
        let p = Partition::from_graph_labels(&g, &[0, 0, 0, 0]);
        assert!(modularity(&g, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn modularity_rejects_zero_weight_graph() {
        let g = SourceGraph::from_weighted_edges(3, &[]);
        let p = Partition::from_graph_labels(&g, &[0, 1, 2]);
        assert!(matches!(
            modularity(&g, &p),
            Err(CommunityError::DegenerateGraph)
        ));
    }

    #[test]
    fn modularity_rejects_mismatched_node_set() {
        let g = single_edge();
        let p = Partition::from_labels(vec!["x".into(), "y".into()], &[0, 1]);
        let err = modularity(&g, &p).unwrap_err();
        match err {
            CommunityError::NodeSetMismatch { missing, extra } => {
                assert_eq!(missing, vec!["n0".to_string(), "n1".to_string()]);
                assert_eq!(extra, vec!["x".to_string(), "y".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn modularity_invariant_under_uniform_scaling() {
        let g = SourceGraph::from_weighted_edges(5, &[(0, 1, 1.0), (1, 2, 2.0), (3, 4, 0.5), (0, 2, 1.5)]);
        let mut scaled = SourceGraph::new(g.node_ids().to_vec());
        for (a, b, w) in g.edges() {
            scaled.add_edge(a, b, w * 7.0);
        }
        let p = Partition::from_graph_labels(&g, &[0, 0, 0, 1, 1]);
        let q1 = modularity(&g, &p).unwrap();
        let q2 = modularity(&scaled, &p).unwrap();
        assert!((q1 - q2).abs() < 1e-12);
    }

    #[test]
    fn partition_labels_are_dense_and_first_appearance_ordered() {
        let g = SourceGraph::from_weighted_edges(4, &[]);
        let p = Partition::from_graph_labels(&g, &[7, 3, 7, 9]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.k(), 3);
    }

    #[test]
    fn aggregate_preserves_modularity() {
        let g = SourceGraph::from_weighted_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 2.0), (4, 5, 1.0), (2, 3, 0.5)],
        );
        let wg = WorkingGraph::from_source_graph(&g);
        let labels = vec![0u32, 0, 0, 1, 1, 1];
        let q_fine = wg.modularity(&labels);
        let agg = wg.aggregate(&labels);
        let q_coarse = agg.modularity(&[0, 1]);
        assert!((q_fine - q_coarse).abs() < 1e-12);
        assert!((wg.total - agg.total).abs() < 1e-12);
    }
}
