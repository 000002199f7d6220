//! Projections of the bipartite network onto the source set.
//!
//! Three pairwise similarity schemes weight the projected edges: the number
//! of common users, their Jaccard coefficient, and the user-activity-scaled
//! Jaccard (Jaccard damped by how evenly and how heavily the common users
//! split their activity between the two sources).

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bipartite::{BipartiteGraph, Channel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionKind {
    EdgeCount,
    Jaccard,
    ActivityJaccard,
}

impl ProjectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionKind::EdgeCount => "edge-count",
            ProjectionKind::Jaccard => "jaccard",
            ProjectionKind::ActivityJaccard => "activity-jaccard",
        }
    }

    pub fn parse(s: &str) -> Option<ProjectionKind> {
        match s {
            "edge-count" | "edge_count" => Some(ProjectionKind::EdgeCount),
            "jaccard" => Some(ProjectionKind::Jaccard),
            "activity-jaccard" | "activity_jaccard" | "uajs" => {
                Some(ProjectionKind::ActivityJaccard)
            }
            _ => None,
        }
    }
}

/// Weighted undirected graph on source accounts. No self-loops; edges are
/// stored once under (min, max) index order. Pairs with zero similarity are
/// absent rather than zero-weighted, and isolated sources remain as nodes so
/// downstream reports can mark them unassigned.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceGraph {
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), f64>,
    pub projection_kind: Option<ProjectionKind>,
    pub channel: Option<Channel>,
}

impl SourceGraph {
    pub fn new(nodes: Vec<String>) -> SourceGraph {
        let node_index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        SourceGraph {
            nodes,
            node_index,
            edges: BTreeMap::new(),
            projection_kind: None,
            channel: None,
        }
    }

    /// Convenience builder for tests and fixtures: numbered nodes "n0".."nK"
    /// with the given weighted edges.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> SourceGraph {
        let mut g = SourceGraph::new((0..n).map(|i| format!("n{i}")).collect());
        for &(a, b, w) in edges {
            g.add_edge(a, b, w);
        }
        g
    }

    /// Inserts or replaces the undirected edge (a, b). Panics on self-loops
    /// and non-positive weights; absent pair means no edge.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) {
        assert!(a != b, "self-loops are not allowed in a source graph");
        assert!(weight > 0.0, "edge weights must be positive");
        let key = (a.min(b), a.max(b));
        self.edges.insert(key, weight);
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.node_index.get(node).copied()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        self.edges
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Edges in deterministic (min, max) index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency lists, one per node, ordered by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (&(a, b), &w) in &self.edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for l in &mut adj {
            l.sort_unstable_by_key(|&(n, _)| n);
        }
        adj
    }

    /// Weighted degree of a node.
    pub fn degree(&self, node: usize) -> f64 {
        self.edges
            .iter()
            .filter(|(&(a, b), _)| a == node || b == node)
            .map(|(_, &w)| w)
            .sum()
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Nodes with no incident edges.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        let mut touched = vec![false; self.nodes.len()];
        for &(a, b) in self.edges.keys() {
            touched[a] = true;
            touched[b] = true;
        }
        touched
            .iter()
            .enumerate()
            .filter(|(_, &t)| !t)
            .map(|(i, _)| i)
            .collect()
    }

    /// Digest of the node set, order-independent; partitions computed on this
    /// graph carry the same fingerprint.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut ids: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        ids.sort_unstable();
        let mut hasher = Sha256::new();
        for id in ids {
            hasher.update(id.as_bytes());
            hasher.update([0u8]);
        }
        hasher.finalize().into()
    }
}

/// Candidate pairs with at least one common user, found through the user side
/// so the scan stays sparse.
fn co_engaged_pairs(g: &BipartiteGraph) -> Vec<(usize, usize)> {
    let mut pairs = std::collections::BTreeSet::new();
    for u in 0..g.n_users() {
        let sources: Vec<usize> = g.sources_of(u).keys().copied().collect();
        for (i, &a) in sources.iter().enumerate() {
            for &b in &sources[i + 1..] {
                pairs.insert((a, b));
            }
        }
    }
    pairs.into_iter().collect()
}

fn project_with<F>(g: &BipartiteGraph, kind: ProjectionKind, weight_fn: F) -> SourceGraph
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    assert!(g.n_sources() > 0, "cannot project an empty bipartite graph");
    let pairs = co_engaged_pairs(g);
    // Pairs are independent; the deterministic pair order makes the merged
    // result independent of scheduling.
    let weighted: Vec<((usize, usize), f64)> = pairs
        .par_iter()
        .map(|&(a, b)| ((a, b), weight_fn(a, b)))
        .collect();
    let mut out = SourceGraph::new(g.source_ids().to_vec());
    out.projection_kind = Some(kind);
    out.channel = Some(g.channel);
    for ((a, b), w) in weighted {
        if w > 0.0 {
            out.add_edge(a, b, w);
        }
    }
    out
}

fn common_users(g: &BipartiteGraph, a: usize, b: usize) -> Vec<usize> {
    let ua = g.users_of(a);
    let ub = g.users_of(b);
    // intersect the smaller into the larger
    let (small, big) = if ua.len() <= ub.len() { (ua, ub) } else { (ub, ua) };
    small
        .keys()
        .filter(|u| big.contains_key(u))
        .copied()
        .collect()
}

/// Edge weight = number of common users of the two sources.
pub fn project_edge_count(g: &BipartiteGraph) -> SourceGraph {
    project_with(g, ProjectionKind::EdgeCount, |a, b| {
        common_users(g, a, b).len() as f64
    })
}

/// Edge weight = |A ∩ B| / |A ∪ B| over the user neighborhoods.
pub fn project_jaccard(g: &BipartiteGraph) -> SourceGraph {
    project_with(g, ProjectionKind::Jaccard, |a, b| jaccard(g, a, b))
}

fn jaccard(g: &BipartiteGraph, a: usize, b: usize) -> f64 {
    let inter = common_users(g, a, b).len();
    let union = g.users_of(a).len() + g.users_of(b).len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Edge weight = w_ab * J_ab, the Jaccard coefficient scaled by the page
/// relative users weight
///
///   w_ab = (1/N_ab) Σ_{u ∈ U_ab} (1 − |w_a^u − w_b^u| / max_c w_c^u)
///                               · (w_a^u + w_b^u) / (2 · max_{v,c} w_c^v)
///
/// where U_ab are the common users, the per-user max runs over all sources,
/// and the global max over the whole bipartite graph. Every summand is in
/// [0, 1], so the result never exceeds the plain Jaccard weight.
pub fn project_activity_jaccard(g: &BipartiteGraph) -> SourceGraph {
    let global_max = g.global_max_weight() as f64;
    project_with(g, ProjectionKind::ActivityJaccard, move |a, b| {
        let common = common_users(g, a, b);
        if common.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for &u in &common {
            let wa = g.weight(a, u) as f64;
            let wb = g.weight(b, u) as f64;
            let user_max = g.user_max_weight(u) as f64;
            let balance = 1.0 - (wa - wb).abs() / user_max;
            let magnitude = (wa + wb) / (2.0 * global_max);
            sum += balance * magnitude;
        }
        let w_ab = sum / common.len() as f64;
        w_ab * jaccard(g, a, b)
    })
}

pub fn project(g: &BipartiteGraph, kind: ProjectionKind) -> SourceGraph {
    match kind {
        ProjectionKind::EdgeCount => project_edge_count(g),
        ProjectionKind::Jaccard => project_jaccard(g),
        ProjectionKind::ActivityJaccard => project_activity_jaccard(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n_sources: usize, n_users: usize, edges: &[(usize, usize, u64)]) -> BipartiteGraph {
        BipartiteGraph::from_parts(
            Channel::Engagement,
            (0..n_sources).map(|i| format!("s{i}")).collect(),
            (0..n_users).map(|i| format!("u{i}")).collect(),
            edges,
        )
    }

    #[test]
    fn edge_count_is_common_user_count() {
        // A = B = {u0, u1} -> 2; A = {u0,u1}, B = {u1,u2} -> 1; disjoint -> none
        let g = graph(4, 3, &[
            (0, 0, 1), (0, 1, 1),
            (1, 0, 1), (1, 1, 1),
            (2, 1, 1), (2, 2, 1),
            (3, 2, 1),
        ]);
        let p = project_edge_count(&g);
        assert_eq!(p.weight(0, 1), 2.0);
        assert_eq!(p.weight(0, 2), 1.0);
        assert_eq!(p.weight(0, 3), 0.0);
        assert_eq!(p.weight(1, 3), 0.0);
    }

    #[test]
    fn jaccard_matches_hand_enumeration() {
        let g = graph(3, 3, &[
            (0, 0, 1), (0, 1, 1),       // A = {u0, u1}
            (1, 1, 1), (1, 2, 1),       // B = {u1, u2}
            (2, 0, 2), (2, 1, 3),       // C = {u0, u1}, same set as A
        ]);
        let p = project_jaccard(&g);
        // intersection 1, union 3
        assert_eq!(p.weight(0, 1), 1.0 / 3.0);
        // identical neighborhoods -> 1 regardless of weights
        assert_eq!(p.weight(0, 2), 1.0);
    }

    #[test]
    fn disjoint_neighborhoods_produce_no_edge() {
        let g = graph(2, 2, &[(0, 0, 3), (1, 1, 5)]);
        for p in [project_edge_count(&g), project_jaccard(&g), project_activity_jaccard(&g)] {
            assert_eq!(p.edge_count(), 0);
            assert_eq!(p.n_nodes(), 2); // nodes retained
        }
    }

    #[test]
    fn activity_jaccard_hand_example() {
        // u0 has w_a = 2, w_b = 2 (its own max 2); u1 has w_a = 4 (global max 4).
        // w_ab = (1 - 0/2) * ((2+2)/(2*4)) = 0.5; J = 1/2; weight = 0.25.
        let g = graph(2, 2, &[(0, 0, 2), (1, 0, 2), (0, 1, 4)]);
        let p = project_activity_jaccard(&g);
        assert!((p.weight(0, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn activity_jaccard_attains_upper_bound() {
        // single user with w_a = w_b = global max -> weight exactly 1
        let g = graph(2, 1, &[(0, 0, 7), (1, 0, 7)]);
        let p = project_activity_jaccard(&g);
        assert_eq!(p.weight(0, 1), 1.0);
    }

    #[test]
    fn unbalanced_user_summand() {
        // w_a = 4 = per-user and global max, w_b = 1:
        // summand = (1 - 3/4) * (5/8) = 0.15625; single common user, J = 1.
        let g = graph(2, 1, &[(0, 0, 4), (1, 0, 1)]);
        let p = project_activity_jaccard(&g);
        assert!((p.weight(0, 1) - 0.15625).abs() < 1e-15);
    }

    #[test]
    fn projections_keep_isolated_sources_as_nodes() {
        let g = graph(3, 1, &[(0, 0, 1), (1, 0, 1)]);
        let p = project_jaccard(&g);
        assert_eq!(p.n_nodes(), 3);
        assert_eq!(p.isolated_nodes(), vec![2]);
    }

    #[test]
    fn fingerprint_ignores_node_order() {
        let a = SourceGraph::new(vec!["x".into(), "y".into()]);
        let b = SourceGraph::new(vec!["y".into(), "x".into()]);
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = SourceGraph::new(vec!["x".into(), "z".into()]);
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
