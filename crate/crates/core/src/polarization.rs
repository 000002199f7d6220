//! User polarization: how each user's activity distributes over the detected
//! communities, plus the barycentric coordinates for the triangle plot
//! (vertices = three most active communities, centroid = everything else).

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::bipartite::BipartiteGraph;
use crate::community::Partition;

#[derive(Debug, Error)]
pub enum PolarizationError {
    #[error("partition does not cover the bipartite source set: {0}")]
    NodeSetMismatch(String),
    #[error("expected exactly 3 top communities, got {0}")]
    BadTopCount(usize),
}

/// A community ranked by the total interaction weight of its member sources.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCommunity {
    pub label: u32,
    pub activity: u64,
    /// Fraction of all interaction weight landing on this community.
    pub share: f64,
}

/// Communities ranked by activity, descending; ties broken by the smaller
/// label. If fewer than `k` communities exist, all are returned and
/// `truncated` is set.
#[derive(Debug, Clone)]
pub struct TopCommunities {
    pub ranked: Vec<RankedCommunity>,
    pub truncated: bool,
}

pub fn top_communities(
    partition: &Partition,
    bipartite: &BipartiteGraph,
    k: usize,
) -> Result<TopCommunities, PolarizationError> {
    assert!(k >= 1, "k must be at least 1");
    let labels = source_labels(partition, bipartite)?;
    let mut activity: Vec<u64> = vec![0; partition.k() as usize];
    let mut total: u64 = 0;
    for s in 0..bipartite.n_sources() {
        let w = bipartite.source_activity(s);
        activity[labels[s] as usize] += w;
        total += w;
    }
    let mut ranked: Vec<RankedCommunity> = activity
        .iter()
        .enumerate()
        .map(|(label, &w)| RankedCommunity {
            label: label as u32,
            activity: w,
            share: if total > 0 { w as f64 / total as f64 } else { 0.0 },
        })
        .collect();
    ranked.sort_by(|a, b| b.activity.cmp(&a.activity).then(a.label.cmp(&b.label)));
    let truncated = ranked.len() < k;
    ranked.truncate(k);
    Ok(TopCommunities { ranked, truncated })
}

fn source_labels(
    partition: &Partition,
    bipartite: &BipartiteGraph,
) -> Result<Vec<u32>, PolarizationError> {
    partition
        .labels_in_order(bipartite.source_ids())
        .map_err(|e| PolarizationError::NodeSetMismatch(e.to_string()))
}

/// Activity shares of one user over the bins (C1, C2, C3, rest).
#[derive(Debug, Clone, PartialEq)]
pub struct UserActivityProfile {
    pub user_id: String,
    /// (f1, f2, f3, f_rest), nonnegative, summing to 1.
    pub fractions: [f64; 4],
    pub total_activity: u64,
    /// Polarization index: the maximum bin share, in [1/4, 1].
    pub rho: f64,
}

/// Per-user activity profiles over the three given communities and the rest
/// bin, using the channel the bipartite graph was built on. Users appear in
/// bipartite construction only with positive activity, so every profile
/// normalizes. `min_activity` filters out low-activity users (1 = keep all).
/// Output is ordered by user id.
pub fn user_profiles(
    partition: &Partition,
    bipartite: &BipartiteGraph,
    top3: &[u32],
    min_activity: u64,
) -> Result<Vec<UserActivityProfile>, PolarizationError> {
    if top3.len() != 3 {
        return Err(PolarizationError::BadTopCount(top3.len()));
    }
    let labels = source_labels(partition, bipartite)?;
    let bin_of: HashMap<u32, usize> = top3.iter().enumerate().map(|(i, &l)| (l, i)).collect();

    let mut users: Vec<usize> = (0..bipartite.n_users()).collect();
    users.sort_by(|&a, &b| bipartite.user_ids()[a].cmp(&bipartite.user_ids()[b]));

    let profiles: Vec<Option<UserActivityProfile>> = users
        .par_iter()
        .map(|&u| {
            let mut bins = [0u64; 4];
            for (&s, &w) in bipartite.sources_of(u) {
                let bin = bin_of.get(&labels[s]).copied().unwrap_or(3);
                bins[bin] += w;
            }
            let total: u64 = bins.iter().sum();
            if total < min_activity.max(1) {
                return None;
            }
            let fractions = bins.map(|b| b as f64 / total as f64);
            let rho = fractions.iter().cloned().fold(0.0, f64::max);
            Some(UserActivityProfile {
                user_id: bipartite.user_ids()[u].clone(),
                fractions,
                total_activity: total,
                rho,
            })
        })
        .collect();

    Ok(profiles.into_iter().flatten().collect())
}

/// Equilateral reference triangle with unit side.
pub const TRIANGLE_VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.866_025_403_784_438_6)];

/// Centroid of the reference triangle: the "all other communities" point.
pub const TRIANGLE_CENTROID: (f64, f64) = (0.5, 0.288_675_134_594_812_9);

/// A plotted point of the triangle diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct TrianglePoint {
    pub x: f64,
    pub y: f64,
    pub multiplicity: u64,
}

/// Barycentric placement: f1·v1 + f2·v2 + f3·v3 + f_rest·centroid. Convexity
/// keeps every profile inside the closed triangle.
pub fn triangle_coordinates(profile: &UserActivityProfile) -> TrianglePoint {
    let [f1, f2, f3, rest] = profile.fractions;
    let x = f1 * TRIANGLE_VERTICES[0].0
        + f2 * TRIANGLE_VERTICES[1].0
        + f3 * TRIANGLE_VERTICES[2].0
        + rest * TRIANGLE_CENTROID.0;
    let y = f1 * TRIANGLE_VERTICES[0].1
        + f2 * TRIANGLE_VERTICES[1].1
        + f3 * TRIANGLE_VERTICES[2].1
        + rest * TRIANGLE_CENTROID.1;
    TrianglePoint {
        x,
        y,
        multiplicity: 1,
    }
}

/// One occupied cell of the triangle density grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleBin {
    pub x_bin: u32,
    pub y_bin: u32,
    pub count: u64,
}

/// Accumulates user points on a bins×bins grid over the triangle's bounding
/// box. The counts sum to the number of profiles.
pub fn triangle_density(profiles: &[UserActivityProfile], bins: u32) -> Vec<TriangleBin> {
    assert!(bins >= 1);
    let height = TRIANGLE_VERTICES[2].1;
    let mut counts: std::collections::BTreeMap<(u32, u32), u64> = std::collections::BTreeMap::new();
    for p in profiles {
        let pt = triangle_coordinates(p);
        let xb = ((pt.x * bins as f64) as u32).min(bins - 1);
        let yb = ((pt.y / height * bins as f64) as u32).min(bins - 1);
        *counts.entry((xb, yb)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|((x_bin, y_bin), count)| TriangleBin { x_bin, y_bin, count })
        .collect()
}

/// Signed-area containment test against the reference triangle, with an
/// epsilon for points sitting exactly on an edge.
pub fn inside_triangle(x: f64, y: f64) -> bool {
    let eps = 1e-9;
    let [a, b, c] = TRIANGLE_VERTICES;
    let sign = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| -> f64 {
        (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
    };
    let d1 = sign(a, b, (x, y));
    let d2 = sign(b, c, (x, y));
    let d3 = sign(c, a, (x, y));
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}
