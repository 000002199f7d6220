//! Partition agreement: Rand Index, Normalized Mutual Information, and the
//! all-pairs concordance summary used to pick a projection and an algorithm.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::community::Partition;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("partitions cover different node sets (only in first: {only_in_p:?}, only in second: {only_in_q:?})")]
    NodeSetMismatch {
        only_in_p: Vec<String>,
        only_in_q: Vec<String>,
    },
    #[error("need at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("need at least two partitions, got {0}")]
    TooFewPartitions(usize),
}

/// Aligns q's labels to p's node order, or reports the symmetric difference.
fn aligned_labels<'a>(
    p: &'a Partition,
    q: &Partition,
) -> Result<(&'a [u32], Vec<u32>), MetricsError> {
    let q_by_id: HashMap<&str, u32> = q
        .nodes()
        .iter()
        .zip(q.labels())
        .map(|(n, &l)| (n.as_str(), l))
        .collect();
    let mut only_in_p = Vec::new();
    let mut q_labels = Vec::with_capacity(p.len());
    for node in p.nodes() {
        match q_by_id.get(node.as_str()) {
            Some(&l) => q_labels.push(l),
            None => only_in_p.push(node.clone()),
        }
    }
    let p_set: std::collections::HashSet<&str> = p.nodes().iter().map(String::as_str).collect();
    let only_in_q: Vec<String> = q
        .nodes()
        .iter()
        .filter(|n| !p_set.contains(n.as_str()))
        .cloned()
        .collect();
    if !only_in_p.is_empty() || !only_in_q.is_empty() || p.len() != q.len() {
        return Err(MetricsError::NodeSetMismatch {
            only_in_p,
            only_in_q,
        });
    }
    Ok((p.labels(), q_labels))
}

fn contingency(
    p_labels: &[u32],
    q_labels: &[u32],
) -> (Vec<f64>, Vec<f64>, BTreeMap<(u32, u32), f64>) {
    let mut a: BTreeMap<u32, f64> = BTreeMap::new();
    let mut b: BTreeMap<u32, f64> = BTreeMap::new();
    let mut joint: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (&pl, &ql) in p_labels.iter().zip(q_labels) {
        *a.entry(pl).or_insert(0.0) += 1.0;
        *b.entry(ql).or_insert(0.0) += 1.0;
        *joint.entry((pl, ql)).or_insert(0.0) += 1.0;
    }
    (a.into_values().collect(), b.into_values().collect(), joint)
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Rand Index: the fraction of node pairs on which the two partitions agree
/// (co-clustered in both or separated in both). Requires n >= 2 and identical
/// node sets.
pub fn rand_index(p: &Partition, q: &Partition) -> Result<f64, MetricsError> {
    if p.len() < 2 {
        return Err(MetricsError::TooFewNodes { min: 2, got: p.len() });
    }
    let (pl, ql) = aligned_labels(p, q)?;
    let n = pl.len() as f64;
    let (rows, cols, joint) = contingency(pl, &ql);
    let same_both: f64 = joint.values().map(|&c| choose2(c)).sum();
    let same_p: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let same_q: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    // pairs separated in both = total - (same in p) - (same in q) + (same in both)
    let agree = same_both + (total - same_p - same_q + same_both);
    Ok(agree / total)
}

/// NMI with the arithmetic-mean (Danon) normalization,
/// 2 I(p;q) / (H(p) + H(q)), entropies in bits. Two single-cluster
/// partitions count as identical (1); if exactly one entropy is zero the
/// score is 0.
pub fn nmi(p: &Partition, q: &Partition) -> Result<f64, MetricsError> {
    if p.len() < 2 {
        return Err(MetricsError::TooFewNodes { min: 2, got: p.len() });
    }
    let (pl, ql) = aligned_labels(p, q)?;
    let n = pl.len() as f64;
    let (rows, cols, joint) = contingency(pl, &ql);
    let entropy = |counts: &[f64]| -> f64 {
        -counts
            .iter()
            .map(|&c| {
                let f = c / n;
                if f > 0.0 {
                    f * f.log2()
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    };
    let h_p = entropy(&rows);
    let h_q = entropy(&cols);
    if h_p == 0.0 && h_q == 0.0 {
        return Ok(1.0); // both trivial single-cluster partitions
    }
    if h_p == 0.0 || h_q == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (&(pl_lab, ql_lab), &c) in &joint {
        let pij = c / n;
        let pi = rows[pl_lab as usize] / n;
        let qj = cols[ql_lab as usize] / n;
        mi += pij * (pij / (pi * qj)).log2();
    }
    Ok(2.0 * mi / (h_p + h_q))
}

/// A partition tagged with where it came from, for concordance reporting.
#[derive(Debug, Clone)]
pub struct LabeledPartition {
    pub name: String,
    pub algorithm: String,
    pub projection: Option<String>,
    pub partition: Partition,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageScores {
    pub rand: f64,
    pub nmi: f64,
}

/// Pairwise Rand/NMI matrices plus the averaged views: per algorithm (mean
/// over its pairs with the other partitions) and per projection (mean over
/// pairs within the same projection group).
#[derive(Debug, Clone, Serialize)]
pub struct ConcordanceReport {
    pub names: Vec<String>,
    pub algorithms: Vec<String>,
    pub projections: Vec<Option<String>>,
    pub pairwise_rand: Vec<Vec<f64>>,
    pub pairwise_nmi: Vec<Vec<f64>>,
    pub per_algorithm: BTreeMap<String, AverageScores>,
    pub per_projection: BTreeMap<String, AverageScores>,
    /// Conventions baked into the scores.
    pub nmi_normalization: &'static str,
    pub entropy_base: &'static str,
}

/// Full pairwise agreement over two or more partitions of the same node set.
/// Averages exclude self-pairs; the diagonals are exactly 1.
pub fn concordance(partitions: &[LabeledPartition]) -> Result<ConcordanceReport, MetricsError> {
    let m = partitions.len();
    if m < 2 {
        return Err(MetricsError::TooFewPartitions(m));
    }
    let mut pairwise_rand = vec![vec![1.0; m]; m];
    let mut pairwise_nmi = vec![vec![1.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let r = rand_index(&partitions[i].partition, &partitions[j].partition)?;
            let s = nmi(&partitions[i].partition, &partitions[j].partition)?;
            pairwise_rand[i][j] = r;
            pairwise_rand[j][i] = r;
            pairwise_nmi[i][j] = s;
            pairwise_nmi[j][i] = s;
        }
    }

    let mut per_algorithm = BTreeMap::new();
    for i in 0..m {
        let mut rand_sum = 0.0;
        let mut nmi_sum = 0.0;
        for j in 0..m {
            if j != i {
                rand_sum += pairwise_rand[i][j];
                nmi_sum += pairwise_nmi[i][j];
            }
        }
        per_algorithm.insert(
            partitions[i].name.clone(),
            AverageScores {
                rand: rand_sum / (m - 1) as f64,
                nmi: nmi_sum / (m - 1) as f64,
            },
        );
    }

    let mut per_projection = BTreeMap::new();
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, p) in partitions.iter().enumerate() {
        if let Some(proj) = &p.projection {
            groups.entry(proj.clone()).or_default().push(i);
        }
    }
    for (proj, idxs) in groups {
        if idxs.len() < 2 {
            continue;
        }
        let mut rand_sum = 0.0;
        let mut nmi_sum = 0.0;
        let mut pairs = 0.0;
        for (a, &i) in idxs.iter().enumerate() {
            for &j in &idxs[a + 1..] {
                rand_sum += pairwise_rand[i][j];
                nmi_sum += pairwise_nmi[i][j];
                pairs += 1.0;
            }
        }
        per_projection.insert(
            proj,
            AverageScores {
                rand: rand_sum / pairs,
                nmi: nmi_sum / pairs,
            },
        );
    }

    Ok(ConcordanceReport {
        names: partitions.iter().map(|p| p.name.clone()).collect(),
        algorithms: partitions.iter().map(|p| p.algorithm.clone()).collect(),
        projections: partitions.iter().map(|p| p.projection.clone()).collect(),
        pairwise_rand,
        pairwise_nmi,
        per_algorithm,
        per_projection,
        nmi_normalization: "danon-arithmetic-mean",
        entropy_base: "bits",
    })
}
