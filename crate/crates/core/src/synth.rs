//! Synthetic fixtures and brute-force oracles.
//!
//! The planted-partition generator emits datasets in the same wire format as
//! real ingestion, carrying their own ground truth, so the whole pipeline can
//! be verified end to end without proprietary data. The oracles re-derive
//! modularity, the map equation, projection weights, and partition metrics
//! from first principles, sharing no computation with the main
//! implementations.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::TimeZone;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::BipartiteGraph;
use crate::community::Partition;
use crate::model::{Dataset, InteractionKind, InteractionRecord, Platform, Post, SourceAccount};
use crate::projection::{ProjectionKind, SourceGraph};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("shares must be positive and sum to 1 (got sum {0})")]
    BadShares(f64),
    #[error("community {community} would receive zero sources")]
    InfeasibleShares { community: usize },
    #[error("{0}")]
    BadConfig(String),
    #[error("graph too large for exhaustive search: {n} nodes > {max}")]
    TooLarge { n: usize, max: usize },
}

/// Sentiment planting: post and comment texts are composed from lexicon
/// tokens with exact valences, so aggregate sentiments are analytically
/// known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedSentiment {
    /// Valence of every post of a community-c source.
    pub post_valence_by_community: Vec<f64>,
    /// Valence of every comment on a community-c post.
    pub comment_valence_by_community: Vec<f64>,
    pub comments_per_post: usize,
    pub n_entities: usize,
    pub entities_per_post: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n_sources: usize,
    pub n_users: usize,
    pub n_communities: usize,
    /// Fraction of sources per community; must sum to 1.
    pub source_shares: Vec<f64>,
    /// Fraction of users homed per community; defaults to `source_shares`.
    #[serde(default)]
    pub user_home_shares: Option<Vec<f64>>,
    /// Probability that an interaction targets the user's home community.
    pub p_home: f64,
    /// Mean of the per-user Poisson interaction count.
    pub mean_interactions_per_user: f64,
    #[serde(default = "default_posts_per_source")]
    pub posts_per_source: usize,
    #[serde(default)]
    pub platform: Option<Platform>,
    #[serde(default)]
    pub sentiment: Option<PlantedSentiment>,
    pub seed: u64,
}

fn default_posts_per_source() -> usize {
    10
}

impl PlantedConfig {
    /// A 40/30/30 three-community benchmark with strong homing.
    pub fn benchmark(n_sources: usize, n_users: usize, seed: u64) -> PlantedConfig {
        PlantedConfig {
            n_sources,
            n_users,
            n_communities: 3,
            source_shares: vec![0.4, 0.3, 0.3],
            user_home_shares: None,
            p_home: 0.9,
            mean_interactions_per_user: 10.0,
            posts_per_source: 10,
            platform: None,
            sentiment: None,
            seed,
        }
    }
}

/// Generator output: the dataset plus its ground truth and, when sentiment is
/// planted, the matching lexicon and gazetteer file bodies.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: Dataset,
    pub ground_truth: Partition,
    pub user_homes: BTreeMap<String, u32>,
    pub lexicon: Option<String>,
    pub gazetteer: Option<String>,
}

fn valence_token(v: f64) -> String {
    format!("w{}", v.to_string().replace('-', "m").replace('.', "d"))
}

fn draw_categorical(rng: &mut ChaCha8Rng, shares: &[f64]) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &s) in shares.iter().enumerate() {
        acc += s;
        if x < acc {
            return i;
        }
    }
    shares.len() - 1
}

/// Allocates `n` items over communities by largest remainder; every
/// community must get at least one.
fn allocate(n: usize, shares: &[f64]) -> Result<Vec<usize>, SynthError> {
    let mut counts: Vec<usize> = shares.iter().map(|s| (s * n as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut remainders: Vec<(usize, f64)> = shares
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s * n as f64 - counts[i] as f64))
        .collect();
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for k in 0..(n - assigned) {
        counts[remainders[k % shares.len()].0] += 1;
    }
    for (community, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(SynthError::InfeasibleShares { community });
        }
    }
    Ok(counts)
}

fn validate_shares(shares: &[f64], expected_len: usize) -> Result<(), SynthError> {
    if shares.len() != expected_len {
        return Err(SynthError::BadConfig(format!(
            "expected {expected_len} shares, got {}",
            shares.len()
        )));
    }
    if shares.iter().any(|&s| s <= 0.0) {
        return Err(SynthError::BadShares(shares.iter().sum()));
    }
    let sum: f64 = shares.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(SynthError::BadShares(sum));
    }
    Ok(())
}

/// Generates a planted-community dataset: sources split over communities by
/// share, every user homed in one community and sending each interaction home
/// with probability `p_home` (uniformly elsewhere otherwise). Byte-identical
/// output under a fixed seed.
pub fn generate(config: &PlantedConfig) -> Result<GeneratedData, SynthError> {
    validate_shares(&config.source_shares, config.n_communities)?;
    if let Some(us) = &config.user_home_shares {
        validate_shares(us, config.n_communities)?;
    }
    if !(0.0..=1.0).contains(&config.p_home) {
        return Err(SynthError::BadConfig(format!("p_home {} outside [0, 1]", config.p_home)));
    }
    if config.mean_interactions_per_user <= 0.0 {
        return Err(SynthError::BadConfig("mean_interactions_per_user must be positive".into()));
    }
    if config.posts_per_source == 0 {
        return Err(SynthError::BadConfig("posts_per_source must be at least 1".into()));
    }
    if let Some(s) = &config.sentiment {
        if s.post_valence_by_community.len() != config.n_communities
            || s.comment_valence_by_community.len() != config.n_communities
        {
            return Err(SynthError::BadConfig(
                "sentiment valence vectors must have one entry per community".into(),
            ));
        }
        for &v in s
            .post_valence_by_community
            .iter()
            .chain(&s.comment_valence_by_community)
        {
            if !(-1.0..=1.0).contains(&v) {
                return Err(SynthError::BadConfig(format!("valence {v} outside [-1, 1]")));
            }
        }
        if s.comments_per_post == 0 || s.n_entities == 0 || s.entities_per_post == 0 {
            return Err(SynthError::BadConfig("sentiment planting needs positive counts".into()));
        }
    }

    let platform = config.platform.clone().unwrap_or(Platform::Facebook);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // sources per community, in community order
    let counts = allocate(config.n_sources, &config.source_shares)?;
    let mut sources = Vec::with_capacity(config.n_sources);
    let mut community_of_source = Vec::with_capacity(config.n_sources);
    let mut sources_by_community: Vec<Vec<usize>> = vec![Vec::new(); config.n_communities];
    for (community, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let idx = sources.len();
            sources.push(SourceAccount {
                source_id: format!("s{idx:03}"),
                platform: platform.clone(),
                display_name: format!("Source {idx:03}"),
            });
            community_of_source.push(community as u32);
            sources_by_community[community].push(idx);
        }
    }

    // posts, with planted texts when sentiment is on
    let base_ts = chrono::Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap();
    let mut posts = Vec::with_capacity(config.n_sources * config.posts_per_source);
    let mut posts_by_source: Vec<Vec<usize>> = vec![Vec::new(); config.n_sources];
    for s in 0..config.n_sources {
        for k in 0..config.posts_per_source {
            let idx = posts.len();
            let text = match &config.sentiment {
                Some(plant) => {
                    let community = community_of_source[s] as usize;
                    let mut t = valence_token(plant.post_valence_by_community[community]);
                    for j in 0..plant.entities_per_post {
                        let e = (idx + j) % plant.n_entities;
                        t.push(' ');
                        t.push_str(&format!("entity{e:03}"));
                    }
                    t
                }
                None => String::new(),
            };
            posts.push(Post {
                post_id: format!("p{s:03}x{k:03}"),
                source_id: sources[s].source_id.clone(),
                timestamp: base_ts + chrono::Duration::minutes(idx as i64),
                text,
                urls: vec![],
                platform: platform.clone(),
                declared_engagement_total: None,
            });
            posts_by_source[s].push(idx);
        }
    }

    // engagement interactions
    let user_shares = config
        .user_home_shares
        .clone()
        .unwrap_or_else(|| config.source_shares.clone());
    let poisson = Poisson::new(config.mean_interactions_per_user)
        .map_err(|e| SynthError::BadConfig(e.to_string()))?;
    let mut interactions = Vec::new();
    let mut seen: HashSet<(usize, usize, InteractionKind)> = HashSet::new();
    let mut user_homes = BTreeMap::new();
    for u in 0..config.n_users {
        let user_id = format!("u{u:05}");
        let home = draw_categorical(&mut rng, &user_shares);
        user_homes.insert(user_id.clone(), home as u32);
        let n_acts = poisson.sample(&mut rng) as u64;
        for _ in 0..n_acts {
            let community = if config.n_communities == 1 || rng.random::<f64>() < config.p_home {
                home
            } else {
                // uniform among the other communities
                let mut c = rng.random_range(0..config.n_communities - 1);
                if c >= home {
                    c += 1;
                }
                c
            };
            let members = &sources_by_community[community];
            let s = members[rng.random_range(0..members.len())];
            let p = posts_by_source[s][rng.random_range(0..config.posts_per_source)];
            let kind = match platform {
                Platform::Twitter => {
                    if rng.random::<bool>() {
                        InteractionKind::Favorite
                    } else {
                        InteractionKind::Retweet
                    }
                }
                _ => InteractionKind::Like,
            };
            if !seen.insert((u, p, kind)) {
                continue; // a user acts on a post once per kind
            }
            interactions.push(InteractionRecord {
                user_id: user_id.clone(),
                post_id: posts[p].post_id.clone(),
                kind,
                text: None,
                timestamp: None,
            });
        }
    }

    // planted comments
    let mut lexicon = None;
    let mut gazetteer = None;
    if let Some(plant) = &config.sentiment {
        let comment_kind = match platform {
            Platform::Twitter => InteractionKind::Reply,
            _ => InteractionKind::Comment,
        };
        let n_commenters = 50.max(plant.comments_per_post + 1);
        for (idx, post) in posts.iter().enumerate() {
            let s = posts_by_source
                .iter()
                .position(|ps| ps.contains(&idx))
                .expect("post belongs to a source");
            let community = community_of_source[s] as usize;
            let token = valence_token(plant.comment_valence_by_community[community]);
            for j in 0..plant.comments_per_post {
                let commenter = (idx * plant.comments_per_post + j) % n_commenters;
                interactions.push(InteractionRecord {
                    user_id: format!("c{commenter:04}"),
                    post_id: post.post_id.clone(),
                    kind: comment_kind,
                    text: Some(token.clone()),
                    timestamp: None,
                });
            }
        }

        let mut valences: BTreeMap<String, f64> = BTreeMap::new();
        for &v in plant
            .post_valence_by_community
            .iter()
            .chain(&plant.comment_valence_by_community)
        {
            valences.insert(valence_token(v), v);
        }
        let mut lex = String::new();
        for (token, v) in &valences {
            lex.push_str(&format!("{token},{v}\n"));
        }
        lexicon = Some(lex);
        let mut gaz = String::new();
        for e in 0..plant.n_entities {
            gaz.push_str(&format!("entity{e:03}\n"));
        }
        gazetteer = Some(gaz);
    }

    let source_ids: Vec<String> = sources.iter().map(|s| s.source_id.clone()).collect();
    let ground_truth = Partition::from_labels(source_ids, &community_of_source);
    let dataset = Dataset {
        platform,
        sources,
        posts,
        interactions,
    };
    debug_assert!(dataset.validate().is_ok());
    Ok(GeneratedData {
        dataset,
        ground_truth,
        user_homes,
        lexicon,
        gazetteer,
    })
}

// ---------------------------------------------------------------------------
// Oracles. Each one re-derives its quantity from the public graph accessors
// with its own arithmetic; none of them call into the main implementations.
// ---------------------------------------------------------------------------

/// Modularity by the definition: (1/2m) Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j),
/// evaluated as an explicit double loop over ordered node pairs.
pub fn modularity_oracle(graph: &SourceGraph, labels: &[u32]) -> f64 {
    let n = graph.n_nodes();
    assert_eq!(labels.len(), n);
    let degrees: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let two_m: f64 = degrees.iter().sum();
    assert!(two_m > 0.0, "modularity oracle needs positive total weight");
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                continue;
            }
            let a_ij = if i == j { 0.0 } else { graph.weight(i, j) };
            q += a_ij - degrees[i] * degrees[j] / two_m;
        }
    }
    q / two_m
}

/// Two-level map equation by the definition L = q H(Q) + Σ_i p_i H(P_i),
/// with module exit rates from explicit boundary sums.
pub fn map_equation_oracle(graph: &SourceGraph, labels: &[u32]) -> f64 {
    let n = graph.n_nodes();
    assert_eq!(labels.len(), n);
    let degrees: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let two_m: f64 = degrees.iter().sum();
    if two_m <= 0.0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
    let mut exit = vec![0.0; k];
    for (a, b, w) in graph.edges() {
        if labels[a] != labels[b] {
            exit[labels[a] as usize] += w;
            exit[labels[b] as usize] += w;
        }
    }
    let q_i: Vec<f64> = exit.iter().map(|e| e / two_m).collect();
    let q: f64 = q_i.iter().sum();
    let h = |probs: &[f64]| -> f64 {
        -probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    };
    let mut l = 0.0;
    if q > 0.0 {
        let normalized: Vec<f64> = q_i.iter().map(|x| x / q).collect();
        l += q * h(&normalized);
    }
    for module in 0..k {
        let pi_members: Vec<f64> = (0..n)
            .filter(|&i| labels[i] as usize == module)
            .map(|i| degrees[i] / two_m)
            .collect();
        let p_i = q_i[module] + pi_members.iter().sum::<f64>();
        if p_i <= 0.0 {
            continue;
        }
        let mut within: Vec<f64> = vec![q_i[module] / p_i];
        within.extend(pi_members.iter().map(|pi| pi / p_i));
        l += p_i * h(&within);
    }
    l
}

/// Direct evaluation of one projected edge weight, recomputing neighborhoods,
/// maxima, and the similarity formula from the raw weight accessor.
pub fn projection_weight_oracle(
    g: &BipartiteGraph,
    kind: ProjectionKind,
    a: usize,
    b: usize,
) -> f64 {
    let users_of = |s: usize| -> BTreeSet<usize> {
        (0..g.n_users()).filter(|&u| g.weight(s, u) > 0).collect()
    };
    let ua = users_of(a);
    let ub = users_of(b);
    let common: Vec<usize> = ua.intersection(&ub).copied().collect();
    match kind {
        ProjectionKind::EdgeCount => common.len() as f64,
        ProjectionKind::Jaccard => {
            let union = ua.union(&ub).count();
            if union == 0 {
                0.0
            } else {
                common.len() as f64 / union as f64
            }
        }
        ProjectionKind::ActivityJaccard => {
            if common.is_empty() {
                return 0.0;
            }
            let mut global_max = 0u64;
            for s in 0..g.n_sources() {
                for u in 0..g.n_users() {
                    global_max = global_max.max(g.weight(s, u));
                }
            }
            let mut sum = 0.0;
            for &u in &common {
                let mut user_max = 0u64;
                for s in 0..g.n_sources() {
                    user_max = user_max.max(g.weight(s, u));
                }
                let wa = g.weight(a, u) as f64;
                let wb = g.weight(b, u) as f64;
                sum += (1.0 - (wa - wb).abs() / user_max as f64)
                    * ((wa + wb) / (2.0 * global_max as f64));
            }
            let union = ua.union(&ub).count() as f64;
            (sum / common.len() as f64) * (common.len() as f64 / union)
        }
    }
}

const EXHAUSTIVE_MAX_NODES: usize = 10;
const BRUTE_METRICS_MAX_NODES: usize = 12;

/// Iterator over all set partitions of {0..n} as restricted growth strings.
pub struct SetPartitions {
    n: usize,
    current: Vec<u32>,
    maxima: Vec<u32>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> SetPartitions {
        SetPartitions {
            n,
            current: vec![0; n],
            maxima: vec![0; n],
            done: n == 0,
        }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // advance the restricted growth string: a[i] <= max(a[..i]) + 1
        let mut i = self.n;
        loop {
            if i == 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let cap = self.maxima[i - 1] + 1;
            if self.current[i] < cap {
                self.current[i] += 1;
                self.maxima[i] = self.maxima[i - 1].max(self.current[i]);
                for j in (i + 1)..self.n {
                    self.current[j] = 0;
                    self.maxima[j] = self.maxima[j - 1];
                }
                break;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Modularity,
    MapEquation,
}

/// Enumerates every set partition (Bell-number guarded at 10 nodes) and
/// returns the objective-optimal one: maximum modularity or minimum
/// description length. Ties keep the first partition in enumeration order.
pub fn exhaustive_best_partition(
    graph: &SourceGraph,
    objective: Objective,
) -> Result<(Partition, f64), SynthError> {
    let n = graph.n_nodes();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(SynthError::TooLarge {
            n,
            max: EXHAUSTIVE_MAX_NODES,
        });
    }
    let mut best: Option<(Vec<u32>, f64)> = None;
    for labels in SetPartitions::new(n) {
        let value = match objective {
            Objective::Modularity => modularity_oracle(graph, &labels),
            Objective::MapEquation => map_equation_oracle(graph, &labels),
        };
        let better = match (&best, objective) {
            (None, _) => true,
            (Some((_, b)), Objective::Modularity) => value > *b,
            (Some((_, b)), Objective::MapEquation) => value < *b,
        };
        if better {
            best = Some((labels, value));
        }
    }
    let (labels, value) = best.expect("at least one partition exists");
    Ok((Partition::from_graph_labels(graph, &labels), value))
}

/// Rand and NMI from explicit pair enumeration and an explicit contingency
/// table. Node sets must match; n is capped at 12.
pub fn brute_force_metrics(p: &Partition, q: &Partition) -> Result<(f64, f64), SynthError> {
    let n = p.len();
    if n > BRUTE_METRICS_MAX_NODES {
        return Err(SynthError::TooLarge {
            n,
            max: BRUTE_METRICS_MAX_NODES,
        });
    }
    if n < 2 {
        return Err(SynthError::BadConfig("need at least 2 nodes".into()));
    }
    // align q's labels by scanning node ids
    let mut q_labels = Vec::with_capacity(n);
    for node in p.nodes() {
        let pos = q
            .nodes()
            .iter()
            .position(|m| m == node)
            .ok_or_else(|| SynthError::BadConfig(format!("node {node:?} missing from q")))?;
        q_labels.push(q.labels()[pos]);
    }
    let p_labels = p.labels();

    // Rand: explicit loop over unordered pairs
    let mut agree = 0u64;
    let mut pairs = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            pairs += 1;
            let same_p = p_labels[i] == p_labels[j];
            let same_q = q_labels[i] == q_labels[j];
            if same_p == same_q {
                agree += 1;
            }
        }
    }
    let rand = agree as f64 / pairs as f64;

    // NMI: explicit contingency table
    let mut table: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut row: BTreeMap<u32, u64> = BTreeMap::new();
    let mut col: BTreeMap<u32, u64> = BTreeMap::new();
    for i in 0..n {
        *table.entry((p_labels[i], q_labels[i])).or_insert(0) += 1;
        *row.entry(p_labels[i]).or_insert(0) += 1;
        *col.entry(q_labels[i]).or_insert(0) += 1;
    }
    let nf = n as f64;
    let ent = |counts: &BTreeMap<u32, u64>| -> f64 {
        -counts
            .values()
            .map(|&c| {
                let f = c as f64 / nf;
                f * f.log2()
            })
            .sum::<f64>()
    };
    let h_p = ent(&row);
    let h_q = ent(&col);
    let nmi = if h_p == 0.0 && h_q == 0.0 {
        1.0
    } else if h_p == 0.0 || h_q == 0.0 {
        0.0
    } else {
        let mut mi = 0.0;
        for (&(r, c), &count) in &table {
            let pij = count as f64 / nf;
            let pi = row[&r] as f64 / nf;
            let pj = col[&c] as f64 / nf;
            mi += pij * (pij / (pi * pj)).log2();
        }
        2.0 * mi / (h_p + h_q)
    };
    Ok((rand, nmi))
}

// ---------------------------------------------------------------------------
// Random inputs for property and acceptance tests.
// ---------------------------------------------------------------------------

/// Random bipartite graph with up to the given sources/users and weights in
/// 1..=max_weight. Every user gets at least one edge.
pub fn random_bipartite(
    rng: &mut ChaCha8Rng,
    max_sources: usize,
    max_users: usize,
    max_weight: u64,
) -> BipartiteGraph {
    let n_sources = rng.random_range(2..=max_sources.max(2));
    let n_users = rng.random_range(1..=max_users.max(1));
    let mut edges = Vec::new();
    for u in 0..n_users {
        let degree = rng.random_range(1..=n_sources);
        let mut sources: Vec<usize> = (0..n_sources).collect();
        for i in 0..degree {
            let j = rng.random_range(i..n_sources);
            sources.swap(i, j);
            edges.push((sources[i], u, rng.random_range(1..=max_weight)));
        }
    }
    BipartiteGraph::from_parts(
        crate::bipartite::Channel::Engagement,
        (0..n_sources).map(|i| format!("s{i}")).collect(),
        (0..n_users).map(|i| format!("u{i}")).collect(),
        &edges,
    )
}

/// Random partition over `n` shared nodes.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let k = rng.random_range(1..=n);
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..k) as u32).collect();
    Partition::from_labels((0..n).map(|i| format!("n{i}")).collect(), &labels)
}
