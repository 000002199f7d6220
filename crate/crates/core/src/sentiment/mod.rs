//! Entity and sentiment annotation plus the derived analyses: sentiment
//! distributions, per-entity emotional distances between communities and
//! platforms, and controversial-entity detection from comment responses.
//!
//! Annotation itself is pluggable: the deterministic offline
//! [`LexiconAnnotator`] ships with the crate, while remote services implement
//! [`remote::AnnotationTransport`] behind the same [`Annotator`] contract,
//! usually wrapped in a content-hash [`cache::AnnotationCache`].

pub mod cache;
pub mod lexicon;
pub mod remote;

pub use lexicon::{Gazetteer, Lexicon, LexiconAnnotator};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::Partition;
use crate::model::Post;

/// Default controversy threshold on the |user - post| emotional distance.
pub const CONTROVERSY_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot annotate empty text")]
    EmptyText,
    #[error("remote annotator failed on {context}: {message} (retryable: {retryable})")]
    Remote {
        context: String,
        message: String,
        retryable: bool,
    },
    #[error("annotation cache error at {path}: {message}")]
    Cache { path: String, message: String },
    #[error("sentiment score {0} outside [-1, 1]")]
    ScoreOutOfRange(f64),
    #[error("no scores to bin")]
    EmptyScores,
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("entity {entity:?} has means in {got} communities, need at least 2")]
    TooFewCommunities { entity: String, got: usize },
    #[error("records for entity {expected:?} mixed with {found:?}")]
    MixedEntities { expected: String, found: String },
    #[error("entity {entity:?} fails the cross-platform filter: {reason}")]
    CrossPlatformFilter { entity: String, reason: String },
}

/// Sentiment in [-1, 1] (-1 negative, 0 neutral, 1 positive) plus the
/// canonical entities found in the text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub sentiment: f64,
    pub entities: BTreeSet<String>,
}

/// The annotation contract: text in, sentiment and entities out. When
/// `deterministic` holds, the same input text always yields the same
/// annotation.
pub trait Annotator: Send + Sync {
    fn name(&self) -> &str;
    fn deterministic(&self) -> bool;
    fn annotate(&self, text: &str) -> Result<Annotation, SentimentError>;
}

/// Annotates `(id, text)` pairs with at most `max_in_flight` texts in flight
/// at once. Whitespace-only texts are skipped. Results come back keyed by id;
/// on failure the error of the earliest failing item is returned.
pub fn annotate_batch(
    items: &[(String, String)],
    annotator: &dyn Annotator,
    max_in_flight: usize,
) -> Result<BTreeMap<String, Annotation>, SentimentError> {
    let workers = max_in_flight.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Annotation, SentimentError>>>> =
        Mutex::new(vec![None; items.len()].into_iter().map(|_: Option<()>| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let (_, text) = &items[i];
                if text.trim().is_empty() {
                    continue;
                }
                let res = annotator.annotate(text);
                results.lock().expect("annotation results lock").as_mut_slice()[i] = Some(res);
            });
        }
    });

    let results = results.into_inner().expect("annotation results lock");
    let mut out = BTreeMap::new();
    for (i, slot) in results.into_iter().enumerate() {
        match slot {
            Some(Ok(a)) => {
                out.insert(items[i].0.clone(), a);
            }
            Some(Err(e)) => return Err(e),
            None => {} // skipped empty text
        }
    }
    Ok(out)
}

/// One bin of a probability density over [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub density: f64,
}

/// Histogram density of sentiment scores over [-1, 1]; the densities
/// integrate to 1.
pub fn sentiment_pdf(scores: &[f64], bins: usize) -> Result<Vec<DensityBin>, SentimentError> {
    if scores.is_empty() {
        return Err(SentimentError::EmptyScores);
    }
    if bins < 2 {
        return Err(SentimentError::TooFewBins(bins));
    }
    for &s in scores {
        if !(-1.0..=1.0).contains(&s) {
            return Err(SentimentError::ScoreOutOfRange(s));
        }
    }
    let width = 2.0 / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in scores {
        let idx = (((s + 1.0) / 2.0) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let n = scores.len() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &count)| DensityBin {
            lo: -1.0 + i as f64 * width,
            hi: -1.0 + (i + 1) as f64 * width,
            count,
            density: count as f64 / (n * width),
        })
        .collect())
}

/// Mean sentiment of the posts containing an entity within one community.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityCommunitySentiment {
    pub entity: String,
    pub community: u32,
    pub mean_sentiment: f64,
    /// Number of supporting posts.
    pub support: u64,
}

/// Groups post sentiments by (entity, community of the publishing source) and
/// averages them. The post's overall sentiment is attributed to every entity
/// it mentions. Groups with fewer than `min_support` posts are dropped.
///
/// With `shared_among` set, only entities present in *all* the listed
/// communities survive, and their groups are restricted to those communities.
/// Posts whose source is not covered by the partition are skipped.
pub fn entity_community_sentiment(
    annotations: &BTreeMap<String, Annotation>,
    posts: &[Post],
    partition: &Partition,
    min_support: u64,
    shared_among: Option<&[u32]>,
) -> Vec<EntityCommunitySentiment> {
    let mut sums: BTreeMap<(String, u32), (f64, u64)> = BTreeMap::new();
    for post in posts {
        let Some(annotation) = annotations.get(&post.post_id) else {
            continue;
        };
        let Some(community) = partition.label_of(&post.source_id) else {
            continue;
        };
        for entity in &annotation.entities {
            let slot = sums.entry((entity.clone(), community)).or_insert((0.0, 0));
            slot.0 += annotation.sentiment;
            slot.1 += 1;
        }
    }

    let mut records: Vec<EntityCommunitySentiment> = sums
        .into_iter()
        .filter(|(_, (_, support))| *support >= min_support.max(1))
        .map(|((entity, community), (sum, support))| EntityCommunitySentiment {
            entity,
            community,
            mean_sentiment: sum / support as f64,
            support,
        })
        .collect();

    if let Some(required) = shared_among {
        let mut present: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
        for r in &records {
            present.entry(r.entity.as_str()).or_default().insert(r.community);
        }
        let keep: BTreeSet<String> = present
            .iter()
            .filter(|(_, comms)| required.iter().all(|c| comms.contains(c)))
            .map(|(e, _)| e.to_string())
            .collect();
        records.retain(|r| keep.contains(&r.entity) && required.contains(&r.community));
    }
    records
}

/// Per-entity mean absolute pairwise difference of community sentiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionalDistanceRecord {
    pub entity: String,
    pub community_means: BTreeMap<u32, f64>,
    pub mean_distance: f64,
}

/// Mean of |mean_i - mean_j| over all community pairs of one entity's
/// records. Needs means in at least two communities.
pub fn emotional_distance(
    records: &[EntityCommunitySentiment],
) -> Result<EmotionalDistanceRecord, SentimentError> {
    let Some(first) = records.first() else {
        return Err(SentimentError::TooFewCommunities {
            entity: String::new(),
            got: 0,
        });
    };
    let entity = first.entity.clone();
    let mut community_means = BTreeMap::new();
    for r in records {
        if r.entity != entity {
            return Err(SentimentError::MixedEntities {
                expected: entity,
                found: r.entity.clone(),
            });
        }
        community_means.insert(r.community, r.mean_sentiment);
    }
    if community_means.len() < 2 {
        return Err(SentimentError::TooFewCommunities {
            entity,
            got: community_means.len(),
        });
    }
    // summing over value-sorted means keeps the result independent of the
    // community labeling down to the last bit
    let mut means: Vec<f64> = community_means.values().copied().collect();
    means.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut pairs = 0.0;
    for i in 0..means.len() {
        for j in (i + 1)..means.len() {
            sum += (means[i] - means[j]).abs();
            pairs += 1.0;
        }
    }
    Ok(EmotionalDistanceRecord {
        entity,
        community_means,
        mean_distance: sum / pairs,
    })
}

/// Distance records for every entity with enough communities, sorted in
/// descending order of mean emotional distance (ties by entity name).
pub fn emotional_distances(
    records: &[EntityCommunitySentiment],
) -> Vec<EmotionalDistanceRecord> {
    let mut by_entity: BTreeMap<&str, Vec<EntityCommunitySentiment>> = BTreeMap::new();
    for r in records {
        by_entity.entry(r.entity.as_str()).or_default().push(r.clone());
    }
    let mut out: Vec<EmotionalDistanceRecord> = by_entity
        .values()
        .filter_map(|rs| emotional_distance(rs).ok())
        .collect();
    out.sort_by(|a, b| {
        b.mean_distance
            .total_cmp(&a.mean_distance)
            .then_with(|| a.entity.cmp(&b.entity))
    });
    out
}

/// One entity's aggregated sentiment on two platforms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossPlatformRecord {
    pub entity: String,
    /// Support-weighted mean over platform A's community means.
    pub mean_a: f64,
    pub mean_b: f64,
    /// mean_a - mean_b: positive when A presents the entity more positively.
    pub difference: f64,
    pub support_a: u64,
    pub support_b: u64,
    pub communities_a: u64,
    pub communities_b: u64,
}

/// Aggregates one entity across two platforms. The entity must appear in at
/// least two communities on each platform; the per-platform aggregate is the
/// support-weighted mean of its community means.
pub fn cross_platform_distance(
    entity: &str,
    platform_a: &[EntityCommunitySentiment],
    platform_b: &[EntityCommunitySentiment],
) -> Result<CrossPlatformRecord, SentimentError> {
    let aggregate = |records: &[EntityCommunitySentiment],
                     side: &str|
     -> Result<(f64, u64, u64), SentimentError> {
        let mine: Vec<&EntityCommunitySentiment> =
            records.iter().filter(|r| r.entity == entity).collect();
        let communities: BTreeSet<u32> = mine.iter().map(|r| r.community).collect();
        if communities.len() < 2 {
            return Err(SentimentError::CrossPlatformFilter {
                entity: entity.to_string(),
                reason: format!(
                    "present in {} communities on platform {side}, need at least 2",
                    communities.len()
                ),
            });
        }
        let support: u64 = mine.iter().map(|r| r.support).sum();
        let weighted: f64 = mine
            .iter()
            .map(|r| r.mean_sentiment * r.support as f64)
            .sum();
        Ok((weighted / support as f64, support, communities.len() as u64))
    };
    let (mean_a, support_a, communities_a) = aggregate(platform_a, "A")?;
    let (mean_b, support_b, communities_b) = aggregate(platform_b, "B")?;
    Ok(CrossPlatformRecord {
        entity: entity.to_string(),
        mean_a,
        mean_b,
        difference: mean_a - mean_b,
        support_a,
        support_b,
        communities_a,
        communities_b,
    })
}

/// Post-versus-commenters emotional distance for one (entity, community).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControversyRecord {
    pub entity: String,
    pub community: u32,
    /// Mean sentiment of the supporting posts.
    pub post_mean: f64,
    /// Mean over supporting posts of each post's mean comment sentiment.
    pub user_mean: f64,
    /// user_mean - post_mean.
    pub distance: f64,
    pub controversial: bool,
    /// Supporting posts in this (entity, community) group.
    pub support: u64,
}

/// Users' emotional response to entities: for every entity mentioned by at
/// least `min_posts` annotated posts, compares the posts' sentiment with the
/// sentiment of their comments, per community. A post's user side is the mean
/// of its comments; posts without comments contribute only to the post side.
/// Groups where no post has comments are dropped. `controversial` flags
/// |distance| strictly above `threshold`. Output is sorted by community, then
/// ascending distance, so the sign change is visible per community.
pub fn user_response(
    posts: &[Post],
    post_annotations: &BTreeMap<String, Annotation>,
    comment_sentiments: &[(String, f64)],
    partition: &Partition,
    threshold: f64,
    min_posts: u64,
) -> Vec<ControversyRecord> {
    // per-post mean of comment sentiments
    let mut comment_sums: BTreeMap<&str, (f64, u64)> = BTreeMap::new();
    for (post_id, s) in comment_sentiments {
        let slot = comment_sums.entry(post_id.as_str()).or_insert((0.0, 0));
        slot.0 += s;
        slot.1 += 1;
    }
    let post_user_mean: BTreeMap<&str, f64> = comment_sums
        .into_iter()
        .map(|(id, (sum, n))| (id, sum / n as f64))
        .collect();

    // entity -> supporting posts (annotated), with community
    let mut entity_posts: BTreeMap<&str, Vec<(&Post, f64)>> = BTreeMap::new();
    for post in posts {
        let Some(annotation) = post_annotations.get(&post.post_id) else {
            continue;
        };
        for entity in &annotation.entities {
            entity_posts
                .entry(entity.as_str())
                .or_default()
                .push((post, annotation.sentiment));
        }
    }

    let mut out = Vec::new();
    for (entity, supporting) in entity_posts {
        if (supporting.len() as u64) < min_posts.max(1) {
            continue;
        }
        let mut groups: BTreeMap<u32, (f64, u64, f64, u64)> = BTreeMap::new();
        for (post, post_sentiment) in supporting {
            let Some(community) = partition.label_of(&post.source_id) else {
                continue;
            };
            let g = groups.entry(community).or_insert((0.0, 0, 0.0, 0));
            g.0 += post_sentiment;
            g.1 += 1;
            if let Some(&um) = post_user_mean.get(post.post_id.as_str()) {
                g.2 += um;
                g.3 += 1;
            }
        }
        for (community, (post_sum, post_n, user_sum, user_n)) in groups {
            if user_n == 0 {
                continue; // no comments anywhere in this group
            }
            let post_mean = post_sum / post_n as f64;
            let user_mean = user_sum / user_n as f64;
            let distance = user_mean - post_mean;
            out.push(ControversyRecord {
                entity: entity.to_string(),
                community,
                post_mean,
                user_mean,
                distance,
                controversial: distance.abs() > threshold,
                support: post_n,
            });
        }
    }
    out.sort_by(|a, b| {
        a.community
            .cmp(&b.community)
            .then(a.distance.total_cmp(&b.distance))
            .then_with(|| a.entity.cmp(&b.entity))
    });
    out
}

/// Mean comment sentiment per user, for export alongside the per-post view.
pub fn user_mean_sentiments(comments: &[(String, f64)]) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<&str, (f64, u64)> = BTreeMap::new();
    for (user, s) in comments {
        let slot = sums.entry(user.as_str()).or_insert((0.0, 0));
        slot.0 += s;
        slot.1 += 1;
    }
    sums.into_iter()
        .map(|(u, (sum, n))| (u.to_string(), sum / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Platform;
    use chrono::TimeZone;

    fn post(id: &str, source: &str) -> Post {
        Post {
            post_id: id.into(),
            source_id: source.into(),
            timestamp: chrono::Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap(),
            text: String::new(),
            urls: vec![],
            platform: Platform::Facebook,
            declared_engagement_total: None,
        }
    }

    fn annotation(sentiment: f64, entities: &[&str]) -> Annotation {
        Annotation {
            sentiment,
            entities: entities.iter().map(|e| e.to_string()).collect(),
        }
    }

    fn ecs(entity: &str, community: u32, mean: f64, support: u64) -> EntityCommunitySentiment {
        EntityCommunitySentiment {
            entity: entity.into(),
            community,
            mean_sentiment: mean,
            support,
        }
    }

    #[test]
    fn pdf_point_mass_occupies_single_bin() {
        let bins = sentiment_pdf(&[0.0, 0.0, 0.0], 10).unwrap();
        let occupied: Vec<&DensityBin> = bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(occupied.len(), 1);
        assert_eq!(occupied[0].count, 3);
        let integral: f64 = bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert!((integral - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pdf_rejects_bad_input() {
        assert!(matches!(sentiment_pdf(&[], 10), Err(SentimentError::EmptyScores)));
        assert!(matches!(sentiment_pdf(&[0.0], 1), Err(SentimentError::TooFewBins(1))));
        assert!(matches!(
            sentiment_pdf(&[1.5], 10),
            Err(SentimentError::ScoreOutOfRange(_))
        ));
    }

    #[test]
    fn pdf_boundary_scores_land_in_edge_bins() {
        let bins = sentiment_pdf(&[-1.0, 1.0], 4).unwrap();
        assert_eq!(bins[0].count, 1);
        assert_eq!(bins[3].count, 1);
        let integral: f64 = bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert!((integral - 1.0).abs() < 1e-9);
    }

    fn partition_abc() -> Partition {
        Partition::from_labels(
            vec!["a".into(), "b".into(), "c".into()],
            &[0, 1, 2],
        )
    }

    #[test]
    fn entity_community_means_are_arithmetic_means() {
        let posts = vec![post("p1", "a"), post("p2", "a"), post("p3", "b")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.2, &["renzi"]));
        ann.insert("p2".to_string(), annotation(0.4, &["renzi"]));
        ann.insert("p3".to_string(), annotation(-0.5, &["renzi"]));
        let records = entity_community_sentiment(&ann, &posts, &partition_abc(), 1, None);
        let c0 = records.iter().find(|r| r.community == 0).unwrap();
        assert!((c0.mean_sentiment - 0.3).abs() < 1e-15);
        assert_eq!(c0.support, 2);
    }

    #[test]
    fn shared_flag_excludes_partially_present_entities() {
        let posts = vec![post("p1", "a"), post("p2", "b"), post("p3", "c")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.1, &["everywhere", "partial"]));
        ann.insert("p2".to_string(), annotation(0.2, &["everywhere", "partial"]));
        ann.insert("p3".to_string(), annotation(0.3, &["everywhere"]));
        let records =
            entity_community_sentiment(&ann, &posts, &partition_abc(), 1, Some(&[0, 1, 2]));
        let entities: BTreeSet<&str> = records.iter().map(|r| r.entity.as_str()).collect();
        assert!(entities.contains("everywhere"));
        assert!(!entities.contains("partial"));
    }

    #[test]
    fn group_by_matches_naive_reaggregation() {
        let posts: Vec<Post> = (0..40)
            .map(|i| post(&format!("p{i}"), ["a", "b", "c"][i % 3]))
            .collect();
        let mut ann = BTreeMap::new();
        for (i, p) in posts.iter().enumerate() {
            let ents: &[&str] = if i % 2 == 0 { &["x", "y"] } else { &["y"] };
            ann.insert(p.post_id.clone(), annotation((i as f64 / 40.0) - 0.5, ents));
        }
        let records = entity_community_sentiment(&ann, &posts, &partition_abc(), 1, None);
        // naive quadratic recomputation
        for r in &records {
            let mut sum = 0.0;
            let mut n = 0u64;
            for p in &posts {
                let a = &ann[&p.post_id];
                let comm = partition_abc().label_of(&p.source_id).unwrap();
                if comm == r.community && a.entities.contains(&r.entity) {
                    sum += a.sentiment;
                    n += 1;
                }
            }
            assert_eq!(r.support, n);
            assert!((r.mean_sentiment - sum / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn emotional_distance_hand_example() {
        // means (0.2, -0.1, 0.1): pairwise |diffs| {0.3, 0.1, 0.2} -> mean 0.2
        let records = vec![ecs("e", 0, 0.2, 1), ecs("e", 1, -0.1, 1), ecs("e", 2, 0.1, 1)];
        let d = emotional_distance(&records).unwrap();
        assert!((d.mean_distance - 0.2).abs() < 1e-15);
    }

    #[test]
    fn emotional_distance_edge_cases() {
        let same = vec![ecs("e", 0, 0.4, 1), ecs("e", 1, 0.4, 1)];
        assert_eq!(emotional_distance(&same).unwrap().mean_distance, 0.0);
        let extreme = vec![ecs("e", 0, 1.0, 1), ecs("e", 1, -1.0, 1)];
        assert_eq!(emotional_distance(&extreme).unwrap().mean_distance, 2.0);
        let single = vec![ecs("e", 0, 0.4, 1)];
        assert!(matches!(
            emotional_distance(&single),
            Err(SentimentError::TooFewCommunities { .. })
        ));
    }

    #[test]
    fn emotional_distance_invariant_under_label_permutation() {
        let a = vec![ecs("e", 0, 0.2, 1), ecs("e", 1, -0.1, 1), ecs("e", 2, 0.1, 1)];
        let b = vec![ecs("e", 5, -0.1, 1), ecs("e", 9, 0.2, 1), ecs("e", 7, 0.1, 1)];
        assert_eq!(
            emotional_distance(&a).unwrap().mean_distance,
            emotional_distance(&b).unwrap().mean_distance
        );
    }

    #[test]
    fn distances_sort_descending() {
        let records = vec![
            ecs("mild", 0, 0.1, 1),
            ecs("mild", 1, 0.2, 1),
            ecs("hot", 0, 0.9, 1),
            ecs("hot", 1, -0.9, 1),
        ];
        let ds = emotional_distances(&records);
        assert_eq!(ds[0].entity, "hot");
        assert_eq!(ds[1].entity, "mild");
    }

    #[test]
    fn cross_platform_weighted_means() {
        // A: means {0.4 (support 1), 0.0 (support 1)} -> 0.2
        // B: means {0.1, 0.1} -> 0.1; difference +0.1
        let a = vec![ecs("e", 0, 0.4, 1), ecs("e", 1, 0.0, 1)];
        let b = vec![ecs("e", 0, 0.1, 1), ecs("e", 1, 0.1, 1)];
        let r = cross_platform_distance("e", &a, &b).unwrap();
        assert!((r.mean_a - 0.2).abs() < 1e-15);
        assert!((r.mean_b - 0.1).abs() < 1e-15);
        assert!((r.difference - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cross_platform_requires_two_communities_per_platform() {
        let a = vec![ecs("e", 0, 0.4, 1), ecs("e", 1, 0.0, 1)];
        let b = vec![ecs("e", 0, 0.1, 1)];
        assert!(matches!(
            cross_platform_distance("e", &a, &b),
            Err(SentimentError::CrossPlatformFilter { .. })
        ));
        // identical aggregates -> difference 0
        let r = cross_platform_distance("e", &a, &a).unwrap();
        assert_eq!(r.difference, 0.0);
    }

    #[test]
    fn user_response_hand_example() {
        // post sentiment 0.1, comments {-0.3, -0.3} -> distance -0.4, controversial
        let posts = vec![post("p1", "a"), post("p2", "a")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.1, &["e"]));
        ann.insert("p2".to_string(), annotation(0.1, &["e"]));
        let comments = vec![
            ("p1".to_string(), -0.3),
            ("p1".to_string(), -0.3),
            ("p2".to_string(), -0.3),
        ];
        let records = user_response(&posts, &ann, &comments, &partition_abc(), 0.2, 2);
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert!((r.distance - (-0.4)).abs() < 1e-12);
        assert!(r.controversial);

        // comments mean 0.2 -> distance +0.1, not controversial
        let mild = vec![("p1".to_string(), 0.2), ("p2".to_string(), 0.2)];
        let records = user_response(&posts, &ann, &mild, &partition_abc(), 0.2, 2);
        assert!((records[0].distance - 0.1).abs() < 1e-12);
        assert!(!records[0].controversial);
    }

    #[test]
    fn user_response_distance_flips_with_swapped_sides() {
        let posts = vec![post("p1", "a"), post("p2", "a")];
        let mut ann_a = BTreeMap::new();
        ann_a.insert("p1".to_string(), annotation(0.5, &["e"]));
        ann_a.insert("p2".to_string(), annotation(0.5, &["e"]));
        let comments_a = vec![("p1".to_string(), -0.25), ("p2".to_string(), -0.25)];

        let mut ann_b = BTreeMap::new();
        ann_b.insert("p1".to_string(), annotation(-0.25, &["e"]));
        ann_b.insert("p2".to_string(), annotation(-0.25, &["e"]));
        let comments_b = vec![("p1".to_string(), 0.5), ("p2".to_string(), 0.5)];

        let ra = user_response(&posts, &ann_a, &comments_a, &partition_abc(), 0.2, 2);
        let rb = user_response(&posts, &ann_b, &comments_b, &partition_abc(), 0.2, 2);
        assert!((ra[0].distance + rb[0].distance).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_flags_every_nonzero_distance() {
        let posts = vec![post("p1", "a"), post("p2", "a")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.1, &["e"]));
        ann.insert("p2".to_string(), annotation(0.1, &["e"]));
        let comments = vec![("p1".to_string(), 0.15), ("p2".to_string(), 0.15)];
        let records = user_response(&posts, &ann, &comments, &partition_abc(), 0.0, 2);
        assert!(records[0].controversial);
    }

    #[test]
    fn entities_below_min_posts_are_dropped() {
        let posts = vec![post("p1", "a")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.1, &["lonely"]));
        let comments = vec![("p1".to_string(), 0.9)];
        assert!(user_response(&posts, &ann, &comments, &partition_abc(), 0.2, 2).is_empty());
    }

    #[test]
    fn posts_without_comments_only_feed_the_post_side() {
        let posts = vec![post("p1", "a"), post("p2", "a")];
        let mut ann = BTreeMap::new();
        ann.insert("p1".to_string(), annotation(0.4, &["e"]));
        ann.insert("p2".to_string(), annotation(0.0, &["e"]));
        let comments = vec![("p1".to_string(), 0.4)];
        let records = user_response(&posts, &ann, &comments, &partition_abc(), 0.2, 2);
        let r = &records[0];
        assert!((r.post_mean - 0.2).abs() < 1e-12); // both posts
        assert!((r.user_mean - 0.4).abs() < 1e-12); // only the commented post
    }

    #[test]
    fn per_user_means() {
        let comments = vec![
            ("u1".to_string(), 0.2),
            ("u1".to_string(), 0.4),
            ("u2".to_string(), -1.0),
        ];
        let means = user_mean_sentiments(&comments);
        assert!((means["u1"] - 0.3).abs() < 1e-15);
        assert_eq!(means["u2"], -1.0);
    }
}
