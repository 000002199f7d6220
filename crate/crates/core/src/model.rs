//! Domain model: platforms, sources, posts, interactions, datasets, and the
//! dataset-level operations (topic filtering and breakdown statistics).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::text;

/// Platform a dataset was exported from. The label is fixed at ingestion and
/// never inferred afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Platform {
    Facebook,
    Twitter,
    Other(String),
}

impl Platform {
    pub fn as_str(&self) -> &str {
        match self {
            Platform::Facebook => "facebook",
            Platform::Twitter => "twitter",
            Platform::Other(name) => name,
        }
    }

    pub fn parse(s: &str) -> Platform {
        match s {
            "facebook" => Platform::Facebook,
            "twitter" => Platform::Twitter,
            other => Platform::Other(other.to_owned()),
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Platform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Platform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Platform::parse(&s))
    }
}

/// One user action on a post. Likes, favorites, and retweets carry no text;
/// comments and replies always do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Like,
    Favorite,
    Retweet,
    Comment,
    Reply,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Like => "like",
            InteractionKind::Favorite => "favorite",
            InteractionKind::Retweet => "retweet",
            InteractionKind::Comment => "comment",
            InteractionKind::Reply => "reply",
        }
    }

    /// Kinds that must carry text.
    pub fn is_textual(self) -> bool {
        matches!(self, InteractionKind::Comment | InteractionKind::Reply)
    }
}

/// A news-source account (Facebook page or Twitter account).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceAccount {
    pub source_id: String,
    pub platform: Platform,
    pub display_name: String,
}

/// A post published by a source account.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub post_id: String,
    pub source_id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub urls: Vec<String>,
    pub platform: Platform,
    /// Total engagement declared by the data supplier, when the export was
    /// truncated (e.g. a 25-user page cap). Used for coverage reporting only.
    pub declared_engagement_total: Option<u64>,
}

/// One interaction of a user with a post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub user_id: String,
    pub post_id: String,
    pub kind: InteractionKind,
    pub text: Option<String>,
    pub timestamp: Option<DateTime<Utc>>,
}

/// A single-platform dataset with referential integrity: every interaction
/// resolves to a post, every post to a source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub platform: Platform,
    pub sources: Vec<SourceAccount>,
    pub posts: Vec<Post>,
    pub interactions: Vec<InteractionRecord>,
}

impl Dataset {
    /// Post lookup by id; index built on demand.
    pub fn post_index(&self) -> BTreeMap<&str, &Post> {
        self.posts.iter().map(|p| (p.post_id.as_str(), p)).collect()
    }

    pub fn source_index(&self) -> BTreeMap<&str, &SourceAccount> {
        self.sources
            .iter()
            .map(|s| (s.source_id.as_str(), s))
            .collect()
    }

    /// Checks referential integrity and per-platform key uniqueness.
    /// Holds by construction after `ingest`; exposed for tests and for
    /// datasets built programmatically.
    pub fn validate(&self) -> Result<(), String> {
        let mut source_ids = BTreeSet::new();
        for s in &self.sources {
            if !source_ids.insert(s.source_id.as_str()) {
                return Err(format!("duplicate source_id {:?}", s.source_id));
            }
        }
        let mut post_ids = BTreeSet::new();
        for p in &self.posts {
            if !post_ids.insert(p.post_id.as_str()) {
                return Err(format!("duplicate post_id {:?}", p.post_id));
            }
            if !source_ids.contains(p.source_id.as_str()) {
                return Err(format!(
                    "post {:?} references unknown source {:?}",
                    p.post_id, p.source_id
                ));
            }
        }
        for i in &self.interactions {
            if !post_ids.contains(i.post_id.as_str()) {
                return Err(format!(
                    "interaction by {:?} references unknown post {:?}",
                    i.user_id, i.post_id
                ));
            }
            if i.kind.is_textual() != i.text.is_some() {
                return Err(format!(
                    "interaction by {:?} on {:?}: {} {} text",
                    i.user_id,
                    i.post_id,
                    i.kind.as_str(),
                    if i.kind.is_textual() { "requires" } else { "forbids" },
                ));
            }
        }
        Ok(())
    }
}

/// Table-1-style dataset breakdown. Every count is reproducible by recounting
/// from the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownStats {
    pub sources: u64,
    pub posts: u64,
    pub likes_favorites: u64,
    pub retweets: u64,
    pub comments: u64,
    pub distinct_users: u64,
    pub distinct_likers_favoriters: u64,
    pub distinct_retweeters: u64,
    pub distinct_commenters: u64,
}

/// Exact counts per Table-1 shape: role-specific distinct-user counts overlap,
/// so their sum can exceed `distinct_users`.
pub fn breakdown(dataset: &Dataset) -> BreakdownStats {
    let mut likes_favorites = 0u64;
    let mut retweets = 0u64;
    let mut comments = 0u64;
    let mut users = BTreeSet::new();
    let mut likers = BTreeSet::new();
    let mut retweeters = BTreeSet::new();
    let mut commenters = BTreeSet::new();
    for i in &dataset.interactions {
        users.insert(i.user_id.as_str());
        match i.kind {
            InteractionKind::Like | InteractionKind::Favorite => {
                likes_favorites += 1;
                likers.insert(i.user_id.as_str());
            }
            InteractionKind::Retweet => {
                retweets += 1;
                retweeters.insert(i.user_id.as_str());
            }
            InteractionKind::Comment | InteractionKind::Reply => {
                comments += 1;
                commenters.insert(i.user_id.as_str());
            }
        }
    }
    BreakdownStats {
        sources: dataset.sources.len() as u64,
        posts: dataset.posts.len() as u64,
        likes_favorites,
        retweets,
        comments,
        distinct_users: users.len() as u64,
        distinct_likers_favoriters: likers.len() as u64,
        distinct_retweeters: retweeters.len() as u64,
        distinct_commenters: commenters.len() as u64,
    }
}

/// Retains posts whose searchable text (post text concatenated with its URL
/// strings) contains at least `min_matches` distinct keywords, matched on word
/// boundaries after case folding and accent stripping. Interactions on dropped
/// posts are dropped; sources are always retained, even with zero posts left.
///
/// Panics if `keywords` is empty or `min_matches` is zero; an empty result is
/// a valid outcome.
pub fn filter_topic(dataset: &Dataset, keywords: &BTreeSet<String>, min_matches: usize) -> Dataset {
    assert!(min_matches >= 1, "min_matches must be at least 1");
    assert!(!keywords.is_empty(), "keyword set must be nonempty");

    let phrases: Vec<text::Phrase> = keywords
        .iter()
        .map(|k| text::phrase(k))
        .filter(|p| !p.is_empty())
        .collect();

    let kept_posts: Vec<Post> = dataset
        .posts
        .iter()
        .filter(|post| {
            let mut searchable = post.text.clone();
            for url in &post.urls {
                searchable.push(' ');
                searchable.push_str(url);
            }
            let toks = text::tokens(&searchable);
            let hits = phrases
                .iter()
                .filter(|p| text::contains_phrase(&toks, p))
                .count();
            hits >= min_matches
        })
        .cloned()
        .collect();

    let kept_ids: BTreeSet<&str> = kept_posts.iter().map(|p| p.post_id.as_str()).collect();
    let kept_interactions = dataset
        .interactions
        .iter()
        .filter(|i| kept_ids.contains(i.post_id.as_str()))
        .cloned()
        .collect();

    Dataset {
        platform: dataset.platform.clone(),
        sources: dataset.sources.clone(),
        posts: kept_posts,
        interactions: kept_interactions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn ts(h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 10, 1, h, 0, 0).unwrap()
    }

    fn source(id: &str) -> SourceAccount {
        SourceAccount {
            source_id: id.into(),
            platform: Platform::Facebook,
            display_name: format!("Source {id}"),
        }
    }

    fn post(id: &str, source: &str, text: &str, urls: &[&str]) -> Post {
        Post {
            post_id: id.into(),
            source_id: source.into(),
            timestamp: ts(1),
            text: text.into(),
            urls: urls.iter().map(|u| u.to_string()).collect(),
            platform: Platform::Facebook,
            declared_engagement_total: None,
        }
    }

    fn like(user: &str, post: &str) -> InteractionRecord {
        InteractionRecord {
            user_id: user.into(),
            post_id: post.into(),
            kind: InteractionKind::Like,
            text: None,
            timestamp: None,
        }
    }

    fn comment(user: &str, post: &str, text: &str) -> InteractionRecord {
        InteractionRecord {
            user_id: user.into(),
            post_id: post.into(),
            kind: InteractionKind::Comment,
            text: Some(text.into()),
            timestamp: None,
        }
    }

    fn referendum_keywords() -> BTreeSet<String> {
        ["Referendum", "Riforma", "Costituzionale"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn fixture() -> Dataset {
        Dataset {
            platform: Platform::Facebook,
            sources: vec![source("a"), source("b")],
            posts: vec![
                post("p1", "a", "Referendum Costituzionale: le ragioni del No", &[]),
                post("p2", "a", "Il referendum si avvicina", &[]),
                post("p3", "b", "", &["http://news.it/riforma-costituzionale-referendum"]),
                post("p4", "b", "Meteo di domani", &[]),
            ],
            interactions: vec![
                like("u1", "p1"),
                like("u1", "p2"),
                like("u2", "p4"),
                comment("u3", "p1", "non sono d'accordo"),
            ],
        }
    }

    #[test]
    fn filter_keeps_posts_with_two_distinct_keywords() {
        let d = fixture();
        let filtered = filter_topic(&d, &referendum_keywords(), 2);
        let ids: Vec<&str> = filtered.posts.iter().map(|p| p.post_id.as_str()).collect();
        // p1 matches two keywords in text, p3 matches three inside the URL,
        // p2 matches only one, p4 none.
        assert_eq!(ids, vec!["p1", "p3"]);
        // interactions on dropped posts are gone, sources stay
        assert_eq!(filtered.interactions.len(), 2);
        assert_eq!(filtered.sources.len(), 2);
        filtered.validate().unwrap();
    }

    #[test]
    fn filter_counts_distinct_keywords_not_occurrences() {
        let d = Dataset {
            posts: vec![post("p", "a", "referendum referendum referendum", &[])],
            interactions: vec![],
            sources: vec![source("a")],
            platform: Platform::Facebook,
        };
        assert!(filter_topic(&d, &referendum_keywords(), 2).posts.is_empty());
        assert_eq!(filter_topic(&d, &referendum_keywords(), 1).posts.len(), 1);
    }

    #[test]
    fn filter_does_not_match_substrings() {
        // "riformato" contains "riforma" as a prefix but not as a word
        let d = Dataset {
            posts: vec![post("p", "a", "il governo ha riformato il referendum", &[])],
            interactions: vec![],
            sources: vec![source("a")],
            platform: Platform::Facebook,
        };
        assert!(filter_topic(&d, &referendum_keywords(), 2).posts.is_empty());
    }

    #[test]
    fn filter_is_idempotent_and_monotone_in_min_matches() {
        let d = fixture();
        let kw = referendum_keywords();
        let once = filter_topic(&d, &kw, 2);
        let twice = filter_topic(&once, &kw, 2);
        assert_eq!(once, twice);

        let loose = filter_topic(&d, &kw, 1);
        let strict = filter_topic(&d, &kw, 2);
        let loose_ids: BTreeSet<&str> = loose.posts.iter().map(|p| p.post_id.as_str()).collect();
        for p in &strict.posts {
            assert!(loose_ids.contains(p.post_id.as_str()));
        }
    }

    #[test]
    fn breakdown_counts_roles_with_overlap() {
        let d = fixture();
        let stats = breakdown(&d);
        assert_eq!(stats.sources, 2);
        assert_eq!(stats.posts, 4);
        assert_eq!(stats.likes_favorites, 3);
        assert_eq!(stats.retweets, 0);
        assert_eq!(stats.comments, 1);
        assert_eq!(stats.distinct_users, 3);
        assert_eq!(stats.distinct_likers_favoriters, 2);
        assert_eq!(stats.distinct_commenters, 1);
        assert!(stats.distinct_users <= stats.distinct_likers_favoriters + stats.distinct_retweeters + stats.distinct_commenters);
    }

    #[test]
    fn breakdown_of_empty_dataset_is_all_zero() {
        let d = Dataset {
            platform: Platform::Twitter,
            sources: vec![],
            posts: vec![],
            interactions: vec![],
        };
        let stats = breakdown(&d);
        assert_eq!(stats, BreakdownStats {
            sources: 0,
            posts: 0,
            likes_favorites: 0,
            retweets: 0,
            comments: 0,
            distinct_users: 0,
            distinct_likers_favoriters: 0,
            distinct_retweeters: 0,
            distinct_commenters: 0,
        });
    }

    #[test]
    fn same_user_in_two_roles_counts_once_overall() {
        let d = Dataset {
            platform: Platform::Facebook,
            sources: vec![source("a")],
            posts: vec![post("p1", "a", "x", &[])],
            interactions: vec![like("u1", "p1"), comment("u1", "p1", "ok")],
        };
        let stats = breakdown(&d);
        assert_eq!(stats.distinct_users, 1);
        assert_eq!(stats.distinct_likers_favoriters, 1);
        assert_eq!(stats.distinct_commenters, 1);
    }

    #[test]
    fn validate_rejects_text_on_like_and_missing_text_on_comment() {
        let mut d = fixture();
        d.interactions.push(InteractionRecord {
            user_id: "u9".into(),
            post_id: "p1".into(),
            kind: InteractionKind::Like,
            text: Some("nope".into()),
            timestamp: None,
        });
        assert!(d.validate().is_err());

        let mut d = fixture();
        d.interactions.push(InteractionRecord {
            user_id: "u9".into(),
            post_id: "p1".into(),
            kind: InteractionKind::Reply,
            text: None,
            timestamp: None,
        });
        assert!(d.validate().is_err());
    }
}
