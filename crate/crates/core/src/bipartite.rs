//! The weighted source–user bipartite network.
//!
//! Edges live in one interaction channel at a time: engagement pools likes,
//! favorites, and retweets (the explicit positive feedbacks), comments pools
//! comments and replies. Favorites and retweets can also be kept separate for
//! sensitivity checks.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, InteractionKind};

/// Which interaction kinds feed the edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    /// Likes, favorites, and retweets pooled together.
    Engagement,
    /// Comments and replies.
    Comments,
    /// Likes and favorites only (no retweets).
    Favorites,
    /// Retweets only.
    Retweets,
}

impl Channel {
    pub fn includes(self, kind: InteractionKind) -> bool {
        match self {
            Channel::Engagement => matches!(
                kind,
                InteractionKind::Like | InteractionKind::Favorite | InteractionKind::Retweet
            ),
            Channel::Comments => kind.is_textual(),
            Channel::Favorites => {
                matches!(kind, InteractionKind::Like | InteractionKind::Favorite)
            }
            Channel::Retweets => matches!(kind, InteractionKind::Retweet),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Engagement => "engagement",
            Channel::Comments => "comments",
            Channel::Favorites => "favorites",
            Channel::Retweets => "retweets",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        match s {
            "engagement" => Some(Channel::Engagement),
            "comments" | "comment" => Some(Channel::Comments),
            "favorites" => Some(Channel::Favorites),
            "retweets" => Some(Channel::Retweets),
            _ => None,
        }
    }
}

/// Weighted bipartite graph between source accounts and users. Edge weight is
/// the number of channel interactions of a user on posts of a source; absent
/// pair means no edge, so all stored weights are >= 1. Sources with zero
/// interactions stay in the node set as isolated nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub channel: Channel,
    sources: Vec<String>,
    users: Vec<String>,
    /// source index -> (user index -> weight)
    by_source: Vec<BTreeMap<usize, u64>>,
    /// user index -> (source index -> weight)
    by_user: Vec<BTreeMap<usize, u64>>,
}

impl BipartiteGraph {
    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn source_ids(&self) -> &[String] {
        &self.sources
    }

    pub fn user_ids(&self) -> &[String] {
        &self.users
    }

    pub fn weight(&self, source: usize, user: usize) -> u64 {
        self.by_source[source].get(&user).copied().unwrap_or(0)
    }

    /// Users interacting with `source`, with weights, ordered by user index.
    pub fn users_of(&self, source: usize) -> &BTreeMap<usize, u64> {
        &self.by_source[source]
    }

    /// Sources `user` interacted with, with weights, ordered by source index.
    pub fn sources_of(&self, user: usize) -> &BTreeMap<usize, u64> {
        &self.by_user[user]
    }

    /// Total interaction weight attached to a source.
    pub fn source_activity(&self, source: usize) -> u64 {
        self.by_source[source].values().sum()
    }

    /// Total interaction weight of a user.
    pub fn user_activity(&self, user: usize) -> u64 {
        self.by_user[user].values().sum()
    }

    /// max over sources of w_c^u for one user; 0 for an inactive user.
    pub fn user_max_weight(&self, user: usize) -> u64 {
        self.by_user[user].values().copied().max().unwrap_or(0)
    }

    /// Global maximum edge weight over all (user, source) pairs.
    pub fn global_max_weight(&self) -> u64 {
        self.by_user
            .iter()
            .flat_map(|m| m.values().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.by_source.iter().map(|m| m.len()).sum()
    }

    /// Builds a graph directly from indexed edge triples; used by the file
    /// reader and by tests. Weights must be >= 1.
    pub fn from_parts(
        channel: Channel,
        sources: Vec<String>,
        users: Vec<String>,
        edges: &[(usize, usize, u64)],
    ) -> BipartiteGraph {
        let mut by_source = vec![BTreeMap::new(); sources.len()];
        let mut by_user = vec![BTreeMap::new(); users.len()];
        for &(s, u, w) in edges {
            assert!(w >= 1, "bipartite edge weights must be positive");
            *by_source[s].entry(u).or_insert(0) += w;
            *by_user[u].entry(s).or_insert(0) += w;
        }
        BipartiteGraph {
            channel,
            sources,
            users,
            by_source,
            by_user,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.by_source
            .iter()
            .enumerate()
            .flat_map(|(s, m)| m.iter().map(move |(&u, &w)| (s, u, w)))
    }
}

/// Counts channel interactions per (source, user) pair. Users appear only if
/// they have at least one channel interaction; all dataset sources are kept.
pub fn build_bipartite(dataset: &Dataset, channel: Channel) -> BipartiteGraph {
    let sources: Vec<String> = dataset.sources.iter().map(|s| s.source_id.clone()).collect();
    let source_index: HashMap<&str, usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let post_source: HashMap<&str, usize> = dataset
        .posts
        .iter()
        .map(|p| (p.post_id.as_str(), source_index[p.source_id.as_str()]))
        .collect();

    let mut users: Vec<String> = Vec::new();
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut by_source: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); sources.len()];
    let mut by_user: Vec<BTreeMap<usize, u64>> = Vec::new();

    for i in &dataset.interactions {
        if !channel.includes(i.kind) {
            continue;
        }
        let s = post_source[i.post_id.as_str()];
        let u = *user_index.entry(i.user_id.clone()).or_insert_with(|| {
            users.push(i.user_id.clone());
            by_user.push(BTreeMap::new());
            users.len() - 1
        });
        *by_source[s].entry(u).or_insert(0) += 1;
        *by_user[u].entry(s).or_insert(0) += 1;
    }

    BipartiteGraph {
        channel,
        sources,
        users,
        by_source,
        by_user,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InteractionRecord, Platform, Post, SourceAccount};
    use chrono::TimeZone;

    fn dataset() -> Dataset {
        let ts = chrono::Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap();
        let src = |id: &str| SourceAccount {
            source_id: id.into(),
            platform: Platform::Twitter,
            display_name: id.to_uppercase(),
        };
        let post = |id: &str, s: &str| Post {
            post_id: id.into(),
            source_id: s.into(),
            timestamp: ts,
            text: String::new(),
            urls: vec![],
            platform: Platform::Twitter,
            declared_engagement_total: None,
        };
        let act = |u: &str, p: &str, kind: InteractionKind| InteractionRecord {
            user_id: u.into(),
            post_id: p.into(),
            kind,
            text: if kind.is_textual() { Some("t".into()) } else { None },
            timestamp: None,
        };
        Dataset {
            platform: Platform::Twitter,
            sources: vec![src("a"), src("b"), src("c")],
            posts: vec![post("p1", "a"), post("p2", "a"), post("p3", "a"), post("p4", "b")],
            interactions: vec![
                act("u1", "p1", InteractionKind::Favorite),
                act("u1", "p2", InteractionKind::Favorite),
                act("u1", "p3", InteractionKind::Favorite),
                act("u1", "p1", InteractionKind::Retweet),
                act("u2", "p4", InteractionKind::Favorite),
                act("u2", "p4", InteractionKind::Comment),
            ],
        }
    }

    #[test]
    fn counts_channel_interactions_per_pair() {
        let d = dataset();
        let g = build_bipartite(&d, Channel::Engagement);
        // u1 favorites three posts of a and retweets one of them: pooled weight 4
        let a = 0;
        let u1 = g.user_ids().iter().position(|u| u == "u1").unwrap();
        assert_eq!(g.weight(a, u1), 4);
        // source c has no interactions but stays as an isolated node
        assert_eq!(g.n_sources(), 3);
        assert_eq!(g.source_activity(2), 0);
    }

    #[test]
    fn favorites_and_retweets_pool_into_engagement() {
        // u1 favorites p1 and retweets p1, both posts of account a -> weight 2
        let d = Dataset {
            interactions: vec![
                InteractionRecord {
                    user_id: "u1".into(),
                    post_id: "p1".into(),
                    kind: InteractionKind::Favorite,
                    text: None,
                    timestamp: None,
                },
                InteractionRecord {
                    user_id: "u1".into(),
                    post_id: "p1".into(),
                    kind: InteractionKind::Retweet,
                    text: None,
                    timestamp: None,
                },
            ],
            ..dataset()
        };
        let g = build_bipartite(&d, Channel::Engagement);
        assert_eq!(g.weight(0, 0), 2);
        // kept separate under the sensitivity channels
        assert_eq!(build_bipartite(&d, Channel::Favorites).weight(0, 0), 1);
        assert_eq!(build_bipartite(&d, Channel::Retweets).weight(0, 0), 1);
    }

    #[test]
    fn comment_channel_ignores_likes_entirely() {
        let d = dataset();
        let g = build_bipartite(&d, Channel::Comments);
        // only u2's comment survives
        assert_eq!(g.n_users(), 1);
        assert_eq!(g.user_ids()[0], "u2");
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(1, 0), 1);
    }

    #[test]
    fn channel_kind_membership() {
        assert!(Channel::Engagement.includes(InteractionKind::Like));
        assert!(Channel::Engagement.includes(InteractionKind::Retweet));
        assert!(!Channel::Engagement.includes(InteractionKind::Reply));
        assert!(Channel::Comments.includes(InteractionKind::Reply));
        assert!(!Channel::Favorites.includes(InteractionKind::Retweet));
    }
}
