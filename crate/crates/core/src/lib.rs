//! Cross-platform news-consumption analytics.
//!
//! The pipeline goes from raw post/interaction dumps to emergent news-source
//! communities, user polarization measures, and entity-level emotional
//! distance reports:
//!
//! 1. [`ingest`] parses line-delimited dumps into a validated [`model::Dataset`];
//!    [`model::filter_topic`] restricts it to a keyword topic.
//! 2. [`bipartite`] builds the weighted source-user graph, [`projection`]
//!    collapses it onto sources with edge-count, Jaccard, or activity-scaled
//!    Jaccard similarity.
//! 3. [`community`] detects source communities five ways; [`metrics`]
//!    quantifies agreement between the partitions.
//! 4. [`polarization`] measures how users split activity across communities;
//!    [`sentiment`] annotates texts and derives emotional distances and
//!    controversial entities.
//!
//! [`synth`] generates ground-truth-bearing fixtures and brute-force oracles
//! so every analytic path is verifiable without proprietary data, and
//! [`formats`] holds the on-disk interchange formats the CLI speaks.

pub mod bipartite;
pub mod community;
pub mod formats;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod polarization;
pub mod projection;
pub mod sentiment;
pub mod synth;
pub mod text;

pub use bipartite::{build_bipartite, BipartiteGraph, Channel};
pub use community::{
    best_modularity_cut, fast_greedy, infomap, label_propagation, louvain, modularity, walktrap,
    Dendrogram, Partition,
};
pub use ingest::{ingest, IngestOutcome};
pub use model::{breakdown, filter_topic, BreakdownStats, Dataset, Platform};
pub use projection::{
    project, project_activity_jaccard, project_edge_count, project_jaccard, ProjectionKind,
    SourceGraph,
};
