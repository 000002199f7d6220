//! Pipeline run configuration: one JSON document drives the whole chain.
//! Validation happens up front, before any stage touches the disk.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use newsgraph::bipartite::Channel;
use newsgraph::community::{
    best_modularity_cut, fast_greedy, infomap, label_propagation, louvain, walktrap, Partition,
};
use newsgraph::model::Platform;
use newsgraph::projection::{ProjectionKind, SourceGraph};
use serde::{Deserialize, Serialize};

pub const DEFAULT_WALK_LENGTH: u32 = 4;

/// The five supported detection algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Louvain,
    FastGreedy,
    LabelProp,
    Walktrap,
    Infomap,
}

impl Algo {
    pub const ALL: [Algo; 5] = [
        Algo::Louvain,
        Algo::FastGreedy,
        Algo::LabelProp,
        Algo::Walktrap,
        Algo::Infomap,
    ];

    pub fn parse(s: &str) -> Option<Algo> {
        match s {
            "louvain" => Some(Algo::Louvain),
            "fastgreedy" | "fast-greedy" => Some(Algo::FastGreedy),
            "labelprop" | "label-propagation" => Some(Algo::LabelProp),
            "walktrap" => Some(Algo::Walktrap),
            "infomap" => Some(Algo::Infomap),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Louvain => "louvain",
            Algo::FastGreedy => "fastgreedy",
            Algo::LabelProp => "labelprop",
            Algo::Walktrap => "walktrap",
            Algo::Infomap => "infomap",
        }
    }

    /// Runs the algorithm; the objective is modularity for the first four
    /// and the description length for Infomap.
    pub fn run(self, graph: &SourceGraph, seed: u64, walk_length: u32) -> (Partition, f64) {
        match self {
            Algo::Louvain => {
                let run = louvain(graph, seed);
                (run.partition, run.modularity)
            }
            Algo::FastGreedy => {
                let run = fast_greedy(graph);
                (run.partition, run.modularity)
            }
            Algo::LabelProp => {
                let partition = label_propagation(graph, seed);
                let q = newsgraph::community::modularity(graph, &partition).unwrap_or(0.0);
                (partition, q)
            }
            Algo::Walktrap => {
                let dendrogram = walktrap(graph, walk_length);
                best_modularity_cut(graph, &dendrogram)
            }
            Algo::Infomap => {
                let run = infomap(graph, seed);
                (run.partition, run.description_length)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterConfig {
    pub keywords: Vec<String>,
    pub min_matches: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentimentConfig {
    pub lexicon: PathBuf,
    pub gazetteer: PathBuf,
    /// Remote annotation endpoint; offline lexicon annotation when absent.
    #[serde(default)]
    pub remote: Option<String>,
    /// Annotation cache path; also settable via NEWSGRAPH_ANNOTATION_CACHE.
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default = "default_min_support")]
    pub min_support: u64,
    #[serde(default = "default_shared_only")]
    pub shared_only: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_min_posts")]
    pub user_response_min_posts: u64,
    #[serde(default = "default_pdf_bins")]
    pub pdf_bins: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_min_support() -> u64 {
    1
}
fn default_shared_only() -> bool {
    true
}
fn default_threshold() -> f64 {
    newsgraph::sentiment::CONTROVERSY_THRESHOLD
}
fn default_min_posts() -> u64 {
    2
}
fn default_pdf_bins() -> usize {
    21
}
fn default_in_flight() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub platform: String,
    pub sources: PathBuf,
    pub posts: PathBuf,
    pub interactions: PathBuf,
    #[serde(default)]
    pub filter: Option<FilterConfig>,
    #[serde(default = "default_channel")]
    pub channel: String,
    #[serde(default = "default_projection")]
    pub projection: String,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default = "default_primary")]
    pub primary_algorithm: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_walk_length")]
    pub walk_length: u32,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_bins")]
    pub bins: u32,
    #[serde(default = "default_min_activity")]
    pub min_activity: u64,
    #[serde(default)]
    pub sentiment: Option<SentimentConfig>,
}

fn default_channel() -> String {
    "engagement".into()
}
fn default_projection() -> String {
    "activity-jaccard".into()
}
fn default_algorithms() -> Vec<String> {
    Algo::ALL.iter().map(|a| a.as_str().to_string()).collect()
}
fn default_primary() -> String {
    "louvain".into()
}
fn default_walk_length() -> u32 {
    DEFAULT_WALK_LENGTH
}
fn default_top_k() -> usize {
    3
}
fn default_bins() -> u32 {
    100
}
fn default_min_activity() -> u64 {
    1
}

/// A parsed and checked run plan; paths are resolved against the config
/// file's directory.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: RunConfig,
    pub platform: Platform,
    pub sources: PathBuf,
    pub posts: PathBuf,
    pub interactions: PathBuf,
    pub channel: Channel,
    pub projection: ProjectionKind,
    pub algorithms: Vec<Algo>,
    pub primary: Algo,
    pub seed: u64,
    pub lexicon: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Validates every stage parameter before anything runs. `base` anchors
    /// relative paths (usually the config file's directory).
    pub fn validate(&self, base: &Path, seed_override: Option<u64>) -> Result<ValidatedConfig> {
        let channel = Channel::parse(&self.channel)
            .with_context(|| format!("unknown channel {:?}", self.channel))?;
        let projection = ProjectionKind::parse(&self.projection)
            .with_context(|| format!("unknown projection kind {:?}", self.projection))?;
        if self.algorithms.is_empty() {
            bail!("no detection algorithms configured");
        }
        let mut algorithms = Vec::new();
        for name in &self.algorithms {
            let algo =
                Algo::parse(name).with_context(|| format!("unknown algorithm {name:?}"))?;
            if algorithms.contains(&algo) {
                bail!("algorithm {name:?} listed twice");
            }
            algorithms.push(algo);
        }
        let primary = Algo::parse(&self.primary_algorithm)
            .with_context(|| format!("unknown primary algorithm {:?}", self.primary_algorithm))?;
        if !algorithms.contains(&primary) {
            bail!(
                "primary algorithm {:?} is not among the configured algorithms",
                self.primary_algorithm
            );
        }
        if let Some(f) = &self.filter {
            if f.keywords.is_empty() {
                bail!("filter.keywords must be nonempty");
            }
            if f.min_matches == 0 {
                bail!("filter.min_matches must be at least 1");
            }
        }
        if self.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        if self.bins == 0 {
            bail!("bins must be at least 1");
        }
        let sources = resolve(base, &self.sources);
        let posts = resolve(base, &self.posts);
        let interactions = resolve(base, &self.interactions);
        for path in [&sources, &posts, &interactions] {
            if !path.exists() {
                bail!("input file {} does not exist", path.display());
            }
        }
        let (lexicon, gazetteer) = match &self.sentiment {
            Some(s) => {
                if s.threshold < 0.0 {
                    bail!("controversy threshold must be nonnegative");
                }
                if s.pdf_bins < 2 {
                    bail!("pdf_bins must be at least 2");
                }
                let lex = resolve(base, &s.lexicon);
                let gaz = resolve(base, &s.gazetteer);
                for path in [&lex, &gaz] {
                    if !path.exists() {
                        bail!("sentiment input {} does not exist", path.display());
                    }
                }
                (Some(lex), Some(gaz))
            }
            None => (None, None),
        };
        Ok(ValidatedConfig {
            raw: self.clone(),
            platform: Platform::parse(&self.platform),
            sources,
            posts,
            interactions,
            channel,
            projection,
            algorithms,
            primary,
            seed: seed_override.unwrap_or(self.seed),
            lexicon,
            gazetteer,
        })
    }
}
