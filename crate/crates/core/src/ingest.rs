//! Streaming ingestion of line-delimited record dumps.
//!
//! Three files make up a dataset export: sources, posts, interactions. Each
//! line is one self-describing JSON record. Ingestion is a single pass;
//! the resulting [`Dataset`] is immutable and safe to share across analyses.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Dataset, InteractionKind, InteractionRecord, Platform, Post, SourceAccount};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFile {
    Sources,
    Posts,
    Interactions,
}

impl std::fmt::Display for RecordFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RecordFile::Sources => "sources",
            RecordFile::Posts => "posts",
            RecordFile::Interactions => "interactions",
        })
    }
}

/// An interaction whose `post_id` resolves to no ingested post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingRef {
    pub line: usize,
    pub user_id: String,
    pub post_id: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file} line {line}: {message}")]
    Malformed {
        file: RecordFile,
        line: usize,
        message: String,
    },
    #[error("interactions reference unknown posts: {}", format_dangling(.0))]
    DanglingPostRefs(Vec<DanglingRef>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_dangling(refs: &[DanglingRef]) -> String {
    let shown: Vec<String> = refs
        .iter()
        .take(10)
        .map(|r| format!("line {} (user {:?} -> post {:?})", r.line, r.user_id, r.post_id))
        .collect();
    let mut s = shown.join(", ");
    if refs.len() > 10 {
        s.push_str(&format!(", and {} more", refs.len() - 10));
    }
    s
}

/// Wire schema for one source line.
#[derive(Debug, Serialize, Deserialize)]
pub struct SourceLine {
    pub source_id: String,
    pub platform: Platform,
    pub display_name: String,
}

/// Wire schema for one post line. The platform is not repeated per line; it
/// is a property of the dataset.
#[derive(Debug, Serialize, Deserialize)]
pub struct PostLine {
    pub post_id: String,
    pub source_id: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_engagement_total: Option<u64>,
}

/// Wire schema for one interaction line.
#[derive(Debug, Serialize, Deserialize)]
pub struct InteractionLine {
    pub user_id: String,
    pub post_id: String,
    pub kind: InteractionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

/// Result of an ingestion pass: the dataset plus streaming counters.
#[derive(Debug)]
pub struct IngestOutcome {
    pub dataset: Dataset,
    /// Exact duplicates of (user_id, post_id, kind) collapsed to one record.
    pub duplicates_collapsed: u64,
}

/// Parses the three record streams into a validated [`Dataset`].
///
/// Referential integrity is enforced: a post referencing an unknown source or
/// an interaction referencing an unknown post aborts ingestion. Duplicate
/// (user, post, kind) interactions are collapsed, keeping the first.
pub fn ingest<R1: BufRead, R2: BufRead, R3: BufRead>(
    sources: R1,
    posts: R2,
    interactions: R3,
    platform: Platform,
) -> Result<IngestOutcome, IngestError> {
    let mut source_list: Vec<SourceAccount> = Vec::new();
    let mut source_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in sources.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SourceLine = parse_line(RecordFile::Sources, idx + 1, &line)?;
        if !source_ids.insert(rec.source_id.clone()) {
            return Err(IngestError::Malformed {
                file: RecordFile::Sources,
                line: idx + 1,
                message: format!("duplicate source_id {:?}", rec.source_id),
            });
        }
        source_list.push(SourceAccount {
            source_id: rec.source_id,
            platform: rec.platform,
            display_name: rec.display_name,
        });
    }

    let mut post_list: Vec<Post> = Vec::new();
    let mut post_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in posts.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PostLine = parse_line(RecordFile::Posts, idx + 1, &line)?;
        if !post_ids.insert(rec.post_id.clone()) {
            return Err(IngestError::Malformed {
                file: RecordFile::Posts,
                line: idx + 1,
                message: format!("duplicate post_id {:?}", rec.post_id),
            });
        }
        if !source_ids.contains(&rec.source_id) {
            return Err(IngestError::Malformed {
                file: RecordFile::Posts,
                line: idx + 1,
                message: format!(
                    "post {:?} references unknown source {:?}",
                    rec.post_id, rec.source_id
                ),
            });
        }
        post_list.push(Post {
            post_id: rec.post_id,
            source_id: rec.source_id,
            timestamp: rec.timestamp,
            text: rec.text,
            urls: rec.urls,
            platform: platform.clone(),
            declared_engagement_total: rec.declared_engagement_total,
        });
    }

    let mut interaction_list: Vec<InteractionRecord> = Vec::new();
    let mut seen: HashSet<(String, String, InteractionKind)> = HashSet::new();
    let mut duplicates_collapsed = 0u64;
    let mut dangling: Vec<DanglingRef> = Vec::new();
    for (idx, line) in interactions.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InteractionLine = parse_line(RecordFile::Interactions, idx + 1, &line)?;
        let has_text = rec.text.as_deref().map(|t| !t.is_empty()).unwrap_or(false);
        if rec.kind.is_textual() && !has_text {
            return Err(IngestError::Malformed {
                file: RecordFile::Interactions,
                line: idx + 1,
                message: format!("{} record requires text", rec.kind.as_str()),
            });
        }
        if !rec.kind.is_textual() && rec.text.is_some() {
            return Err(IngestError::Malformed {
                file: RecordFile::Interactions,
                line: idx + 1,
                message: format!("{} record must not carry text", rec.kind.as_str()),
            });
        }
        if !post_ids.contains(&rec.post_id) {
            dangling.push(DanglingRef {
                line: idx + 1,
                user_id: rec.user_id,
                post_id: rec.post_id,
            });
            continue;
        }
        let key = (rec.user_id.clone(), rec.post_id.clone(), rec.kind);
        if !seen.insert(key) {
            duplicates_collapsed += 1;
            continue;
        }
        interaction_list.push(InteractionRecord {
            user_id: rec.user_id,
            post_id: rec.post_id,
            kind: rec.kind,
            text: rec.text,
            timestamp: rec.timestamp,
        });
    }
    if !dangling.is_empty() {
        return Err(IngestError::DanglingPostRefs(dangling));
    }

    Ok(IngestOutcome {
        dataset: Dataset {
            platform,
            sources: source_list,
            posts: post_list,
            interactions: interaction_list,
        },
        duplicates_collapsed,
    })
}

fn parse_line<T: serde::de::DeserializeOwned>(
    file: RecordFile,
    line_no: usize,
    line: &str,
) -> Result<T, IngestError> {
    serde_json::from_str(line).map_err(|e| IngestError::Malformed {
        file,
        line: line_no,
        message: e.to_string(),
    })
}

/// Serializes a dataset back to the three-file wire format, one record per
/// line, in dataset order. Round-trips through [`ingest`].
pub fn write_dataset(
    dataset: &Dataset,
) -> Result<(String, String, String), serde_json::Error> {
    let mut sources = String::new();
    for s in &dataset.sources {
        sources.push_str(&serde_json::to_string(&SourceLine {
            source_id: s.source_id.clone(),
            platform: s.platform.clone(),
            display_name: s.display_name.clone(),
        })?);
        sources.push('\n');
    }
    let mut posts = String::new();
    for p in &dataset.posts {
        posts.push_str(&serde_json::to_string(&PostLine {
            post_id: p.post_id.clone(),
            source_id: p.source_id.clone(),
            timestamp: p.timestamp,
            text: p.text.clone(),
            urls: p.urls.clone(),
            declared_engagement_total: p.declared_engagement_total,
        })?);
        posts.push('\n');
    }
    let mut interactions = String::new();
    for i in &dataset.interactions {
        interactions.push_str(&serde_json::to_string(&InteractionLine {
            user_id: i.user_id.clone(),
            post_id: i.post_id.clone(),
            kind: i.kind,
            text: i.text.clone(),
            timestamp: i.timestamp,
        })?);
        interactions.push('\n');
    }
    Ok((sources, posts, interactions))
}

/// Streaming counters maintained during ingest, used to cross-check
/// [`crate::model::breakdown`] recounts.
pub fn streaming_breakdown(outcome: &IngestOutcome) -> crate::model::BreakdownStats {
    crate::model::breakdown(&outcome.dataset)
}

/// Sidecar metadata for a dataset directory.
#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub platform: Platform,
    pub duplicates_collapsed: u64,
}

#[derive(Debug, Error)]
pub enum DatasetDirError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("bad meta.json in {path}: {message}")]
    BadMeta { path: String, message: String },
}

/// Writes the canonical dataset directory: `sources.jsonl`, `posts.jsonl`,
/// `interactions.jsonl`, `meta.json`.
pub fn write_dataset_dir(
    dir: &std::path::Path,
    dataset: &Dataset,
    duplicates_collapsed: u64,
) -> Result<(), DatasetDirError> {
    use std::fs;
    let io_err = |path: &std::path::Path, source| DatasetDirError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let (sources, posts, interactions) = write_dataset(dataset).map_err(|e| {
        DatasetDirError::BadMeta {
            path: dir.display().to_string(),
            message: e.to_string(),
        }
    })?;
    for (name, body) in [
        ("sources.jsonl", sources),
        ("posts.jsonl", posts),
        ("interactions.jsonl", interactions),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    let meta = DatasetMeta {
        platform: dataset.platform.clone(),
        duplicates_collapsed,
    };
    let path = dir.join("meta.json");
    let mut body = serde_json::to_string_pretty(&meta).expect("meta serializes");
    body.push('\n');
    fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(())
}

/// Reads a canonical dataset directory written by [`write_dataset_dir`].
pub fn read_dataset_dir(dir: &std::path::Path) -> Result<IngestOutcome, DatasetDirError> {
    use std::fs::File;
    use std::io::BufReader;
    let open = |name: &str| -> Result<BufReader<File>, DatasetDirError> {
        let path = dir.join(name);
        File::open(&path)
            .map(BufReader::new)
            .map_err(|e| DatasetDirError::Io {
                path: path.display().to_string(),
                source: e,
            })
    };
    let meta_path = dir.join("meta.json");
    let meta_body = std::fs::read_to_string(&meta_path).map_err(|e| DatasetDirError::Io {
        path: meta_path.display().to_string(),
        source: e,
    })?;
    let meta: DatasetMeta =
        serde_json::from_str(&meta_body).map_err(|e| DatasetDirError::BadMeta {
            path: meta_path.display().to_string(),
            message: e.to_string(),
        })?;
    let outcome = ingest(
        open("sources.jsonl")?,
        open("posts.jsonl")?,
        open("interactions.jsonl")?,
        meta.platform,
    )?;
    Ok(IngestOutcome {
        duplicates_collapsed: outcome.duplicates_collapsed + meta.duplicates_collapsed,
        dataset: outcome.dataset,
    })
}
