//! On-disk interchange formats: projected edge lists, partition files, the
//! serialized bipartite graph, and annotation tables. Everything round-trips
//! and serializes deterministically so pipeline runs are byte-reproducible.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::{BipartiteGraph, Channel};
use crate::community::Partition;
use crate::projection::{ProjectionKind, SourceGraph};
use crate::sentiment::Annotation;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Bad { line: usize, message: String },
    #[error("{0}")]
    BadDocument(String),
}

fn bad(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Bad {
        line: line.into(),
        message: message.into(),
    }
}

/// Splits leading `# key=value ...` metadata lines from the CSV body.
fn split_metadata(text: &str) -> (BTreeMap<String, String>, Vec<String>, String) {
    let mut meta = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut body_start = 0;
    for line in text.lines() {
        if !line.starts_with('#') {
            break;
        }
        body_start += line.len() + 1;
        let content = line.trim_start_matches('#').trim();
        if let Some(node) = content.strip_prefix("node=") {
            nodes.push(node.to_string());
            continue;
        }
        for pair in content.split_whitespace() {
            if let Some((k, v)) = pair.split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        }
    }
    let body = if body_start <= text.len() {
        text[body_start..].to_string()
    } else {
        String::new()
    };
    (meta, nodes, body)
}

// ---------------------------------------------------------------------------
// Edge list: one line per projected edge, full-precision weights. The header
// records the projection kind and channel; `# node=` lines carry the complete
// node set (isolated sources included) so the graph round-trips.
// ---------------------------------------------------------------------------

pub fn write_edges(graph: &SourceGraph) -> String {
    let mut out = String::new();
    let kind = graph
        .projection_kind
        .map(|k| k.as_str())
        .unwrap_or("unspecified");
    let channel = graph.channel.map(|c| c.as_str()).unwrap_or("unspecified");
    out.push_str(&format!("# projection_kind={kind} channel={channel}\n"));
    for node in graph.node_ids() {
        out.push_str(&format!("# node={node}\n"));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["source_a", "source_b", "weight"])
        .expect("header writes");
    let ids = graph.node_ids();
    for (a, b, w) in graph.edges() {
        writer
            .write_record([ids[a].as_str(), ids[b].as_str(), &w.to_string()])
            .expect("edge writes");
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("csv buffer")).expect("utf8"));
    out
}

pub fn read_edges(text: &str) -> Result<SourceGraph, FormatError> {
    let (meta, mut nodes, body) = split_metadata(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(bad(idx + 2, "expected source_a,source_b,weight"));
        }
        let w: f64 = record[2]
            .parse()
            .map_err(|e| bad(idx + 2, format!("bad weight: {e}")))?;
        edges.push((record[0].to_string(), record[1].to_string(), w));
    }
    if nodes.is_empty() {
        // legacy files without node lines: infer the node set from edges
        let mut seen = BTreeMap::new();
        for (a, b, _) in &edges {
            let next = seen.len();
            seen.entry(a.clone()).or_insert(next);
            let next = seen.len();
            seen.entry(b.clone()).or_insert(next);
        }
        nodes = {
            let mut v: Vec<(String, usize)> = seen.into_iter().collect();
            v.sort_by_key(|(_, i)| *i);
            v.into_iter().map(|(n, _)| n).collect()
        };
    }
    let mut graph = SourceGraph::new(nodes);
    graph.projection_kind = meta
        .get("projection_kind")
        .and_then(|s| ProjectionKind::parse(s));
    graph.channel = meta.get("channel").and_then(|s| Channel::parse(s));
    for (a, b, w) in edges {
        let ia = graph
            .index_of(&a)
            .ok_or_else(|| FormatError::BadDocument(format!("edge references unknown node {a:?}")))?;
        let ib = graph
            .index_of(&b)
            .ok_or_else(|| FormatError::BadDocument(format!("edge references unknown node {b:?}")))?;
        graph.add_edge(ia, ib, w);
    }
    Ok(graph)
}

// ---------------------------------------------------------------------------
// Partition file: one line per node with the run's provenance repeated.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMeta {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub objective_value: Option<f64>,
    pub projection: Option<String>,
    pub channel: Option<String>,
}

pub fn write_partition(partition: &Partition, meta: &PartitionMeta) -> String {
    let mut out = String::new();
    let mut header = format!("# algorithm={}", meta.algorithm);
    if let Some(seed) = meta.seed {
        header.push_str(&format!(" seed={seed}"));
    }
    if let Some(obj) = meta.objective_value {
        header.push_str(&format!(" objective_value={obj}"));
    }
    if let Some(p) = &meta.projection {
        header.push_str(&format!(" projection_kind={p}"));
    }
    if let Some(c) = &meta.channel {
        header.push_str(&format!(" channel={c}"));
    }
    out.push_str(&header);
    out.push('\n');
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["source_id", "community_label", "algorithm", "seed", "objective_value"])
        .expect("header writes");
    let seed = meta.seed.map(|s| s.to_string()).unwrap_or_default();
    let obj = meta
        .objective_value
        .map(|o| o.to_string())
        .unwrap_or_default();
    for (node, &label) in partition.nodes().iter().zip(partition.labels()) {
        writer
            .write_record([node.as_str(), &label.to_string(), &meta.algorithm, &seed, &obj])
            .expect("row writes");
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("csv buffer")).expect("utf8"));
    out
}

pub fn read_partition(text: &str) -> Result<(Partition, PartitionMeta), FormatError> {
    let (meta, _, body) = split_metadata(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let mut nodes = Vec::new();
    let mut labels = Vec::new();
    let mut algorithm = meta.get("algorithm").cloned();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(bad(idx + 2, "expected at least source_id,community_label"));
        }
        nodes.push(record[0].to_string());
        labels.push(
            record[1]
                .parse::<u32>()
                .map_err(|e| bad(idx + 2, format!("bad community label: {e}")))?,
        );
        if algorithm.is_none() && record.len() >= 3 && !record[2].is_empty() {
            algorithm = Some(record[2].to_string());
        }
    }
    if nodes.is_empty() {
        return Err(FormatError::BadDocument("partition file has no rows".into()));
    }
    let partition = Partition::from_labels(nodes, &labels);
    let parsed = PartitionMeta {
        algorithm: algorithm.unwrap_or_else(|| "unknown".into()),
        seed: meta.get("seed").and_then(|s| s.parse().ok()),
        objective_value: meta.get("objective_value").and_then(|s| s.parse().ok()),
        projection: meta.get("projection_kind").cloned(),
        channel: meta.get("channel").cloned(),
    };
    Ok((partition, parsed))
}

// ---------------------------------------------------------------------------
// Bipartite graph document (JSON): node lists in order plus indexed edges.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct BipartiteFile {
    channel: Channel,
    sources: Vec<String>,
    users: Vec<String>,
    edges: Vec<(usize, usize, u64)>,
}

pub fn write_bipartite(graph: &BipartiteGraph) -> String {
    let doc = BipartiteFile {
        channel: graph.channel,
        sources: graph.source_ids().to_vec(),
        users: graph.user_ids().to_vec(),
        edges: graph.edges().collect(),
    };
    let mut body = serde_json::to_string(&doc).expect("bipartite document serializes");
    body.push('\n');
    body
}

pub fn read_bipartite(text: &str) -> Result<BipartiteGraph, FormatError> {
    let doc: BipartiteFile =
        serde_json::from_str(text).map_err(|e| FormatError::BadDocument(e.to_string()))?;
    for &(s, u, _) in &doc.edges {
        if s >= doc.sources.len() || u >= doc.users.len() {
            return Err(FormatError::BadDocument(format!(
                "edge ({s}, {u}) out of range"
            )));
        }
    }
    Ok(BipartiteGraph::from_parts(
        doc.channel,
        doc.sources,
        doc.users,
        &doc.edges,
    ))
}

// ---------------------------------------------------------------------------
// Annotation table: id, sentiment, entities (JSON array in one column).
// ---------------------------------------------------------------------------

pub fn write_annotations(annotations: &BTreeMap<String, Annotation>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["id", "sentiment", "entities"])
        .expect("header writes");
    for (id, a) in annotations {
        let entities: Vec<&str> = a.entities.iter().map(String::as_str).collect();
        writer
            .write_record([
                id.as_str(),
                &a.sentiment.to_string(),
                &serde_json::to_string(&entities).expect("entity list serializes"),
            ])
            .expect("row writes");
    }
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("utf8")
}

pub fn read_annotations<R: BufRead>(
    reader: R,
) -> Result<BTreeMap<String, Annotation>, FormatError> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut out = BTreeMap::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(bad(idx + 2, "expected id,sentiment,entities"));
        }
        let sentiment: f64 = record[1]
            .parse()
            .map_err(|e| bad(idx + 2, format!("bad sentiment: {e}")))?;
        let entities: Vec<String> = serde_json::from_str(&record[2])
            .map_err(|e| bad(idx + 2, format!("bad entity list: {e}")))?;
        out.insert(
            record[0].to_string(),
            Annotation {
                sentiment,
                entities: entities.into_iter().collect(),
            },
        );
    }
    Ok(out)
}

/// One annotated comment, tied back to its post and author.
#[derive(Debug, Clone, PartialEq)]
pub struct CommentAnnotationRow {
    pub post_id: String,
    pub user_id: String,
    pub annotation: Annotation,
}

pub fn write_comment_annotations(rows: &[CommentAnnotationRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["post_id", "user_id", "sentiment", "entities"])
        .expect("header writes");
    for r in rows {
        let entities: Vec<&str> = r.annotation.entities.iter().map(String::as_str).collect();
        writer
            .write_record([
                r.post_id.as_str(),
                r.user_id.as_str(),
                &r.annotation.sentiment.to_string(),
                &serde_json::to_string(&entities).expect("entity list serializes"),
            ])
            .expect("row writes");
    }
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("utf8")
}

pub fn read_comment_annotations(text: &str) -> Result<Vec<CommentAnnotationRow>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 4 {
            return Err(bad(idx + 2, "expected post_id,user_id,sentiment,entities"));
        }
        let sentiment: f64 = record[2]
            .parse()
            .map_err(|e| bad(idx + 2, format!("bad sentiment: {e}")))?;
        let entities: Vec<String> = serde_json::from_str(&record[3])
            .map_err(|e| bad(idx + 2, format!("bad entity list: {e}")))?;
        out.push(CommentAnnotationRow {
            post_id: record[0].to_string(),
            user_id: record[1].to_string(),
            annotation: Annotation {
                sentiment,
                entities: entities.into_iter().collect(),
            },
        });
    }
    Ok(out)
}
