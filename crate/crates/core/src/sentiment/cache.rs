//! Content-hash keyed annotation cache: append-only JSONL records so remote
//! annotation reruns are free and offline tests never touch the network.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Annotation, Annotator, SentimentError};

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    sentiment: f64,
    entities: Vec<String>,
}

/// Append-only cache file keyed by sha256 of the input text. Reads go through
/// an in-memory map guarded by a read-write lock; appends are serialized
/// through a single writer.
pub struct AnnotationCache {
    path: PathBuf,
    map: RwLock<HashMap<String, Annotation>>,
    writer: Mutex<File>,
}

impl AnnotationCache {
    /// Opens (or creates) the cache file and loads existing records.
    pub fn open(path: &Path) -> Result<AnnotationCache, SentimentError> {
        let err = |message: String| SentimentError::Cache {
            path: path.display().to_string(),
            message,
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| err(e.to_string()))?;
            }
        }
        let mut map = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| err(e.to_string()))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| err(format!("line {}: {e}", idx + 1)))?;
                map.insert(
                    rec.key,
                    Annotation {
                        sentiment: rec.sentiment,
                        entities: rec.entities.into_iter().collect(),
                    },
                );
            }
        }
        let writer = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| err(e.to_string()))?;
        Ok(AnnotationCache {
            path: path.to_path_buf(),
            map: RwLock::new(map),
            writer: Mutex::new(writer),
        })
    }

    pub fn key_of(text: &str) -> String {
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn get(&self, text: &str) -> Option<Annotation> {
        self.map
            .read()
            .expect("cache map lock")
            .get(&Self::key_of(text))
            .cloned()
    }

    pub fn put(&self, text: &str, annotation: &Annotation) -> Result<(), SentimentError> {
        let key = Self::key_of(text);
        let rec = CacheRecord {
            key: key.clone(),
            sentiment: annotation.sentiment,
            entities: annotation.entities.iter().cloned().collect(),
        };
        let mut line = serde_json::to_string(&rec).expect("cache record serializes");
        line.push('\n');
        {
            let mut writer = self.writer.lock().expect("cache writer lock");
            writer
                .write_all(line.as_bytes())
                .map_err(|e| SentimentError::Cache {
                    path: self.path.display().to_string(),
                    message: e.to_string(),
                })?;
        }
        self.map
            .write()
            .expect("cache map lock")
            .insert(key, annotation.clone());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Wraps any annotator with the cache: hits skip the inner annotator
/// entirely, misses are annotated once and appended.
pub struct CachedAnnotator<A> {
    inner: A,
    cache: AnnotationCache,
}

impl<A: Annotator> CachedAnnotator<A> {
    pub fn new(inner: A, cache: AnnotationCache) -> CachedAnnotator<A> {
        CachedAnnotator { inner, cache }
    }

    pub fn cache(&self) -> &AnnotationCache {
        &self.cache
    }
}

impl<A: Annotator> Annotator for CachedAnnotator<A> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }

    fn annotate(&self, text: &str) -> Result<Annotation, SentimentError> {
        if text.trim().is_empty() {
            return Err(SentimentError::EmptyText);
        }
        if let Some(hit) = self.cache.get(text) {
            return Ok(hit);
        }
        let annotation = self.inner.annotate(text)?;
        self.cache.put(text, &annotation)?;
        Ok(annotation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        calls: AtomicUsize,
    }

    impl Annotator for Counting {
        fn name(&self) -> &str {
            "counting"
        }
        fn deterministic(&self) -> bool {
            true
        }
        fn annotate(&self, text: &str) -> Result<Annotation, SentimentError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(Annotation {
                sentiment: text.len() as f64 % 2.0 - 1.0,
                entities: BTreeSet::new(),
            })
        }
    }

    #[test]
    fn second_lookup_hits_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let annotator = CachedAnnotator::new(
            Counting { calls: AtomicUsize::new(0) },
            AnnotationCache::open(&path).unwrap(),
        );
        let a = annotator.annotate("ciao").unwrap();
        let b = annotator.annotate("ciao").unwrap();
        assert_eq!(a, b);
        assert_eq!(annotator.inner.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn cache_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let cache = AnnotationCache::open(&path).unwrap();
            cache
                .put(
                    "testo",
                    &Annotation {
                        sentiment: 0.25,
                        entities: ["renzi".to_string()].into_iter().collect(),
                    },
                )
                .unwrap();
        }
        let cache = AnnotationCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        let hit = cache.get("testo").unwrap();
        assert_eq!(hit.sentiment, 0.25);
        assert!(hit.entities.contains("renzi"));
        assert!(cache.get("altro").is_none());
    }
}
