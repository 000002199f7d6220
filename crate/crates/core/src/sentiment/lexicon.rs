//! The deterministic offline annotator: token valences from a lexicon file,
//! entities from a gazetteer with longest-match alias lookup.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use thiserror::Error;

use crate::text;

use super::{Annotation, Annotator, SentimentError};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    BadLexiconLine { line: usize, message: String },
    #[error("gazetteer line {line}: {message}")]
    BadGazetteerLine { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Token valences in [-1, 1], keyed by normalized token.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    valence: HashMap<String, f64>,
}

impl Lexicon {
    pub fn from_entries<I: IntoIterator<Item = (String, f64)>>(entries: I) -> Lexicon {
        let mut valence = HashMap::new();
        for (token, v) in entries {
            valence.insert(text::normalize(&token), v);
        }
        Lexicon { valence }
    }

    /// Parses `token,valence` lines; `#` starts a comment line.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Lexicon, LexiconError> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (token, value) =
                trimmed
                    .rsplit_once(',')
                    .ok_or_else(|| LexiconError::BadLexiconLine {
                        line: idx + 1,
                        message: "expected `token,valence`".into(),
                    })?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|e| LexiconError::BadLexiconLine {
                    line: idx + 1,
                    message: format!("bad valence: {e}"),
                })?;
            if !(-1.0..=1.0).contains(&v) {
                return Err(LexiconError::BadLexiconLine {
                    line: idx + 1,
                    message: format!("valence {v} outside [-1, 1]"),
                });
            }
            entries.push((token.trim().to_string(), v));
        }
        Ok(Lexicon::from_entries(entries))
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valence.get(&text::normalize(token)).copied()
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }
}

/// Canonical entities with aliases. Matching is longest-first over normalized
/// token phrases; the canonical name itself always matches.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    /// alias phrase -> canonical entity, checked longest phrase first
    aliases: Vec<(text::Phrase, String)>,
    /// first alias token -> indices into `aliases`
    by_first: HashMap<String, Vec<usize>>,
}

impl Gazetteer {
    pub fn from_entries<I, A>(entries: I) -> Gazetteer
    where
        I: IntoIterator<Item = (String, A)>,
        A: IntoIterator<Item = String>,
    {
        let mut aliases: Vec<(text::Phrase, String)> = Vec::new();
        for (canonical, extra) in entries {
            let canon_norm = text::normalize(&canonical);
            let mut phrases: Vec<text::Phrase> = vec![text::phrase(&canonical)];
            phrases.extend(extra.into_iter().map(|a| text::phrase(&a)));
            for p in phrases.into_iter().filter(|p| !p.is_empty()) {
                aliases.push((p, canon_norm.clone()));
            }
        }
        // longest alias first so greedy scanning prefers the longest match
        aliases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        let mut by_first: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, (phrase, _)) in aliases.iter().enumerate() {
            by_first.entry(phrase[0].clone()).or_default().push(i);
        }
        Gazetteer { aliases, by_first }
    }

    /// Parses `canonical,alias1,alias2,...` lines; `#` starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Gazetteer, LexiconError> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split(',').map(str::trim);
            let canonical = fields
                .next()
                .filter(|c| !c.is_empty())
                .ok_or_else(|| LexiconError::BadGazetteerLine {
                    line: idx + 1,
                    message: "empty canonical entity".into(),
                })?;
            let aliases: Vec<String> = fields
                .filter(|a| !a.is_empty())
                .map(str::to_string)
                .collect();
            entries.push((canonical.to_string(), aliases));
        }
        Ok(Gazetteer::from_entries(entries))
    }

    /// Greedy longest-match scan over a token stream.
    pub fn find(&self, tokens: &[String]) -> BTreeSet<String> {
        let mut found = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut advanced = false;
            if let Some(candidates) = self.by_first.get(&tokens[i]) {
                for &c in candidates {
                    let (phrase, canonical) = &self.aliases[c];
                    if i + phrase.len() <= tokens.len() && tokens[i..i + phrase.len()] == phrase[..]
                    {
                        found.insert(canonical.clone());
                        i += phrase.len();
                        advanced = true;
                        break;
                    }
                }
            }
            if !advanced {
                i += 1;
            }
        }
        found
    }
}

/// Deterministic annotator: sentiment is the clamped mean valence of the
/// lexicon tokens found in the text (neutral 0 when none match); entities are
/// the gazetteer's longest matches.
#[derive(Debug, Clone)]
pub struct LexiconAnnotator {
    lexicon: Lexicon,
    gazetteer: Gazetteer,
}

impl LexiconAnnotator {
    pub fn new(lexicon: Lexicon, gazetteer: Gazetteer) -> LexiconAnnotator {
        LexiconAnnotator { lexicon, gazetteer }
    }
}

impl Annotator for LexiconAnnotator {
    fn name(&self) -> &str {
        "lexicon"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn annotate(&self, raw: &str) -> Result<Annotation, SentimentError> {
        if raw.trim().is_empty() {
            return Err(SentimentError::EmptyText);
        }
        let tokens = text::tokens(raw);
        let valences: Vec<f64> = tokens
            .iter()
            .filter_map(|t| self.lexicon.valence.get(t).copied())
            .collect();
        let sentiment = if valences.is_empty() {
            0.0
        } else {
            (valences.iter().sum::<f64>() / valences.len() as f64).clamp(-1.0, 1.0)
        };
        Ok(Annotation {
            sentiment,
            entities: self.gazetteer.find(&tokens),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotator() -> LexiconAnnotator {
        let lexicon = Lexicon::from_entries([
            ("ottimo".to_string(), 0.8),
            ("pessimo".to_string(), -0.8),
            ("difende".to_string(), 0.3),
        ]);
        let gazetteer = Gazetteer::from_entries([
            ("renzi".to_string(), vec!["matteo renzi".to_string()]),
            ("senato della repubblica".to_string(), vec!["senato".to_string()]),
        ]);
        LexiconAnnotator::new(lexicon, gazetteer)
    }

    #[test]
    fn symmetric_valences_cancel_to_neutral() {
        let a = annotator().annotate("un voto ottimo e un voto pessimo").unwrap();
        assert_eq!(a.sentiment, 0.0);
    }

    #[test]
    fn no_lexicon_tokens_defaults_to_neutral_with_entities() {
        let a = annotator().annotate("Renzi parla al paese").unwrap();
        assert_eq!(a.sentiment, 0.0);
        assert!(a.entities.contains("renzi"));
    }

    #[test]
    fn gazetteer_matches_are_normalized_and_longest_first() {
        let a = annotator().annotate("Renzi difende la riforma").unwrap();
        assert_eq!(a.entities.iter().collect::<Vec<_>>(), vec!["renzi"]);
        assert!((a.sentiment - 0.3).abs() < 1e-15);

        // multi-token alias wins over its prefix
        let b = annotator().annotate("il Senato della Repubblica vota").unwrap();
        assert!(b.entities.contains("senato della repubblica"));
        assert_eq!(b.entities.len(), 1);

        // accented variant still matches the canonical entry
        let c = annotator().annotate("RENZI è qui").unwrap();
        assert!(c.entities.contains("renzi"));
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(matches!(
            annotator().annotate("   "),
            Err(SentimentError::EmptyText)
        ));
    }

    #[test]
    fn same_text_same_annotation() {
        let x = annotator().annotate("Renzi difende la riforma ottimo").unwrap();
        let y = annotator().annotate("Renzi difende la riforma ottimo").unwrap();
        assert_eq!(x, y);
        assert!(annotator().deterministic());
    }

    #[test]
    fn lexicon_file_round_trip() {
        let body = "# token, valence\nottimo,0.8\npessimo,-0.8\n";
        let lex = Lexicon::from_reader(std::io::Cursor::new(body)).unwrap();
        assert_eq!(lex.valence("Ottimo"), Some(0.8));
        assert_eq!(lex.len(), 2);

        let bad = "ottimo,2.0\n";
        assert!(Lexicon::from_reader(std::io::Cursor::new(bad)).is_err());
    }

    #[test]
    fn gazetteer_file_parsing() {
        let body = "renzi,matteo renzi\nboschi\n";
        let gaz = Gazetteer::from_reader(std::io::Cursor::new(body)).unwrap();
        let toks = crate::text::tokens("Matteo Renzi e Boschi");
        let found = gaz.find(&toks);
        assert!(found.contains("renzi"));
        assert!(found.contains("boschi"));
    }
}
