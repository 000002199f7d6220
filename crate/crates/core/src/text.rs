//! Text normalization shared by the topic filter, the lexicon annotator,
//! and the gazetteer matcher.
//!
//! Normalization is Unicode case folding (lowercase) plus accent stripping
//! (NFD decomposition, combining marks removed). Matching is always on word
//! boundaries: text is reduced to a sequence of alphanumeric tokens.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercase and strip accents: "Riforma Costituzionale" and
/// "rifórma costituzionale" normalize to the same string.
pub fn normalize(text: &str) -> String {
    text.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Normalized word tokens: maximal alphanumeric runs of the normalized text.
/// Punctuation, hyphens, and URL separators all act as boundaries, so
/// "riforma-costituzionale-referendum" yields three tokens.
pub fn tokens(text: &str) -> Vec<String> {
    normalize(text)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A phrase is a nonempty token sequence; single keywords are one-token
/// phrases, gazetteer aliases may span several tokens.
pub type Phrase = Vec<String>;

pub fn phrase(text: &str) -> Phrase {
    tokens(text)
}

/// True if `needle` occurs as a contiguous token subsequence of `haystack`.
pub fn contains_phrase(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_folds_case_and_accents() {
        assert_eq!(normalize("Rifórma"), "riforma");
        assert_eq!(normalize("COSTITUZIONALE"), "costituzionale");
        assert_eq!(normalize("Perché È"), "perche e");
    }

    #[test]
    fn tokens_split_on_word_boundaries() {
        assert_eq!(
            tokens("Referendum Costituzionale: le ragioni del No"),
            vec!["referendum", "costituzionale", "le", "ragioni", "del", "no"]
        );
        assert_eq!(
            tokens("https://x.it/riforma-costituzionale-referendum"),
            vec!["https", "x", "it", "riforma", "costituzionale", "referendum"]
        );
    }

    #[test]
    fn phrase_matching_is_contiguous() {
        let hay = tokens("il senato della repubblica vota");
        assert!(contains_phrase(&hay, &phrase("senato della repubblica")));
        assert!(!contains_phrase(&hay, &phrase("senato vota")));
        assert!(!contains_phrase(&hay, &[]));
    }
}
