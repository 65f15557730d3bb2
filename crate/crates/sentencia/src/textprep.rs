//! Text normalization: diacritic stripping, tokenization, stop-word removal
//! and lemmatization through a pluggable flat lemma map.
//!
//! The pipeline order is fixed: lowercase, strip diacritics, tokenize on
//! non-alphanumeric boundaries, drop stop words, then map tokens through the
//! lemma map with identity fallback. The output of [`preprocess`] is a fixed
//! point of the pipeline.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Judgment;
use crate::error::Result;

const DEFAULT_STOP_WORDS: &str = include_str!("../resources/stopwords_es.txt");
const DEFAULT_LEMMAS: &str = include_str!("../resources/lemmas_es.tsv");

/// Stop-word list and lemma map, normalized at load time so every entry is
/// lowercase and diacritic-free.
#[derive(Debug, Clone, Default)]
pub struct TextResources {
    stop_words: HashSet<String>,
    lemma_map: HashMap<String, String>,
}

impl TextResources {
    /// No stop words, no lemmas: preprocessing degrades to
    /// lowercase/strip/tokenize.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped Spanish defaults.
    pub fn spanish() -> Self {
        Self::from_strings(DEFAULT_STOP_WORDS, DEFAULT_LEMMAS)
    }

    pub fn new(
        stop_words: impl IntoIterator<Item = String>,
        lemmas: HashMap<String, String>,
    ) -> Self {
        let stop_words: HashSet<String> = stop_words
            .into_iter()
            .map(|w| strip_diacritics(&w.to_lowercase()))
            .filter(|w| !w.is_empty())
            .collect();
        let lemma_map = normalize_lemma_map(lemmas, &stop_words);
        Self {
            stop_words,
            lemma_map,
        }
    }

    /// Parse resources from file contents. Stop-word files hold one word per
    /// line; lemma files hold tab-separated `surface<TAB>lemma` pairs. Lines
    /// starting with `#` are ignored in both.
    pub fn from_strings(stop_words: &str, lemmas: &str) -> Self {
        let words = stop_words
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string);
        let mut map = HashMap::new();
        for line in lemmas.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((surface, lemma)) = line.split_once('\t') {
                map.insert(surface.trim().to_string(), lemma.trim().to_string());
            }
        }
        Self::new(words, map)
    }

    /// Load resources from optional paths, falling back to the shipped
    /// Spanish defaults for any path not given.
    pub fn from_files(stop_words: Option<&Path>, lemmas: Option<&Path>) -> Result<Self> {
        let stop = match stop_words {
            Some(p) => fs::read_to_string(p)?,
            None => DEFAULT_STOP_WORDS.to_string(),
        };
        let lem = match lemmas {
            Some(p) => fs::read_to_string(p)?,
            None => DEFAULT_LEMMAS.to_string(),
        };
        Ok(Self::from_strings(&stop, &lem))
    }

    pub fn is_stop_word(&self, token: &str) -> bool {
        self.stop_words.contains(token)
    }

    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemma_map
            .get(token)
            .map(String::as_str)
            .unwrap_or(token)
    }

    pub fn stop_word_count(&self) -> usize {
        self.stop_words.len()
    }

    pub fn lemma_count(&self) -> usize {
        self.lemma_map.len()
    }
}

/// Normalize lemma entries: keys and values lowercase and diacritic-free,
/// single-token values only, chains resolved to their final lemma (cycles
/// collapse onto the lexicographically smallest member) and entries dropped
/// when they are identities or would reintroduce a stop word.
fn normalize_lemma_map(
    raw: HashMap<String, String>,
    stop_words: &HashSet<String>,
) -> HashMap<String, String> {
    let mut map: HashMap<String, String> = HashMap::new();
    for (k, v) in raw {
        let k = strip_diacritics(&k.to_lowercase());
        let v = strip_diacritics(&v.to_lowercase());
        if k.is_empty() || v.is_empty() || v.split_whitespace().count() != 1 {
            continue;
        }
        map.insert(k, v);
    }

    let keys: Vec<String> = map.keys().cloned().collect();
    let mut resolved: HashMap<String, String> = HashMap::new();
    for key in keys {
        let mut seen = vec![key.clone()];
        let mut current = map[&key].clone();
        while let Some(next) = map.get(&current) {
            if seen.contains(&current) {
                // Cycle: collapse every member onto the smallest one.
                current = seen.iter().chain([&current]).min().unwrap().clone();
                break;
            }
            seen.push(current.clone());
            current = next.clone();
        }
        resolved.insert(key, current);
    }

    resolved
        .into_iter()
        .filter(|(k, v)| k != v && !stop_words.contains(v))
        .collect()
}

/// Remove accents, diaeresis and other diacritical marks, keeping case and
/// all non-marked characters: the text is NFD-decomposed and combining marks
/// are dropped (so `ñ` becomes `n`).
pub fn strip_diacritics(text: &str) -> String {
    text.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

/// Split into maximal runs of alphanumeric characters; punctuation and
/// symbols are separators.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Full normalization pipeline: lowercase -> strip diacritics -> tokenize ->
/// drop stop words -> lemmatize with identity fallback.
pub fn preprocess(text: &str, resources: &TextResources) -> Vec<String> {
    let lowered = strip_diacritics(&text.to_lowercase());
    tokenize(&lowered)
        .into_iter()
        .filter(|t| !resources.is_stop_word(t))
        .map(|t| resources.lemma(t).to_string())
        .collect()
}

/// Normalized document string for a judgment: the preprocessed tokens of its
/// classification text joined with single spaces. This is the string that
/// char-gram and word-gram extraction consume.
pub fn preprocessed_document(judgment: &Judgment, resources: &TextResources) -> String {
    preprocess(&judgment.classification_text(), resources).join(" ")
}
