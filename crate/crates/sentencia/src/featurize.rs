//! Char-gram / word-gram feature space with document-frequency bounds,
//! sparse count vectors, and chi-squared percentile selection.
//!
//! Char-grams are contiguous character windows (spaces included) of the
//! normalized document string, with sizes in `[3, 7]` by default. Word-grams
//! are single tokens and adjacent token pairs joined by one space. A gram
//! becomes a feature when its document frequency over the fitting set lies
//! within `[min_df, max_df]`, both ends inclusive. Feature indices are
//! assigned in sorted `(kind, text)` order so fitting is deterministic
//! regardless of document order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// File format version for serialized feature spaces.
const FEATURE_SPACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Char,
    Word,
}

/// One fitted n-gram feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub index: u32,
    pub kind: FeatureKind,
    /// Gram size: characters for `Char`, words for `Word`.
    pub n: u32,
    pub text: String,
    /// Fraction of fitting documents containing the gram.
    pub doc_frequency: f64,
}

/// Bounds used when fitting a feature space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitOptions {
    pub char_n_min: usize,
    pub char_n_max: usize,
    pub min_df: f64,
    pub max_df: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            char_n_min: 3,
            char_n_max: 7,
            min_df: 0.05,
            max_df: 0.50,
        }
    }
}

/// All character windows of sizes `n_lo..=n_hi`, with multiplicities.
pub fn extract_char_grams(text: &str, n_lo: usize, n_hi: usize) -> HashMap<String, u32> {
    let mut grams = HashMap::new();
    for_each_char_gram(text, n_lo, n_hi, |g| {
        *grams.entry(g.to_string()).or_insert(0) += 1;
    });
    grams
}

/// All single words and adjacent word pairs, with multiplicities.
pub fn extract_word_grams(text: &str) -> HashMap<String, u32> {
    let mut grams = HashMap::new();
    for_each_word_gram(text, |g| {
        *grams.entry(g.into_owned()).or_insert(0) += 1;
    });
    grams
}

fn for_each_char_gram<'t>(text: &'t str, n_lo: usize, n_hi: usize, mut f: impl FnMut(&'t str)) {
    let mut boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    boundaries.push(text.len());
    let n_chars = boundaries.len() - 1;
    for n in n_lo..=n_hi {
        if n == 0 || n > n_chars {
            continue;
        }
        for start in 0..=(n_chars - n) {
            f(&text[boundaries[start]..boundaries[start + n]]);
        }
    }
}

fn for_each_word_gram<'t>(text: &'t str, mut f: impl FnMut(std::borrow::Cow<'t, str>)) {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    for token in &tokens {
        f(std::borrow::Cow::Borrowed(token));
    }
    for pair in tokens.windows(2) {
        f(std::borrow::Cow::Owned(format!("{} {}", pair[0], pair[1])));
    }
}

/// The fitted vocabulary: an ordered feature list plus lookup tables.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    features: Vec<Feature>,
    char_lookup: HashMap<String, u32>,
    word_lookup: HashMap<String, u32>,
    fit_document_count: usize,
    char_n_min: usize,
    char_n_max: usize,
}

impl FeatureSpace {
    fn from_features(
        features: Vec<Feature>,
        fit_document_count: usize,
        char_n_min: usize,
        char_n_max: usize,
    ) -> Self {
        let mut char_lookup = HashMap::new();
        let mut word_lookup = HashMap::new();
        for f in &features {
            match f.kind {
                FeatureKind::Char => char_lookup.insert(f.text.clone(), f.index),
                FeatureKind::Word => word_lookup.insert(f.text.clone(), f.index),
            };
        }
        Self {
            features,
            char_lookup,
            word_lookup,
            fit_document_count,
            char_n_min,
            char_n_max,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, index: u32) -> Option<&Feature> {
        self.features.get(index as usize)
    }

    pub fn index_of(&self, kind: FeatureKind, text: &str) -> Option<u32> {
        match kind {
            FeatureKind::Char => self.char_lookup.get(text).copied(),
            FeatureKind::Word => self.word_lookup.get(text).copied(),
        }
    }

    pub fn fit_document_count(&self) -> usize {
        self.fit_document_count
    }

    /// Sparse occurrence counts of every feature in `doc`, using the same
    /// extraction rules as fitting. Grams absent from the space are ignored.
    pub fn vectorize(&self, doc: &str, doc_id: impl Into<String>) -> CountVector {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for_each_char_gram(doc, self.char_n_min, self.char_n_max, |g| {
            if let Some(&idx) = self.char_lookup.get(g) {
                *counts.entry(idx).or_insert(0) += 1;
            }
        });
        for_each_word_gram(doc, |g| {
            if let Some(&idx) = self.word_lookup.get(g.as_ref()) {
                *counts.entry(idx).or_insert(0) += 1;
            }
        });
        CountVector {
            doc_id: doc_id.into(),
            entries: counts.into_iter().collect(),
        }
    }

    /// Stable content hash binding models to the space they were trained on.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.fit_document_count.to_le_bytes());
        for f in &self.features {
            hasher.update([match f.kind {
                FeatureKind::Char => b'c',
                FeatureKind::Word => b'w',
            }]);
            hasher.update(f.text.as_bytes());
            hasher.update([0u8]);
            hasher.update(f.doc_frequency.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Restrict the space to the given ascending feature indices. Returns the
    /// reduced space (indices reassigned, order preserved) and an old-to-new
    /// index map usable with [`CountVector::project`].
    pub fn subset(&self, keep: &[u32]) -> Result<(FeatureSpace, Vec<Option<u32>>)> {
        let mut map = vec![None; self.features.len()];
        let mut features = Vec::with_capacity(keep.len());
        for (new_idx, &old_idx) in keep.iter().enumerate() {
            let feature = self.feature(old_idx).ok_or(Error::FeatureIndexOutOfRange {
                index: old_idx,
                size: self.features.len(),
            })?;
            let mut feature = feature.clone();
            feature.index = new_idx as u32;
            map[old_idx as usize] = Some(new_idx as u32);
            features.push(feature);
        }
        Ok((
            FeatureSpace::from_features(
                features,
                self.fit_document_count,
                self.char_n_min,
                self.char_n_max,
            ),
            map,
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = FeatureSpaceFile {
            version: FEATURE_SPACE_VERSION,
            fit_document_count: self.fit_document_count,
            char_n_min: self.char_n_min,
            char_n_max: self.char_n_max,
            features: self.features.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: FeatureSpaceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        if file.version != FEATURE_SPACE_VERSION {
            return Err(Error::UnsupportedVersion {
                found: file.version,
                expected: FEATURE_SPACE_VERSION,
            });
        }
        Ok(FeatureSpace::from_features(
            file.features,
            file.fit_document_count,
            file.char_n_min,
            file.char_n_max,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct FeatureSpaceFile {
    version: u32,
    fit_document_count: usize,
    char_n_min: usize,
    char_n_max: usize,
    features: Vec<Feature>,
}

/// Build the combined char-gram/word-gram space over the fitting documents,
/// keeping grams whose document frequency lies in `[min_df, max_df]`.
pub fn fit_feature_space<S: AsRef<str>>(docs: &[S], options: &FitOptions) -> Result<FeatureSpace> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if options.min_df > options.max_df {
        return Err(Error::InvertedDfBounds {
            min: options.min_df,
            max: options.max_df,
        });
    }
    if !(0.0..=1.0).contains(&options.min_df) || !(0.0..=1.0).contains(&options.max_df) {
        return Err(Error::InvalidHyperparam(format!(
            "document frequency bounds must lie in [0, 1], got [{}, {}]",
            options.min_df, options.max_df
        )));
    }
    if options.char_n_min == 0 || options.char_n_min > options.char_n_max {
        return Err(Error::InvalidHyperparam(format!(
            "char n-gram range [{}, {}] is invalid",
            options.char_n_min, options.char_n_max
        )));
    }

    let mut char_df: HashMap<String, u32> = HashMap::new();
    let mut word_df: HashMap<String, u32> = HashMap::new();
    for doc in docs {
        let doc = doc.as_ref();
        let mut seen_chars: HashSet<&str> = HashSet::new();
        for_each_char_gram(doc, options.char_n_min, options.char_n_max, |g| {
            seen_chars.insert(g);
        });
        for g in seen_chars {
            *char_df.entry(g.to_string()).or_insert(0) += 1;
        }
        let mut seen_words: HashSet<String> = HashSet::new();
        for_each_word_gram(doc, |g| {
            seen_words.insert(g.into_owned());
        });
        for g in seen_words {
            *word_df.entry(g).or_insert(0) += 1;
        }
    }

    let total = docs.len() as f64;
    let mut keyed: Vec<(FeatureKind, String, u32)> = Vec::new();
    for (text, count) in char_df {
        let df = count as f64 / total;
        if df >= options.min_df && df <= options.max_df {
            keyed.push((FeatureKind::Char, text, count));
        }
    }
    for (text, count) in word_df {
        let df = count as f64 / total;
        if df >= options.min_df && df <= options.max_df {
            keyed.push((FeatureKind::Word, text, count));
        }
    }
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let features = keyed
        .into_iter()
        .enumerate()
        .map(|(index, (kind, text, count))| {
            let n = match kind {
                FeatureKind::Char => text.chars().count(),
                FeatureKind::Word => text.split(' ').count(),
            };
            Feature {
                index: index as u32,
                kind,
                n: n as u32,
                text,
                doc_frequency: count as f64 / total,
            }
        })
        .collect();

    Ok(FeatureSpace::from_features(
        features,
        docs.len(),
        options.char_n_min,
        options.char_n_max,
    ))
}

/// Sparse per-document occurrence counts, indexed by the owning feature space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub doc_id: String,
    /// `(feature index, count)` pairs, count > 0, ascending by index.
    entries: Vec<(u32, u32)>,
}

impl CountVector {
    pub fn new(doc_id: impl Into<String>, mut entries: Vec<(u32, u32)>) -> Self {
        entries.retain(|&(_, c)| c > 0);
        entries.sort_by_key(|&(i, _)| i);
        Self {
            doc_id: doc_id.into(),
            entries,
        }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn get(&self, index: u32) -> u32 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Re-index through an old-to-new map (from [`FeatureSpace::subset`]),
    /// dropping entries whose feature was not kept.
    pub fn project(&self, map: &[Option<u32>]) -> CountVector {
        let entries = self
            .entries
            .iter()
            .filter_map(|&(i, c)| map.get(i as usize).copied().flatten().map(|n| (n, c)))
            .collect();
        CountVector {
            doc_id: self.doc_id.clone(),
            entries,
        }
    }
}

/// Chi-squared scores and the selected top-percentile index set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chi2Report {
    pub scores: Vec<f64>,
    /// Selected feature indices, ascending.
    pub selected: Vec<u32>,
    pub percentile: f64,
}

impl Chi2Report {
    /// Tab-separated per-feature report: index, kind, n, text, document
    /// frequency, score, selected flag.
    pub fn to_tsv(&self, space: &FeatureSpace) -> String {
        let selected: HashSet<u32> = self.selected.iter().copied().collect();
        let mut out = String::from("index\tkind\tn\ttext\tdoc_frequency\tscore\tselected\n");
        for f in space.features() {
            let kind = match f.kind {
                FeatureKind::Char => "char",
                FeatureKind::Word => "word",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\n",
                f.index,
                kind,
                f.n,
                f.text,
                f.doc_frequency,
                self.scores[f.index as usize],
                selected.contains(&f.index) as u8,
            ));
        }
        out
    }
}

/// Score every feature against the category labels and select the top
/// `percentile` percent (ceiling, at least one feature), ties broken by the
/// lower feature index.
///
/// For feature `f` with per-category observed count mass `O_c` and expected
/// mass `E_c = (sum_c O_c) * N_c / N`, the score is
/// `sum over categories with E_c > 0 of (O_c - E_c)^2 / E_c`.
pub fn chi2_select<S: AsRef<str>>(
    vectors: &[CountVector],
    labels: &[S],
    n_features: usize,
    percentile: f64,
) -> Result<Chi2Report> {
    if vectors.len() != labels.len() {
        return Err(Error::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let categories: Vec<&str> = {
        let mut set: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
        set.sort_unstable();
        set.dedup();
        set
    };
    if categories.len() < 2 {
        return Err(Error::SingleCategory(categories.len()));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::InvalidHyperparam(format!(
            "selection percentile must lie in [0, 100], got {percentile}"
        )));
    }

    let cat_index: HashMap<&str, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let n_cats = categories.len();
    let mut cat_doc_counts = vec![0u64; n_cats];
    let mut observed = vec![0u64; n_features * n_cats];
    for (vector, label) in vectors.iter().zip(labels) {
        let c = cat_index[label.as_ref()];
        cat_doc_counts[c] += 1;
        for &(idx, count) in vector.entries() {
            if (idx as usize) < n_features {
                observed[idx as usize * n_cats + c] += count as u64;
            } else {
                return Err(Error::FeatureIndexOutOfRange {
                    index: idx,
                    size: n_features,
                });
            }
        }
    }

    let n_docs = vectors.len() as f64;
    let mut scores = vec![0.0f64; n_features];
    for f in 0..n_features {
        let row = &observed[f * n_cats..(f + 1) * n_cats];
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let mut score = 0.0;
        for c in 0..n_cats {
            let expected = total as f64 * (cat_doc_counts[c] as f64 / n_docs);
            if expected > 0.0 {
                let diff = row[c] as f64 - expected;
                score += diff * diff / expected;
            }
        }
        scores[f] = score;
    }

    let k = if n_features == 0 {
        0
    } else {
        (((percentile * n_features as f64) / 100.0).ceil() as usize).clamp(1, n_features)
    };
    let mut order: Vec<u32> = (0..n_features as u32).collect();
    order.sort_by(|&a, &b| {
        scores[b as usize]
            .partial_cmp(&scores[a as usize])
            .expect("chi2 scores are finite")
            .then(a.cmp(&b))
    });
    let mut selected: Vec<u32> = order.into_iter().take(k).collect();
    selected.sort_unstable();

    Ok(Chi2Report {
        scores,
        selected,
        percentile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_of(docs: &[&str], min_df: f64, max_df: f64) -> FeatureSpace {
        fit_feature_space(
            docs,
            &FitOptions {
                min_df,
                max_df,
                ..FitOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn char_grams_slide_with_spaces() {
        let grams = extract_char_grams("ab cd", 3, 3);
        let mut keys: Vec<&str> = grams.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, vec![" cd", "ab ", "b c"]);
    }

    #[test]
    fn char_grams_single_window_and_short_text() {
        let grams = extract_char_grams("abcd", 4, 4);
        assert_eq!(grams.len(), 1);
        assert_eq!(grams["abcd"], 1);
        assert!(extract_char_grams("ab", 3, 7).is_empty());
    }

    #[test]
    fn char_grams_contain_paper_fragments() {
        let grams = extract_char_grams("hipotecario", 3, 7);
        assert!(grams.contains_key("hipotec"));
        assert!(grams.contains_key("ecario"));
    }

    #[test]
    fn word_grams_unigrams_and_bigrams() {
        let grams = extract_word_grams("a b c");
        let mut keys: Vec<&str> = grams.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, vec!["a", "a b", "b", "b c", "c"]);

        let single = extract_word_grams("x");
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn word_grams_keep_multiplicity() {
        let grams = extract_word_grams("pension alimenticio pension");
        assert_eq!(grams["pension"], 2);
        assert_eq!(grams["pension alimenticio"], 1);
    }

    #[test]
    fn df_bounds_are_inclusive() {
        // 20 docs over a z-free alphabet; "unico" appears once: df = 0.05.
        let mut docs: Vec<String> = (0..19).map(|i| format!("caso num{i}")).collect();
        docs.push("caso unico".to_string());
        let space = space_of(
            &docs.iter().map(String::as_str).collect::<Vec<_>>(),
            0.05,
            0.50,
        );
        assert!(space.index_of(FeatureKind::Word, "unico").is_some());
        // "caso" is in every doc: df = 1.0 > 0.5, dropped.
        assert!(space.index_of(FeatureKind::Word, "caso").is_none());
    }

    #[test]
    fn df_above_max_is_dropped() {
        // "comun" in 11 of 20 docs: df = 0.55 > 0.50.
        let docs: Vec<String> = (0..20)
            .map(|i| {
                if i < 11 {
                    format!("comun filler{i}")
                } else {
                    format!("filler{i} relleno")
                }
            })
            .collect();
        let space = space_of(
            &docs.iter().map(String::as_str).collect::<Vec<_>>(),
            0.05,
            0.50,
        );
        assert!(space.index_of(FeatureKind::Word, "comun").is_none());
    }

    #[test]
    fn identical_docs_yield_empty_space() {
        let docs = vec!["mismo texto"; 10];
        let space = space_of(&docs, 0.05, 0.50);
        assert!(space.is_empty());
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let docs: Vec<&str> = vec![];
        assert!(matches!(
            fit_feature_space(&docs, &FitOptions::default()),
            Err(Error::EmptyCorpus)
        ));
        assert!(matches!(
            fit_feature_space(
                &["a"],
                &FitOptions {
                    min_df: 0.6,
                    max_df: 0.2,
                    ..FitOptions::default()
                }
            ),
            Err(Error::InvertedDfBounds { .. })
        ));
    }

    #[test]
    fn indices_are_sorted_and_gapless() {
        let docs = ["uno dos", "dos tres", "tres uno", "cuatro cinco"];
        let space = space_of(&docs, 0.25, 0.75);
        for (i, f) in space.features().iter().enumerate() {
            assert_eq!(f.index as usize, i);
        }
        let keys: Vec<(FeatureKind, &str)> = space
            .features()
            .iter()
            .map(|f| (f.kind, f.text.as_str()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn fitting_is_order_invariant() {
        let a = [
            "uno dos tres",
            "dos tres cuatro",
            "tres cuatro cinco",
            "seis siete",
        ];
        let mut b = a;
        b.reverse();
        let sa = space_of(&a, 0.25, 0.75);
        let sb = space_of(&b, 0.25, 0.75);
        assert_eq!(sa.features(), sb.features());
        assert_eq!(sa.fingerprint(), sb.fingerprint());
    }

    #[test]
    fn vectorize_matches_hand_count() {
        // Fit on two docs so grams of doc0 survive df <= 0.5 bounds.
        let docs = ["gato come pescado gato", "perro come hueso seco"];
        let space = space_of(&docs, 0.05, 0.50);
        let v = space.vectorize(docs[0], "d0");
        let gato = space.index_of(FeatureKind::Word, "gato").unwrap();
        let pescado = space.index_of(FeatureKind::Word, "pescado").unwrap();
        assert_eq!(v.get(gato), 2);
        assert_eq!(v.get(pescado), 1);
        // "come" is in both docs (df = 1.0): not a feature at these bounds.
        assert_eq!(space.index_of(FeatureKind::Word, "come"), None);
        let bigram = space.index_of(FeatureKind::Word, "gato come").unwrap();
        assert_eq!(v.get(bigram), 1);
    }

    #[test]
    fn vectorize_unrelated_doc_is_empty() {
        let docs = ["gato come pescado", "perro come hueso"];
        let space = space_of(&docs, 0.05, 0.50);
        let v = space.vectorize("xyz qrs", "d");
        assert!(v.is_empty());
    }

    #[test]
    fn doubling_a_doc_doubles_every_count() {
        let docs = ["gato come pescado", "perro bebe agua"];
        let space = space_of(&docs, 0.05, 0.50);
        let single = space.vectorize(docs[0], "a");
        // The z-run separator cannot form any fitted gram, so no window
        // spanning the junction can match a feature.
        let doubled = space.vectorize(&format!("{} zzzzzzzz {}", docs[0], docs[0]), "b");
        for &(idx, count) in single.entries() {
            assert_eq!(doubled.get(idx), 2 * count, "feature {idx}");
        }
        assert_eq!(doubled.entries().len(), single.entries().len());
    }

    #[test]
    fn chi2_hand_contingency() {
        // 2 categories, 10 docs each; the feature occurs once in every A doc.
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            vectors.push(CountVector::new(format!("a{i}"), vec![(0, 1)]));
            labels.push("A");
        }
        for i in 0..10 {
            vectors.push(CountVector::new(format!("b{i}"), vec![]));
            labels.push("B");
        }
        let report = chi2_select(&vectors, &labels, 1, 100.0).unwrap();
        assert!((report.scores[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_uniform_feature_scores_zero() {
        let vectors: Vec<CountVector> = (0..8)
            .map(|i| CountVector::new(format!("d{i}"), vec![(0, 3)]))
            .collect();
        let labels = ["A", "A", "A", "A", "B", "B", "B", "B"];
        let report = chi2_select(&vectors, &labels, 1, 100.0).unwrap();
        assert_eq!(report.scores[0], 0.0);
    }

    #[test]
    fn chi2_percentile_100_selects_all() {
        let vectors = vec![
            CountVector::new("a", vec![(0, 1), (2, 4)]),
            CountVector::new("b", vec![(1, 2)]),
        ];
        let labels = ["A", "B"];
        let report = chi2_select(&vectors, &labels, 3, 100.0).unwrap();
        assert_eq!(report.selected, vec![0, 1, 2]);
    }

    #[test]
    fn chi2_selects_ceil_with_minimum_one() {
        let vectors = vec![
            CountVector::new("a", vec![(0, 5), (1, 1)]),
            CountVector::new("b", vec![(1, 1), (2, 2)]),
        ];
        let labels = ["A", "B"];
        let report = chi2_select(&vectors, &labels, 3, 20.0).unwrap();
        assert_eq!(report.selected.len(), 1, "ceil(0.2 * 3) = 1");
        let report = chi2_select(&vectors, &labels, 3, 1.0).unwrap();
        assert_eq!(report.selected.len(), 1, "minimum one survives");
    }

    #[test]
    fn chi2_rejects_single_category() {
        let vectors = vec![CountVector::new("a", vec![(0, 1)])];
        let labels = ["A"];
        assert!(matches!(
            chi2_select(&vectors, &labels, 1, 20.0),
            Err(Error::SingleCategory(1))
        ));
    }

    #[test]
    fn chi2_is_permutation_invariant() {
        let vectors = vec![
            CountVector::new("a", vec![(0, 3), (1, 1)]),
            CountVector::new("b", vec![(0, 1)]),
            CountVector::new("c", vec![(1, 5)]),
            CountVector::new("d", vec![(2, 2), (0, 1)]),
        ];
        let labels = ["A", "B", "A", "B"];
        let fwd = chi2_select(&vectors, &labels, 3, 50.0).unwrap();
        let rev_vectors: Vec<CountVector> = vectors.iter().rev().cloned().collect();
        let rev_labels: Vec<&str> = labels.iter().rev().copied().collect();
        let rev = chi2_select(&rev_vectors, &rev_labels, 3, 50.0).unwrap();
        assert_eq!(fwd.scores, rev.scores);
        assert_eq!(fwd.selected, rev.selected);
    }

    #[test]
    fn subset_reindexes_and_projects() {
        let docs = [
            "uno dos tres",
            "dos tres cuatro",
            "cinco seis",
            "siete ocho",
        ];
        let space = space_of(&docs, 0.25, 0.75);
        let keep: Vec<u32> = space
            .features()
            .iter()
            .filter(|f| f.kind == FeatureKind::Word && f.n == 1)
            .map(|f| f.index)
            .collect();
        let (reduced, map) = space.subset(&keep).unwrap();
        assert_eq!(reduced.len(), keep.len());
        let v = space.vectorize(docs[0], "d0");
        let projected = v.project(&map);
        let direct = reduced.vectorize(docs[0], "d0");
        assert_eq!(projected, direct);
    }

    #[test]
    fn save_load_round_trip() {
        let docs = ["uno dos tres", "dos tres cuatro", "cinco seis"];
        let space = space_of(&docs, 0.25, 0.75);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.json");
        space.save(&path).unwrap();
        let loaded = FeatureSpace::load(&path).unwrap();
        assert_eq!(space.features(), loaded.features());
        assert_eq!(space.fingerprint(), loaded.fingerprint());
    }
}
