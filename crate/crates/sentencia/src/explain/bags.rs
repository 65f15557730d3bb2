//! Per-category term bags mined from decision-path traversals.
//!
//! Every reference document is routed through every tree; features taken on
//! RIGHT branches are credited to the leaf's category. Each category's
//! accumulated pool is then reconstructed: char-grams expand into containing
//! word-grams or longer char-grams, frequencies flow to the expansion target
//! (transitively, so a char-gram expanding into a longer char-gram that
//! itself expands into a word lands on the word), and sub-four-character
//! grams drop out. Bags list the final terms by descending updated frequency.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::reconstruct::{target_in_pool, PoolEntry, MIN_CHAR_GRAM_CHARS};
use crate::explain::{relevant_features, trace_path};
use crate::featurize::{CountVector, FeatureKind, FeatureSpace};
use crate::trees::ForestModel;

pub const BAGS_FILE_VERSION: u32 = 1;

/// How one pool feature expanded (None = discarded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub kind: FeatureKind,
    pub text: String,
    pub term: Option<String>,
}

/// The reconstructed terms that explain decisions for one category of one
/// jurisdiction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryBag {
    pub jurisdiction: String,
    pub category: String,
    /// `(term, updated frequency)`, descending frequency, ties by term text.
    pub terms: Vec<(String, u64)>,
    /// The accumulated relevant features the bag was reconstructed from.
    pub pool: Vec<PoolEntry>,
    /// Final expansion of every pool feature.
    pub expansions: Vec<ExpansionRecord>,
}

impl CategoryBag {
    /// `term<TAB>frequency` rows in bag order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("term\tfrequency\n");
        for (term, frequency) in &self.terms {
            out.push_str(&format!("{term}\t{frequency}\n"));
        }
        out
    }

    pub fn expansion_lookup(&self) -> HashMap<(FeatureKind, &str), Option<&str>> {
        self.expansions
            .iter()
            .map(|r| ((r.kind, r.text.as_str()), r.term.as_deref()))
            .collect()
    }

    pub fn total_frequency(&self) -> u64 {
        self.terms.iter().map(|(_, f)| f).sum()
    }
}

/// Every category bag of one jurisdiction, bound to the model's feature
/// space by fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagSet {
    pub version: u32,
    pub jurisdiction: String,
    pub feature_fingerprint: String,
    /// Reference-set descriptor recorded for provenance ("train", ...).
    pub reference: String,
    pub bags: Vec<CategoryBag>,
}

impl BagSet {
    pub fn get(&self, category: &str) -> Option<&CategoryBag> {
        self.bags.iter().find(|b| b.category == category)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let set: BagSet = serde_json::from_str(&fs::read_to_string(path)?)?;
        if set.version != BAGS_FILE_VERSION {
            return Err(Error::UnsupportedVersion {
                found: set.version,
                expected: BAGS_FILE_VERSION,
            });
        }
        Ok(set)
    }
}

/// Trace every reference document through every tree of the forest,
/// attribute RIGHT-branch features to each path's leaf category, reconstruct
/// the char-grams of every category pool and emit frequency-ordered bags
/// (one per category, possibly empty).
pub fn build_bags(
    forest: &ForestModel,
    space: &FeatureSpace,
    reference: &[CountVector],
    jurisdiction: &str,
    reference_name: &str,
) -> Result<BagSet> {
    if forest.feature_fingerprint() != space.fingerprint() {
        return Err(Error::FingerprintMismatch {
            model: forest.feature_fingerprint().to_string(),
            space: space.fingerprint(),
        });
    }

    let categories = forest.categories();
    let mut pools: Vec<BTreeMap<u32, u64>> = vec![BTreeMap::new(); categories.len()];
    for vector in reference {
        for (tree_id, tree) in forest.trees.iter().enumerate() {
            let path = trace_path(tree, vector, tree_id);
            let features = relevant_features(&path, tree);
            if features.is_empty() {
                continue;
            }
            let pool = &mut pools[path.leaf_category];
            for rf in features {
                *pool.entry(rf.feature).or_insert(0) += rf.frequency;
            }
        }
    }

    let bags = categories
        .iter()
        .zip(pools)
        .map(|(category, pool)| {
            // Feature indices ascend in (kind, text) order, so the pool is
            // already deterministically ordered.
            let entries: Vec<PoolEntry> = pool
                .iter()
                .map(|(&feature, &frequency)| {
                    let f = space
                        .feature(feature)
                        .ok_or(Error::FeatureIndexOutOfRange {
                            index: feature,
                            size: space.len(),
                        })?;
                    Ok(PoolEntry {
                        kind: f.kind,
                        text: f.text.clone(),
                        frequency,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(reconstruct_pool(jurisdiction, category, entries))
        })
        .collect::<Result<Vec<CategoryBag>>>()?;

    Ok(BagSet {
        version: BAGS_FILE_VERSION,
        jurisdiction: jurisdiction.to_string(),
        feature_fingerprint: space.fingerprint(),
        reference: reference_name.to_string(),
        bags,
    })
}

/// Reconstruct one category pool into its bag. Expansion targets are chosen
/// against the pool snapshot (pre-reconstruction frequencies), then each
/// feature's frequency flows to its final term.
pub fn reconstruct_pool(jurisdiction: &str, category: &str, pool: Vec<PoolEntry>) -> CategoryBag {
    // Direct target per entry: None = discarded, Some(i) = final or chained.
    #[derive(Clone, Copy, PartialEq)]
    enum Target {
        Discarded,
        SelfTerm,
        Entry(usize),
    }

    let direct: Vec<Target> = pool
        .iter()
        .enumerate()
        .map(|(i, entry)| match entry.kind {
            FeatureKind::Word => Target::SelfTerm,
            FeatureKind::Char => {
                if entry.text.chars().count() < MIN_CHAR_GRAM_CHARS {
                    Target::Discarded
                } else {
                    match target_in_pool(&pool, i) {
                        Some(j) => Target::Entry(j),
                        None => Target::SelfTerm,
                    }
                }
            }
        })
        .collect();

    // Chains always point at strictly longer char-grams or at word-grams, so
    // they terminate.
    fn resolve(direct: &[Target], i: usize) -> Option<usize> {
        match direct[i] {
            Target::Discarded => None,
            Target::SelfTerm => Some(i),
            Target::Entry(j) => resolve(direct, j),
        }
    }

    let mut frequencies: BTreeMap<&str, u64> = BTreeMap::new();
    let mut expansions = Vec::with_capacity(pool.len());
    for (i, entry) in pool.iter().enumerate() {
        let term = resolve(&direct, i).map(|j| pool[j].text.as_str());
        if let Some(term) = term {
            *frequencies.entry(term).or_insert(0) += entry.frequency;
        }
        expansions.push(ExpansionRecord {
            kind: entry.kind,
            text: entry.text.clone(),
            term: term.map(str::to_string),
        });
    }

    let mut terms: Vec<(String, u64)> = frequencies
        .into_iter()
        .map(|(t, f)| (t.to_string(), f))
        .collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    CategoryBag {
        jurisdiction: jurisdiction.to_string(),
        category: category.to_string(),
        terms,
        pool,
        expansions,
    }
}
