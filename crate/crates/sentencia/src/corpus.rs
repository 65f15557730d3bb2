//! Judgment data model, corpus ingestion and the train/test split protocol.
//!
//! A corpus file is line-delimited UTF-8: one JSON record per line with the
//! fields of [`Judgment`]. Judgments are grouped by jurisdiction on ingest and
//! each jurisdiction is split independently into a train set, a test #1 set
//! drawn from the rebalanced pool, and a test #2 set that preserves the
//! original category proportions of the full jurisdiction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Categories with more than this many samples are downsampled.
pub const DOWNSAMPLE_THRESHOLD: usize = 5_000;
/// Categories with fewer than this many samples are discarded from train/test1.
pub const MIN_CATEGORY_SAMPLES: usize = 50;
/// Fraction of the rebalanced pool that goes to the train set (4/5).
pub const TRAIN_FRACTION_NUM: usize = 4;
pub const TRAIN_FRACTION_DEN: usize = 5;

/// One court document with its section texts and expert labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub id: String,
    pub jurisdiction: String,
    pub header: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precedents: Option<String>,
    pub fundamentals: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<String>,
    pub primary_category: String,
    #[serde(default)]
    pub alt_categories: Vec<String>,
}

impl Judgment {
    /// The text used for classification: header and law fundamentals joined
    /// by a single space. Precedents and the court decision are never
    /// included; those sections carry less category signal.
    pub fn classification_text(&self) -> String {
        format!("{} {}", self.header, self.fundamentals)
            .trim()
            .to_string()
    }

    /// Primary label followed by the alternative labels.
    pub fn gold_labels(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.primary_category.as_str())
            .chain(self.alt_categories.iter().map(String::as_str))
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.jurisdiction.is_empty() {
            return Err("empty jurisdiction".into());
        }
        if self.primary_category.is_empty() {
            return Err("empty primary category".into());
        }
        if self.alt_categories.len() > 2 {
            return Err(format!(
                "{} alternative categories (at most 2 allowed)",
                self.alt_categories.len()
            ));
        }
        if self.alt_categories.contains(&self.primary_category) {
            return Err("alternative duplicates primary".into());
        }
        Ok(())
    }
}

/// All judgments of one jurisdiction, with per-category sample counts
/// (by primary label).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JurisdictionDataset {
    pub jurisdiction: String,
    pub judgments: Vec<Judgment>,
    pub category_counts: BTreeMap<String, usize>,
}

impl JurisdictionDataset {
    pub fn new(jurisdiction: impl Into<String>, judgments: Vec<Judgment>) -> Self {
        let jurisdiction = jurisdiction.into();
        let mut category_counts = BTreeMap::new();
        for j in &judgments {
            *category_counts
                .entry(j.primary_category.clone())
                .or_insert(0) += 1;
        }
        Self {
            jurisdiction,
            judgments,
            category_counts,
        }
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<&Judgment> {
        self.judgments.iter().find(|j| j.id == id)
    }
}

/// A problem found in one corpus record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordIssue {
    /// 1-based line number in the corpus file.
    pub line: usize,
    pub id: Option<String>,
    pub problem: String,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "line {}: record {:?}: {}", self.line, id, self.problem),
            None => write!(f, "line {}: {}", self.line, self.problem),
        }
    }
}

/// Read a line-delimited corpus, group judgments by jurisdiction and compute
/// category counts. All malformed records are collected and reported together
/// with their line numbers; duplicate ids report both locations.
pub fn ingest_corpus<R: BufRead>(reader: R) -> Result<Vec<JurisdictionDataset>> {
    let mut issues = Vec::new();
    let mut seen_ids: HashMap<String, usize> = HashMap::new();
    let mut by_jurisdiction: BTreeMap<String, Vec<Judgment>> = BTreeMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let judgment: Judgment = match serde_json::from_str(&line) {
            Ok(j) => j,
            Err(e) => {
                issues.push(RecordIssue {
                    line: line_no,
                    id: None,
                    problem: format!("parse error: {e}"),
                });
                continue;
            }
        };
        if let Err(problem) = judgment.check() {
            issues.push(RecordIssue {
                line: line_no,
                id: Some(judgment.id.clone()),
                problem,
            });
            continue;
        }
        match seen_ids.get(&judgment.id) {
            Some(first_line) => {
                issues.push(RecordIssue {
                    line: line_no,
                    id: Some(judgment.id.clone()),
                    problem: format!("duplicate id (first seen at line {first_line})"),
                });
                continue;
            }
            None => {
                seen_ids.insert(judgment.id.clone(), line_no);
            }
        }
        by_jurisdiction
            .entry(judgment.jurisdiction.clone())
            .or_default()
            .push(judgment);
    }

    if !issues.is_empty() {
        return Err(Error::Ingest(issues));
    }
    Ok(by_jurisdiction
        .into_iter()
        .map(|(jurisdiction, judgments)| JurisdictionDataset::new(jurisdiction, judgments))
        .collect())
}

pub fn ingest_corpus_path(path: impl AsRef<Path>) -> Result<Vec<JurisdictionDataset>> {
    let file = File::open(path)?;
    ingest_corpus(BufReader::new(file))
}

/// Outcome of splitting one jurisdiction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub jurisdiction: String,
    pub seed: u64,
    pub train: BTreeSet<String>,
    pub test1: BTreeSet<String>,
    pub test2: BTreeSet<String>,
    /// Categories excluded from train/test1 because they had
    /// fewer than 50 samples.
    pub discarded_categories: BTreeSet<String>,
    /// category -> (original count, retained count) for categories that
    /// exceeded 5,000 samples.
    pub downsampled_categories: BTreeMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SplitOptions {
    /// Stratify the 80/20 train/test1 split per category. Off by default:
    /// the protocol splits the rebalanced pool uniformly at random.
    pub stratified: bool,
}

/// Split one jurisdiction with the default options.
pub fn split_dataset(dataset: &JurisdictionDataset, seed: u64) -> Result<SplitResult> {
    split_dataset_with(dataset, seed, SplitOptions::default())
}

/// Split one jurisdiction into train / test #1 / test #2.
///
/// 1. Every category with more than 5,000 samples is randomly downsampled to
///    the next thousand strictly above the size of the largest category of
///    the jurisdiction with fewer than 5,000 samples (or to 5,000 when no
///    such category exists).
/// 2. Every category with fewer than 50 samples is discarded from the
///    train/test1 pool.
/// 3. The remaining pool is split 80/20 into train and test #1.
/// 4. Test #2 is drawn from the jurisdiction minus the train set, preserving
///    the category proportions of the full original dataset, with
///    `|test2| = |test1|`. Test #2 may overlap test #1 but never train.
///
/// Deterministic for a given `(dataset, seed)` pair.
pub fn split_dataset_with(
    dataset: &JurisdictionDataset,
    seed: u64,
    options: SplitOptions,
) -> Result<SplitResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = &dataset.category_counts;
    let total = dataset.len();

    let eligible = counts
        .values()
        .filter(|&&c| c >= MIN_CATEGORY_SAMPLES)
        .count();
    if eligible == 0 {
        return Err(Error::NoEligibleCategories {
            jurisdiction: dataset.jurisdiction.clone(),
            total: counts.len(),
        });
    }

    // Ids per category, in dataset order.
    let mut ids_by_category: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for j in &dataset.judgments {
        ids_by_category
            .entry(j.primary_category.as_str())
            .or_default()
            .push(j.id.as_str());
    }

    let downsample_target = downsample_target(counts);
    let mut downsampled_categories = BTreeMap::new();
    let mut discarded_categories = BTreeSet::new();
    let mut pool: Vec<&str> = Vec::new();
    let mut pool_by_category: BTreeMap<&str, Vec<&str>> = BTreeMap::new();

    for (category, ids) in &ids_by_category {
        let count = ids.len();
        if count < MIN_CATEGORY_SAMPLES {
            discarded_categories.insert((*category).to_string());
            continue;
        }
        let retained: Vec<&str> = if count > DOWNSAMPLE_THRESHOLD {
            let target =
                downsample_target.expect("a category above 5,000 implies a defined target");
            let mut shuffled = ids.clone();
            shuffled.shuffle(&mut rng);
            shuffled.truncate(target);
            downsampled_categories.insert((*category).to_string(), (count, target));
            shuffled
        } else {
            ids.clone()
        };
        pool.extend(&retained);
        pool_by_category.insert(category, retained);
    }

    // 80/20 split of the pool.
    let (train, test1) = if options.stratified {
        let mut train = Vec::new();
        let mut test1 = Vec::new();
        for ids in pool_by_category.values() {
            let mut ids = ids.clone();
            ids.shuffle(&mut rng);
            let cut = ids.len() * TRAIN_FRACTION_NUM / TRAIN_FRACTION_DEN;
            train.extend(&ids[..cut]);
            test1.extend(&ids[cut..]);
        }
        (train, test1)
    } else {
        let mut ids = pool;
        ids.shuffle(&mut rng);
        let cut = ids.len() * TRAIN_FRACTION_NUM / TRAIN_FRACTION_DEN;
        let test1 = ids.split_off(cut);
        (ids, test1)
    };
    let train: BTreeSet<String> = train.into_iter().map(str::to_string).collect();
    let test1: BTreeSet<String> = test1.into_iter().map(str::to_string).collect();

    // Test #2: proportional to the full dataset, sampled outside the train set.
    let mut available_by_category: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for (category, ids) in &ids_by_category {
        available_by_category.insert(
            (*category).to_string(),
            ids.iter()
                .copied()
                .filter(|id| !train.contains(*id))
                .collect(),
        );
    }
    let available_counts: BTreeMap<String, usize> = available_by_category
        .iter()
        .map(|(c, ids)| (c.clone(), ids.len()))
        .collect();
    let targets = proportional_targets(counts, test1.len(), total, &available_counts)?;
    let mut test2 = BTreeSet::new();
    for (category, target) in targets {
        if target == 0 {
            continue;
        }
        let available = available_by_category
            .get_mut(&category)
            .expect("targets only cover known categories");
        available.shuffle(&mut rng);
        for id in &available[..target] {
            test2.insert((*id).to_string());
        }
    }

    Ok(SplitResult {
        jurisdiction: dataset.jurisdiction.clone(),
        seed,
        train,
        test1,
        test2,
        discarded_categories,
        downsampled_categories,
    })
}

/// The downsampling target: the smallest multiple of 1,000 strictly above the
/// size of the largest category under 5,000 samples, or 5,000 when every
/// category exceeds the threshold. `None` when no category needs downsampling.
fn downsample_target(counts: &BTreeMap<String, usize>) -> Option<usize> {
    if !counts.values().any(|&c| c > DOWNSAMPLE_THRESHOLD) {
        return None;
    }
    let reference = counts
        .values()
        .filter(|&&c| c < DOWNSAMPLE_THRESHOLD)
        .max()
        .copied();
    Some(match reference {
        Some(r) => (r / 1000 + 1) * 1000,
        None => DOWNSAMPLE_THRESHOLD,
    })
}

/// Largest-remainder allocation of `size` test-2 slots over categories,
/// proportional to the full-dataset counts but capped by per-category
/// availability outside the train set; any capped shortfall is redistributed
/// in remainder order among categories with spare judgments. Remainder ties
/// break toward the larger category, then the category name.
///
/// Total availability always suffices (everything outside train is at least
/// `|test1|` judgments), so the insufficiency error is a defensive guard.
fn proportional_targets(
    counts: &BTreeMap<String, usize>,
    size: usize,
    total: usize,
    available: &BTreeMap<String, usize>,
) -> Result<Vec<(String, usize)>> {
    let total_available: usize = available.values().sum();
    if total_available < size {
        return Err(Error::Test2Insufficient {
            needed: size,
            available: total_available,
        });
    }

    let mut targets: Vec<(String, usize, usize)> = counts
        .iter()
        .map(|(category, &count)| {
            let numerator = size * count;
            let floor = (numerator / total).min(available[category]);
            (category.clone(), floor, numerator % total)
        })
        .collect();
    let allocated: usize = targets.iter().map(|(_, floor, _)| floor).sum();
    let mut leftover = size - allocated;

    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| {
        let (name_a, _, rem_a) = &targets[a];
        let (name_b, _, rem_b) = &targets[b];
        rem_b
            .cmp(rem_a)
            .then_with(|| counts[name_b].cmp(&counts[name_a]))
            .then_with(|| name_a.cmp(name_b))
    });
    while leftover > 0 {
        let mut placed = false;
        for &idx in &order {
            if leftover == 0 {
                break;
            }
            let (name, target, _) = &mut targets[idx];
            if *target < available[name.as_str()] {
                *target += 1;
                leftover -= 1;
                placed = true;
            }
        }
        debug_assert!(placed, "total availability was checked up front");
        if !placed {
            break;
        }
    }
    Ok(targets
        .into_iter()
        .map(|(name, target, _)| (name, target))
        .collect())
}
