//! Column-major view of a labeled sample set for tree training.
//!
//! Count vectors arrive row-major (one sparse vector per document); split
//! search wants per-feature access. `TrainingSet` keeps both: the original
//! rows for prediction and per-feature `(sample, count)` columns for split
//! search, so a node can scan a feature in O(nonzeros) and account for the
//! implicit zero bucket by subtraction.

use crate::error::{Error, Result};
use crate::featurize::{CountVector, FeatureSpace};

#[derive(Debug, Clone)]
pub struct TrainingSet {
    categories: Vec<String>,
    labels: Vec<u16>,
    rows: Vec<CountVector>,
    /// Per feature: `(sample index, count)` pairs sorted by sample, count > 0.
    columns: Vec<Vec<(u32, u32)>>,
    n_features: usize,
    feature_fingerprint: String,
}

impl TrainingSet {
    /// Build from aligned vectors and labels. The feature fingerprint binds
    /// trained models to the vector space that produced the counts.
    pub fn new<S: AsRef<str>>(
        vectors: Vec<CountVector>,
        labels: &[S],
        n_features: usize,
        feature_fingerprint: impl Into<String>,
    ) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::LengthMismatch {
                vectors: vectors.len(),
                labels: labels.len(),
            });
        }
        if vectors.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }

        let mut categories: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        categories.sort_unstable();
        categories.dedup();

        let label_ids: Vec<u16> = labels
            .iter()
            .map(|l| {
                categories
                    .binary_search_by(|c| c.as_str().cmp(l.as_ref()))
                    .expect("label present in sorted category list") as u16
            })
            .collect();

        let mut columns: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_features];
        for (sample, vector) in vectors.iter().enumerate() {
            for &(feature, count) in vector.entries() {
                if (feature as usize) >= n_features {
                    return Err(Error::FeatureIndexOutOfRange {
                        index: feature,
                        size: n_features,
                    });
                }
                columns[feature as usize].push((sample as u32, count));
            }
        }

        Ok(Self {
            categories,
            labels: label_ids,
            rows: vectors,
            columns,
            n_features,
            feature_fingerprint: feature_fingerprint.into(),
        })
    }

    pub fn from_space<S: AsRef<str>>(
        vectors: Vec<CountVector>,
        labels: &[S],
        space: &FeatureSpace,
    ) -> Result<Self> {
        Self::new(vectors, labels, space.len(), space.fingerprint())
    }

    /// Dense constructor for small fixtures: one row of counts per sample.
    pub fn from_dense<S: AsRef<str>>(rows: &[Vec<u32>], labels: &[S]) -> Result<Self> {
        let n_features = rows.iter().map(Vec::len).max().unwrap_or(0);
        let vectors: Vec<CountVector> = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let entries = row
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c > 0)
                    .map(|(f, &c)| (f as u32, c))
                    .collect();
                CountVector::new(format!("s{i}"), entries)
            })
            .collect();
        Self::new(vectors, labels, n_features, "dense-fixture")
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn label(&self, sample: usize) -> u16 {
        self.labels[sample]
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn row(&self, sample: usize) -> &CountVector {
        &self.rows[sample]
    }

    pub fn feature_fingerprint(&self) -> &str {
        &self.feature_fingerprint
    }

    pub(crate) fn column(&self, feature: u32) -> &[(u32, u32)] {
        &self.columns[feature as usize]
    }

    pub fn count(&self, sample: u32, feature: u32) -> u32 {
        let column = self.column(feature);
        match column.binary_search_by_key(&sample, |&(s, _)| s) {
            Ok(pos) => column[pos].1,
            Err(_) => 0,
        }
    }

    /// Histogram of labels over all samples.
    pub fn label_histogram(&self) -> Vec<u32> {
        let mut hist = vec![0u32; self.categories.len()];
        for &l in &self.labels {
            hist[l as usize] += 1;
        }
        hist
    }

    /// Restrict to the given samples; duplicates are allowed, so this also
    /// materializes bootstrap resamples. Categories and feature indexing are
    /// preserved.
    pub fn subset(&self, samples: &[u32]) -> TrainingSet {
        let labels: Vec<u16> = samples.iter().map(|&s| self.labels[s as usize]).collect();
        let rows: Vec<CountVector> = samples
            .iter()
            .map(|&s| self.rows[s as usize].clone())
            .collect();

        // Old sample -> new positions (a sample may appear several times).
        let mut positions: Vec<Vec<u32>> = vec![Vec::new(); self.n_samples()];
        for (new_pos, &old) in samples.iter().enumerate() {
            positions[old as usize].push(new_pos as u32);
        }
        let columns: Vec<Vec<(u32, u32)>> = self
            .columns
            .iter()
            .map(|column| {
                let mut entries: Vec<(u32, u32)> = Vec::new();
                for &(old_sample, count) in column {
                    for &new_pos in &positions[old_sample as usize] {
                        entries.push((new_pos, count));
                    }
                }
                entries.sort_unstable_by_key(|&(s, _)| s);
                entries
            })
            .collect();

        TrainingSet {
            categories: self.categories.clone(),
            labels,
            rows,
            columns,
            n_features: self.n_features,
            feature_fingerprint: self.feature_fingerprint.clone(),
        }
    }
}
