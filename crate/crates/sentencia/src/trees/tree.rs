//! CART decision-tree training, prediction and the flat node-array encoding.
//!
//! Nodes route a sample left when its count of the split feature is at most
//! the threshold and right otherwise. Thresholds sit at midpoints between
//! consecutive distinct observed counts. Tie-breaking is always toward the
//! lower feature index and lower threshold so training is deterministic.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::CountVector;
use crate::trees::TrainingSet;

/// Gains at or below this are treated as zero; a split must do strictly
/// better to be taken.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    /// Every feature is a split candidate ("auto" in grid files).
    #[serde(rename = "all", alias = "auto")]
    All,
    /// A fresh uniform sample of floor(sqrt(F)) features per node.
    #[serde(rename = "sqrt")]
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitter {
    /// Exhaustive search over candidate thresholds.
    Best,
    /// One uniform random threshold per candidate feature, best one wins.
    Random,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(format!("unknown criterion {other:?}")),
        }
    }
}

impl FromStr for MaxFeatures {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" | "auto" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            other => Err(format!("unknown max_features {other:?}")),
        }
    }
}

impl FromStr for Splitter {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "best" => Ok(Splitter::Best),
            "random" => Ok(Splitter::Random),
            other => Err(format!("unknown splitter {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeHyperparams {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    /// Fraction of the training set a node needs to be considered for a
    /// split (at least 2 samples either way).
    pub min_samples_split: f64,
    /// Fraction of the training set each child must retain (at least 1).
    pub min_samples_leaf: f64,
    pub splitter: Splitter,
    pub seed: u64,
}

impl Default for TreeHyperparams {
    fn default() -> Self {
        Self {
            criterion: Criterion::Gini,
            max_depth: 8,
            max_features: MaxFeatures::All,
            min_samples_split: 0.001,
            min_samples_leaf: 0.0005,
            splitter: Splitter::Best,
            seed: 0,
        }
    }
}

impl TreeHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidHyperparam("max_depth must be >= 1".into()));
        }
        for (name, value) in [
            ("min_samples_split", self.min_samples_split),
            ("min_samples_leaf", self.min_samples_leaf),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidHyperparam(format!(
                    "{name} must lie in (0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Gini or entropy impurity of a category histogram.
pub fn impurity(counts: &[u32], criterion: Criterion) -> Result<f64> {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(impurity_unchecked(counts, total, criterion))
}

fn impurity_unchecked(counts: &[u32], total: u64, criterion: Criterion) -> f64 {
    let total = total as f64;
    match criterion {
        Criterion::Gini => {
            let mut sum_sq = 0.0;
            for &c in counts {
                let p = c as f64 / total;
                sum_sq += p * p;
            }
            1.0 - sum_sq
        }
        Criterion::Entropy => {
            let mut entropy = 0.0;
            for &c in counts {
                if c > 0 {
                    let p = c as f64 / total;
                    entropy -= p * p.log2();
                }
            }
            entropy
        }
    }
}

/// One node of the flat array encoding. A node is a leaf exactly when
/// `feature` is `None`, in which case both children are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: Option<u32>,
    pub threshold: f64,
    pub left: Option<u32>,
    pub right: Option<u32>,
    pub category_counts: Vec<u32>,
    pub depth: u16,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.feature.is_none()
    }
}

/// A trained tree: flat node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub hyperparams: TreeHyperparams,
    pub categories: Vec<String>,
    pub n_features: usize,
    pub feature_fingerprint: String,
}

/// The winning split of one search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: u32,
    pub threshold: f64,
    pub gain: f64,
}

impl TreeModel {
    /// Route a vector from the root to a leaf; returns the majority category
    /// index at the leaf (ties to the lower category index) and the leaf's
    /// node index.
    pub fn predict(&self, vector: &CountVector) -> (usize, usize) {
        let mut node_idx = 0usize;
        loop {
            let node = &self.nodes[node_idx];
            match node.feature {
                None => return (majority(&node.category_counts), node_idx),
                Some(feature) => {
                    let count = vector.get(feature) as f64;
                    node_idx = if count <= node.threshold {
                        node.left.expect("internal node has left child") as usize
                    } else {
                        node.right.expect("internal node has right child") as usize
                    };
                }
            }
        }
    }

    pub fn predict_category<'a>(&'a self, vector: &CountVector) -> &'a str {
        &self.categories[self.predict(vector).0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.depth as usize)
            .max()
            .unwrap_or(0)
    }

    /// Training loss of the tree: leaf impurities weighted by leaf mass.
    pub fn training_loss(&self, criterion: Criterion) -> f64 {
        let total: u64 = self.nodes[0]
            .category_counts
            .iter()
            .map(|&c| c as u64)
            .sum();
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| {
                let mass: u64 = n.category_counts.iter().map(|&c| c as u64).sum();
                mass as f64 / total as f64 * impurity_unchecked(&n.category_counts, mass, criterion)
            })
            .sum()
    }

    /// Structural invariants of the array encoding: single rooted tree, every
    /// node reachable exactly once, leaves exactly the child-free nodes,
    /// internal counts equal to the sum of their children, depth bounded.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.nodes.is_empty() {
            return Err("empty node array".into());
        }
        let mut visits = vec![0u32; self.nodes.len()];
        let mut stack = vec![(0u32, 0u16)];
        while let Some((idx, depth)) = stack.pop() {
            let node = self
                .nodes
                .get(idx as usize)
                .ok_or_else(|| format!("child index {idx} out of range"))?;
            visits[idx as usize] += 1;
            if node.depth != depth {
                return Err(format!(
                    "node {idx}: stored depth {} != actual {depth}",
                    node.depth
                ));
            }
            if depth as usize > self.hyperparams.max_depth {
                return Err(format!("node {idx} exceeds max_depth"));
            }
            match (node.feature, node.left, node.right) {
                (None, None, None) => {}
                (Some(f), Some(l), Some(r)) => {
                    if f as usize >= self.n_features {
                        return Err(format!("node {idx}: feature {f} out of range"));
                    }
                    let sum = elementwise_sum(
                        &self.nodes[l as usize].category_counts,
                        &self.nodes[r as usize].category_counts,
                    );
                    if sum != node.category_counts {
                        return Err(format!("node {idx}: children counts do not sum"));
                    }
                    stack.push((l, depth + 1));
                    stack.push((r, depth + 1));
                }
                _ => return Err(format!("node {idx}: inconsistent leaf encoding")),
            }
        }
        if visits.iter().any(|&v| v != 1) {
            return Err("node array is not a single rooted tree".into());
        }
        Ok(())
    }
}

fn elementwise_sum(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

fn majority(counts: &[u32]) -> usize {
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Node-scoped sample access: `ids` are the samples at the node and
/// membership of an arbitrary sample is a position-range check.
struct NodeSamples<'a> {
    ids: &'a [u32],
    positions: &'a [u32],
    start: u32,
    end: u32,
}

impl NodeSamples<'_> {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn contains(&self, sample: u32) -> bool {
        let p = self.positions[sample as usize];
        p >= self.start && p < self.end
    }
}

/// Nonzero `(count, label)` pairs of one feature over the node samples. Scans
/// whichever side is smaller: the feature column or the node itself.
fn gather_pairs(set: &TrainingSet, samples: &NodeSamples<'_>, feature: u32) -> Vec<(u32, u16)> {
    let column = set.column(feature);
    let mut pairs = Vec::new();
    if column.len() <= samples.len() {
        for &(sample, count) in column {
            if samples.contains(sample) {
                pairs.push((count, set.label(sample as usize)));
            }
        }
    } else {
        for &sample in samples.ids {
            let count = set.count(sample, feature);
            if count > 0 {
                pairs.push((count, set.label(sample as usize)));
            }
        }
    }
    pairs
}

/// Distinct observed values of a feature at a node (including the implicit
/// zeros), ascending, each with its label histogram.
fn value_buckets(
    set: &TrainingSet,
    samples: &NodeSamples<'_>,
    feature: u32,
    parent_hist: &[u32],
) -> Vec<(u32, Vec<u32>)> {
    let mut pairs = gather_pairs(set, samples, feature);
    pairs.sort_unstable_by_key(|&(count, _)| count);

    let n_cats = parent_hist.len();
    let mut buckets: Vec<(u32, Vec<u32>)> = Vec::new();
    let zeros = samples.len() - pairs.len();
    if zeros > 0 {
        let mut zero_hist = parent_hist.to_vec();
        for &(_, label) in &pairs {
            zero_hist[label as usize] -= 1;
        }
        buckets.push((0, zero_hist));
    }
    for (count, label) in pairs {
        match buckets.last_mut() {
            Some((value, hist)) if *value == count => hist[label as usize] += 1,
            _ => {
                let mut hist = vec![0u32; n_cats];
                hist[label as usize] += 1;
                buckets.push((count, hist));
            }
        }
    }
    buckets
}

struct SplitContext<'a> {
    set: &'a TrainingSet,
    criterion: Criterion,
    min_leaf: usize,
}

impl SplitContext<'_> {
    /// Weighted impurity decrease of a partition of the node.
    fn gain(
        &self,
        parent_impurity: f64,
        node_size: usize,
        left_hist: &[u32],
        left_n: usize,
        right_hist: &[u32],
        right_n: usize,
    ) -> f64 {
        let n = node_size as f64;
        let left = impurity_unchecked(left_hist, left_n as u64, self.criterion);
        let right = impurity_unchecked(right_hist, right_n as u64, self.criterion);
        parent_impurity - (left_n as f64 / n) * left - (right_n as f64 / n) * right
    }

    /// Best midpoint threshold for one feature, or `None` when the feature
    /// cannot produce a valid positive-gain split at this node.
    fn best_threshold_for(
        &self,
        samples: &NodeSamples<'_>,
        feature: u32,
        parent_hist: &[u32],
        parent_impurity: f64,
    ) -> Option<(f64, f64)> {
        let buckets = value_buckets(self.set, samples, feature, parent_hist);
        if buckets.len() < 2 {
            return None;
        }
        let node_size = samples.len();
        let mut left_hist = vec![0u32; parent_hist.len()];
        let mut left_n = 0usize;
        let mut best: Option<(f64, f64)> = None;
        for window in 0..buckets.len() - 1 {
            let (value, hist) = &buckets[window];
            for (acc, h) in left_hist.iter_mut().zip(hist) {
                *acc += h;
            }
            left_n += hist.iter().sum::<u32>() as usize;
            let right_n = node_size - left_n;
            if left_n < self.min_leaf || right_n < self.min_leaf {
                continue;
            }
            let next_value = buckets[window + 1].0;
            let threshold = (*value as f64 + next_value as f64) / 2.0;
            let right_hist: Vec<u32> = parent_hist
                .iter()
                .zip(&left_hist)
                .map(|(&p, &l)| p - l)
                .collect();
            let gain = self.gain(
                parent_impurity,
                node_size,
                &left_hist,
                left_n,
                &right_hist,
                right_n,
            );
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((threshold, gain));
            }
        }
        best
    }

    /// One uniform random threshold between the observed minimum and maximum
    /// of the feature at this node.
    fn random_threshold_for(
        &self,
        samples: &NodeSamples<'_>,
        feature: u32,
        parent_hist: &[u32],
        parent_impurity: f64,
        rng: &mut ChaCha8Rng,
    ) -> Option<(f64, f64)> {
        let buckets = value_buckets(self.set, samples, feature, parent_hist);
        if buckets.len() < 2 {
            return None;
        }
        let low = buckets[0].0 as f64;
        let high = buckets[buckets.len() - 1].0 as f64;
        let threshold = rng.gen_range(low..high);

        let node_size = samples.len();
        let mut left_hist = vec![0u32; parent_hist.len()];
        let mut left_n = 0usize;
        for (value, hist) in &buckets {
            if (*value as f64) <= threshold {
                for (acc, h) in left_hist.iter_mut().zip(hist) {
                    *acc += h;
                }
                left_n += hist.iter().sum::<u32>() as usize;
            }
        }
        let right_n = node_size - left_n;
        if left_n < self.min_leaf || right_n < self.min_leaf {
            return None;
        }
        let right_hist: Vec<u32> = parent_hist
            .iter()
            .zip(&left_hist)
            .map(|(&p, &l)| p - l)
            .collect();
        let gain = self.gain(
            parent_impurity,
            node_size,
            &left_hist,
            left_n,
            &right_hist,
            right_n,
        );
        Some((threshold, gain))
    }
}

/// Exhaustive best split over the given candidate features for the whole
/// sample set, with thresholds at midpoints between consecutive distinct
/// observed counts. `None` when no split has positive gain or every split
/// violates `min_samples_leaf`.
pub fn best_split(
    set: &TrainingSet,
    candidates: &[u32],
    criterion: Criterion,
    min_samples_leaf: usize,
) -> Option<Split> {
    if set.n_samples() < 2 || candidates.is_empty() {
        return None;
    }
    let ids: Vec<u32> = (0..set.n_samples() as u32).collect();
    let positions = ids.clone();
    let samples = NodeSamples {
        ids: &ids,
        positions: &positions,
        start: 0,
        end: set.n_samples() as u32,
    };
    let hist = set.label_histogram();
    let context = SplitContext {
        set,
        criterion,
        min_leaf: min_samples_leaf.max(1),
    };
    let parent_impurity = impurity_unchecked(&hist, set.n_samples() as u64, criterion);
    let mut best: Option<Split> = None;
    for &feature in candidates {
        if let Some((threshold, gain)) =
            context.best_threshold_for(&samples, feature, &hist, parent_impurity)
        {
            if gain > best.map_or(GAIN_EPSILON, |s| s.gain) {
                best = Some(Split {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

struct TreeBuilder<'a> {
    set: &'a TrainingSet,
    hp: &'a TreeHyperparams,
    min_split: usize,
    min_leaf: usize,
    feature_sample: Option<usize>,
    rng: ChaCha8Rng,
    indices: Vec<u32>,
    positions: Vec<u32>,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    fn histogram(&self, start: usize, end: usize) -> Vec<u32> {
        let mut hist = vec![0u32; self.set.n_categories()];
        for &sample in &self.indices[start..end] {
            hist[self.set.label(sample as usize) as usize] += 1;
        }
        hist
    }

    /// Candidate features for one node: everything, or a fresh uniform
    /// sample of floor(sqrt(F)), sorted ascending so ties resolve to the
    /// lowest index.
    fn candidate_features(&mut self) -> Vec<u32> {
        let n_features = self.set.n_features();
        match self.feature_sample {
            None => (0..n_features as u32).collect(),
            Some(k) => {
                let mut sampled: Vec<u32> = rand::seq::index::sample(&mut self.rng, n_features, k)
                    .into_iter()
                    .map(|i| i as u32)
                    .collect();
                sampled.sort_unstable();
                sampled
            }
        }
    }

    fn find_split(&mut self, start: usize, end: usize, hist: &[u32]) -> Option<Split> {
        let candidates = self.candidate_features();
        let samples = NodeSamples {
            ids: &self.indices[start..end],
            positions: &self.positions,
            start: start as u32,
            end: end as u32,
        };
        let context = SplitContext {
            set: self.set,
            criterion: self.hp.criterion,
            min_leaf: self.min_leaf,
        };
        let parent_impurity = impurity_unchecked(hist, (end - start) as u64, self.hp.criterion);
        let mut best: Option<Split> = None;
        for &feature in &candidates {
            let result = match self.hp.splitter {
                Splitter::Best => {
                    context.best_threshold_for(&samples, feature, hist, parent_impurity)
                }
                Splitter::Random => context.random_threshold_for(
                    &samples,
                    feature,
                    hist,
                    parent_impurity,
                    &mut self.rng,
                ),
            };
            if let Some((threshold, gain)) = result {
                if gain > best.map_or(GAIN_EPSILON, |s| s.gain) {
                    best = Some(Split {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Reorder `indices[start..end]` so samples routed left come first;
    /// returns the boundary.
    fn partition(&mut self, start: usize, end: usize, feature: u32, threshold: f64) -> usize {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &sample in &self.indices[start..end] {
            if (self.set.count(sample, feature) as f64) <= threshold {
                left.push(sample);
            } else {
                right.push(sample);
            }
        }
        let mid = start + left.len();
        for (offset, sample) in left.into_iter().chain(right).enumerate() {
            let position = start + offset;
            self.indices[position] = sample;
            self.positions[sample as usize] = position as u32;
        }
        mid
    }

    fn grow(&mut self, start: usize, end: usize, depth: u16) -> u32 {
        let hist = self.histogram(start, end);
        let node_index = self.nodes.len() as u32;
        self.nodes.push(TreeNode {
            feature: None,
            threshold: 0.0,
            left: None,
            right: None,
            category_counts: hist.clone(),
            depth,
        });

        let node_size = end - start;
        let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
        if depth as usize >= self.hp.max_depth || pure || node_size < self.min_split {
            return node_index;
        }
        let Some(split) = self.find_split(start, end, &hist) else {
            return node_index;
        };

        let mid = self.partition(start, end, split.feature, split.threshold);
        let left = self.grow(start, mid, depth + 1);
        let right = self.grow(mid, end, depth + 1);
        let node = &mut self.nodes[node_index as usize];
        node.feature = Some(split.feature);
        node.threshold = split.threshold;
        node.left = Some(left);
        node.right = Some(right);
        node_index
    }
}

fn fraction_to_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64).ceil() as usize
}

/// Grow a CART tree. Stops at `max_depth`, purity, nodes below the
/// `min_samples_split` fraction, or when no candidate split has positive
/// gain. Deterministic given the hyperparameter seed.
pub fn train_tree(set: &TrainingSet, hp: &TreeHyperparams) -> Result<TreeModel> {
    hp.validate()?;
    let n = set.n_samples();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }

    let feature_sample = match hp.max_features {
        MaxFeatures::All => None,
        MaxFeatures::Sqrt => {
            let f = set.n_features();
            Some(((f as f64).sqrt().floor() as usize).clamp(usize::from(f > 0), f))
        }
    };
    let mut builder = TreeBuilder {
        set,
        hp,
        min_split: fraction_to_count(hp.min_samples_split, n).max(2),
        min_leaf: fraction_to_count(hp.min_samples_leaf, n).max(1),
        feature_sample,
        rng: ChaCha8Rng::seed_from_u64(hp.seed),
        indices: (0..n as u32).collect(),
        positions: (0..n as u32).collect(),
        nodes: Vec::new(),
    };
    builder.grow(0, n, 0);

    Ok(TreeModel {
        nodes: builder.nodes,
        hyperparams: *hp,
        categories: set.categories().to_vec(),
        n_features: set.n_features(),
        feature_fingerprint: set.feature_fingerprint().to_string(),
    })
}
