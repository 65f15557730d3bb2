//! Exhaustive grid search with stratified k-fold cross-validation.
//!
//! Grid files are declarative JSON: a `model` tag (`tree` or `forest`) plus
//! one array per hyperparameter axis; omitted axes fall back to a single
//! default value. Combinations are enumerated in axis order and ties on mean
//! accuracy resolve to the earlier combination.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::{
    train_forest, train_tree, Criterion, MaxFeatures, Splitter, TrainingSet, TreeHyperparams,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeGrid {
    #[serde(default = "default_criterion")]
    pub criterion: Vec<Criterion>,
    #[serde(default = "default_max_depth")]
    pub max_depth: Vec<usize>,
    #[serde(default = "default_max_features")]
    pub max_features: Vec<MaxFeatures>,
    #[serde(default = "default_min_samples_split")]
    pub min_samples_split: Vec<f64>,
    #[serde(default = "default_min_samples_leaf")]
    pub min_samples_leaf: Vec<f64>,
    #[serde(default = "default_splitter")]
    pub splitter: Vec<Splitter>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestGrid {
    #[serde(flatten)]
    pub tree: TreeGrid,
    #[serde(default = "default_n_estimators")]
    pub n_estimators: Vec<usize>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: Vec<bool>,
}

fn default_criterion() -> Vec<Criterion> {
    vec![TreeHyperparams::default().criterion]
}
fn default_max_depth() -> Vec<usize> {
    vec![TreeHyperparams::default().max_depth]
}
fn default_max_features() -> Vec<MaxFeatures> {
    vec![TreeHyperparams::default().max_features]
}
fn default_min_samples_split() -> Vec<f64> {
    vec![TreeHyperparams::default().min_samples_split]
}
fn default_min_samples_leaf() -> Vec<f64> {
    vec![TreeHyperparams::default().min_samples_leaf]
}
fn default_splitter() -> Vec<Splitter> {
    vec![TreeHyperparams::default().splitter]
}
fn default_n_estimators() -> Vec<usize> {
    vec![200]
}
fn default_bootstrap() -> Vec<bool> {
    vec![true]
}

impl Default for TreeGrid {
    fn default() -> Self {
        Self {
            criterion: default_criterion(),
            max_depth: default_max_depth(),
            max_features: default_max_features(),
            min_samples_split: default_min_samples_split(),
            min_samples_leaf: default_min_samples_leaf(),
            splitter: default_splitter(),
        }
    }
}

impl TreeGrid {
    /// Cartesian product in axis order: criterion, max_depth, max_features,
    /// min_samples_split, min_samples_leaf, splitter.
    pub fn combinations(&self, seed: u64) -> Vec<TreeHyperparams> {
        let mut out = Vec::new();
        for &criterion in &self.criterion {
            for &max_depth in &self.max_depth {
                for &max_features in &self.max_features {
                    for &min_samples_split in &self.min_samples_split {
                        for &min_samples_leaf in &self.min_samples_leaf {
                            for &splitter in &self.splitter {
                                out.push(TreeHyperparams {
                                    criterion,
                                    max_depth,
                                    max_features,
                                    min_samples_split,
                                    min_samples_leaf,
                                    splitter,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn is_empty(&self) -> bool {
        self.criterion.is_empty()
            || self.max_depth.is_empty()
            || self.max_features.is_empty()
            || self.min_samples_split.is_empty()
            || self.min_samples_leaf.is_empty()
            || self.splitter.is_empty()
    }
}

/// A grid file: tree or forest axes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum GridSpec {
    Tree(TreeGrid),
    Forest(ForestGrid),
}

impl GridSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Winning forest configuration from a forest grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSettings {
    pub hyperparams: TreeHyperparams,
    pub n_estimators: usize,
    pub bootstrap: bool,
}

/// One evaluated combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCombo {
    pub hyperparams: TreeHyperparams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_estimators: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<bool>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<CvCombo>,
    /// Index of the winning entry (argmax mean accuracy, earlier wins ties).
    pub best_index: usize,
}

impl CvReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "criterion\tmax_depth\tmax_features\tmin_samples_split\tmin_samples_leaf\tsplitter\tn_estimators\tbootstrap\tmean_accuracy\tfold_accuracies\tbest\n",
        );
        for (i, entry) in self.entries.iter().enumerate() {
            let hp = &entry.hyperparams;
            let folds = entry
                .fold_accuracies
                .iter()
                .map(|a| format!("{a:.6}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:?}\t{}\t{}\t{:.6}\t{}\t{}\n",
                hp.criterion,
                hp.max_depth,
                match hp.max_features {
                    MaxFeatures::All => "all",
                    MaxFeatures::Sqrt => "sqrt",
                },
                hp.min_samples_split,
                hp.min_samples_leaf,
                hp.splitter,
                entry
                    .n_estimators
                    .map_or_else(|| "-".into(), |n| n.to_string()),
                entry
                    .bootstrap
                    .map_or_else(|| "-".into(), |b| b.to_string()),
                entry.mean_accuracy,
                folds,
                u8::from(i == self.best_index),
            ));
        }
        out
    }
}

/// Deal every category's samples round-robin into `folds` stratified folds.
/// Errors when any category has fewer samples than folds.
pub fn stratified_folds(set: &TrainingSet, folds: usize, seed: u64) -> Result<Vec<Vec<u32>>> {
    if folds < 2 {
        return Err(Error::InvalidHyperparam(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result: Vec<Vec<u32>> = vec![Vec::new(); folds];
    for (category_idx, category) in set.categories().iter().enumerate() {
        let mut members: Vec<u32> = (0..set.n_samples() as u32)
            .filter(|&s| set.label(s as usize) as usize == category_idx)
            .collect();
        if members.len() < folds {
            return Err(Error::FoldTooLarge {
                folds,
                category: category.clone(),
                support: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for (i, sample) in members.into_iter().enumerate() {
            result[i % folds].push(sample);
        }
    }
    for fold in &mut result {
        fold.sort_unstable();
    }
    Ok(result)
}

fn cross_validate(
    set: &TrainingSet,
    folds: &[Vec<u32>],
    mut train_and_score: impl FnMut(&TrainingSet, &[u32]) -> Result<f64>,
) -> Result<(Vec<f64>, f64)> {
    let mut accuracies = Vec::with_capacity(folds.len());
    for held_out in folds {
        let mut in_fold = vec![false; set.n_samples()];
        for &s in held_out {
            in_fold[s as usize] = true;
        }
        let train_ids: Vec<u32> = (0..set.n_samples() as u32)
            .filter(|&s| !in_fold[s as usize])
            .collect();
        let train_set = set.subset(&train_ids);
        accuracies.push(train_and_score(&train_set, held_out)?);
    }
    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    Ok((accuracies, mean))
}

fn fold_accuracy(
    set: &TrainingSet,
    held_out: &[u32],
    predict: impl Fn(&crate::featurize::CountVector) -> usize,
) -> f64 {
    let hits = held_out
        .iter()
        .filter(|&&s| predict(set.row(s as usize)) == set.label(s as usize) as usize)
        .count();
    hits as f64 / held_out.len() as f64
}

/// Exhaustive decision-tree grid search under stratified k-fold CV accuracy.
pub fn grid_search_tree(
    set: &TrainingSet,
    grid: &TreeGrid,
    folds: usize,
    seed: u64,
) -> Result<(TreeHyperparams, CvReport)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let fold_sets = stratified_folds(set, folds, seed)?;
    let mut entries = Vec::new();
    for hp in grid.combinations(seed) {
        let (fold_accuracies, mean_accuracy) =
            cross_validate(set, &fold_sets, |train_set, held_out| {
                let tree = train_tree(train_set, &hp)?;
                Ok(fold_accuracy(set, held_out, |v| tree.predict(v).0))
            })?;
        entries.push(CvCombo {
            hyperparams: hp,
            n_estimators: None,
            bootstrap: None,
            fold_accuracies,
            mean_accuracy,
        });
    }
    let best_index = argmax_mean(&entries);
    let best = entries[best_index].hyperparams;
    Ok((
        best,
        CvReport {
            folds,
            seed,
            entries,
            best_index,
        },
    ))
}

/// Exhaustive random-forest grid search under stratified k-fold CV accuracy.
pub fn grid_search_forest(
    set: &TrainingSet,
    grid: &ForestGrid,
    folds: usize,
    seed: u64,
) -> Result<(ForestSettings, CvReport)> {
    if grid.tree.is_empty() || grid.n_estimators.is_empty() || grid.bootstrap.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let fold_sets = stratified_folds(set, folds, seed)?;
    let mut entries = Vec::new();
    for hp in grid.tree.combinations(seed) {
        for &n_estimators in &grid.n_estimators {
            for &bootstrap in &grid.bootstrap {
                let (fold_accuracies, mean_accuracy) =
                    cross_validate(set, &fold_sets, |train_set, held_out| {
                        let forest = train_forest(train_set, &hp, n_estimators, bootstrap, seed)?;
                        Ok(fold_accuracy(set, held_out, |v| forest.predict(v)))
                    })?;
                entries.push(CvCombo {
                    hyperparams: hp,
                    n_estimators: Some(n_estimators),
                    bootstrap: Some(bootstrap),
                    fold_accuracies,
                    mean_accuracy,
                });
            }
        }
    }
    let best_index = argmax_mean(&entries);
    let best = &entries[best_index];
    Ok((
        ForestSettings {
            hyperparams: best.hyperparams,
            n_estimators: best.n_estimators.expect("forest entry"),
            bootstrap: best.bootstrap.expect("forest entry"),
        },
        CvReport {
            folds,
            seed,
            entries,
            best_index,
        },
    ))
}

fn argmax_mean(entries: &[CvCombo]) -> usize {
    let mut best = 0usize;
    for (i, entry) in entries.iter().enumerate() {
        if entry.mean_accuracy > entries[best].mean_accuracy {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_set(n: usize) -> TrainingSet {
        // Feature 0 separates categories; feature 1 is noise-ish.
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|i| vec![u32::from(i % 2 == 1) * 4, (i % 7) as u32])
            .collect();
        let labels: Vec<&str> = (0..n).map(|i| if i % 2 == 1 { "b" } else { "a" }).collect();
        TrainingSet::from_dense(&rows, &labels).unwrap()
    }

    #[test]
    fn single_combination_returns_it() {
        let set = separable_set(40);
        let grid = TreeGrid::default();
        let (best, report) = grid_search_tree(&set, &grid, 4, 1).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(best, report.entries[0].hyperparams);
        assert!(report.entries[0].mean_accuracy > 0.99);
    }

    #[test]
    fn deeper_tree_wins_or_ties_on_separable_data() {
        let set = separable_set(60);
        let grid = TreeGrid {
            max_depth: vec![1, 8],
            ..TreeGrid::default()
        };
        let (best, report) = grid_search_tree(&set, &grid, 3, 2).unwrap();
        let shallow = &report.entries[0];
        let deep = &report.entries[1];
        assert!(deep.mean_accuracy >= shallow.mean_accuracy - 1e-12);
        // Data is separable at depth 1, so the tie goes to the earlier combo.
        assert_eq!(best.max_depth, 1);
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let set = separable_set(40);
        let folds = stratified_folds(&set, 4, 9).unwrap();
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 40);
        for fold in &folds {
            let b = fold.iter().filter(|&&s| set.label(s as usize) == 1).count();
            assert_eq!(b, 5, "each fold holds 5 of the 20 b-samples");
        }
    }

    #[test]
    fn folds_exceeding_support_error() {
        let rows = vec![vec![0], vec![1], vec![2], vec![3]];
        let labels = ["a", "a", "a", "b"];
        let set = TrainingSet::from_dense(&rows, &labels).unwrap();
        assert!(matches!(
            stratified_folds(&set, 2, 0),
            Err(Error::FoldTooLarge { support: 1, .. })
        ));
    }

    #[test]
    fn grid_files_parse_both_kinds() {
        let tree_json = r#"{
            "model": "tree",
            "criterion": ["gini", "entropy"],
            "max_depth": [2, 3],
            "max_features": ["auto", "sqrt"]
        }"#;
        let spec: GridSpec = serde_json::from_str(tree_json).unwrap();
        match spec {
            GridSpec::Tree(grid) => {
                assert_eq!(grid.combinations(0).len(), 2 * 2 * 2);
                assert_eq!(grid.max_features, vec![MaxFeatures::All, MaxFeatures::Sqrt]);
            }
            GridSpec::Forest(_) => panic!("expected tree grid"),
        }

        let forest_json = r#"{
            "model": "forest",
            "max_depth": [5, 10],
            "n_estimators": [50, 100]
        }"#;
        let spec: GridSpec = serde_json::from_str(forest_json).unwrap();
        match spec {
            GridSpec::Forest(grid) => {
                assert_eq!(grid.tree.max_depth, vec![5, 10]);
                assert_eq!(grid.n_estimators, vec![50, 100]);
                assert_eq!(grid.bootstrap, vec![true]);
            }
            GridSpec::Tree(_) => panic!("expected forest grid"),
        }
    }

    #[test]
    fn forest_grid_search_runs() {
        let set = separable_set(30);
        let grid = ForestGrid {
            tree: TreeGrid {
                max_depth: vec![3],
                ..TreeGrid::default()
            },
            n_estimators: vec![3],
            bootstrap: vec![true, false],
        };
        let (best, report) = grid_search_forest(&set, &grid, 3, 4).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert_eq!(best.n_estimators, 3);
        assert!(report.entries[report.best_index].mean_accuracy >= 0.9);
    }

    #[test]
    fn empty_grid_axis_is_rejected() {
        let set = separable_set(20);
        let grid = TreeGrid {
            criterion: vec![],
            ..TreeGrid::default()
        };
        assert!(matches!(
            grid_search_tree(&set, &grid, 2, 0),
            Err(Error::EmptyGrid)
        ));
    }
}
