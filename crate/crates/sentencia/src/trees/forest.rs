//! Random forest: bootstrap-resampled trees with pre-derived per-tree seeds,
//! majority-vote prediction, and the versioned model file.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::CountVector;
use crate::trees::{train_tree, TrainingSet, TreeHyperparams, TreeModel};

pub const FOREST_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl ForestModel {
    pub fn categories(&self) -> &[String] {
        &self.trees[0].categories
    }

    pub fn feature_fingerprint(&self) -> &str {
        &self.trees[0].feature_fingerprint
    }

    /// Majority vote over the trees. Vote ties are broken by the larger
    /// aggregate of leaf category counts across all reached leaves, then by
    /// the lower category index.
    pub fn predict(&self, vector: &CountVector) -> usize {
        let n_categories = self.categories().len();
        let mut votes = vec![0u32; n_categories];
        let mut aggregate = vec![0u64; n_categories];
        for tree in &self.trees {
            let (category, leaf) = tree.predict(vector);
            votes[category] += 1;
            for (acc, &c) in aggregate.iter_mut().zip(&tree.nodes[leaf].category_counts) {
                *acc += c as u64;
            }
        }
        let top_votes = *votes.iter().max().expect("at least one category");
        let mut winner = None;
        for c in 0..n_categories {
            if votes[c] != top_votes {
                continue;
            }
            match winner {
                None => winner = Some(c),
                Some(best) if aggregate[c] > aggregate[best] => winner = Some(c),
                _ => {}
            }
        }
        winner.expect("at least one category has the top vote")
    }

    pub fn predict_category<'a>(&'a self, vector: &CountVector) -> &'a str {
        &self.categories()[self.predict(vector)]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ForestFile {
            version: FOREST_FILE_VERSION,
            forest: self.clone(),
        };
        fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: ForestFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        if file.version != FOREST_FILE_VERSION {
            return Err(Error::UnsupportedVersion {
                found: file.version,
                expected: FOREST_FILE_VERSION,
            });
        }
        Ok(file.forest)
    }
}

#[derive(Serialize, Deserialize)]
struct ForestFile {
    version: u32,
    forest: ForestModel,
}

/// Train `n_estimators` trees, each on a bootstrap resample of the training
/// set (or the full set when `bootstrap` is off). Per-tree seeds are derived
/// from the forest seed up front, so trees can train in parallel without
/// changing the result.
pub fn train_forest(
    set: &TrainingSet,
    hp: &TreeHyperparams,
    n_estimators: usize,
    bootstrap: bool,
    seed: u64,
) -> Result<ForestModel> {
    hp.validate()?;
    if set.n_samples() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if n_estimators == 0 {
        return Err(Error::InvalidHyperparam("n_estimators must be >= 1".into()));
    }

    let mut seed_rng = ChaCha8Rng::seed_from_u64(seed);
    let tree_seeds: Vec<(u64, u64)> = (0..n_estimators)
        .map(|_| (seed_rng.gen(), seed_rng.gen()))
        .collect();

    let trees: Result<Vec<TreeModel>> = tree_seeds
        .par_iter()
        .map(|&(tree_seed, bootstrap_seed)| {
            let mut tree_hp = *hp;
            tree_hp.seed = tree_seed;
            if bootstrap {
                let n = set.n_samples();
                let mut rng = ChaCha8Rng::seed_from_u64(bootstrap_seed);
                let samples: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n as u32)).collect();
                train_tree(&set.subset(&samples), &tree_hp)
            } else {
                train_tree(set, &tree_hp)
            }
        })
        .collect();

    Ok(ForestModel {
        trees: trees?,
        n_estimators,
        bootstrap,
        seed,
    })
}
