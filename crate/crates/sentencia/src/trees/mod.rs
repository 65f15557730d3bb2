//! Native CART decision trees and random forests over sparse count vectors,
//! stored as flat node arrays, plus k-fold grid search.

mod dataset;
mod forest;
mod grid;
mod tree;

pub use dataset::TrainingSet;
pub use forest::{train_forest, ForestModel, FOREST_FILE_VERSION};
pub use grid::{
    grid_search_forest, grid_search_tree, stratified_folds, CvCombo, CvReport, ForestGrid,
    ForestSettings, GridSpec, TreeGrid,
};
pub use tree::{
    best_split, impurity, train_tree, Criterion, MaxFeatures, Split, Splitter, TreeHyperparams,
    TreeModel, TreeNode,
};
