//! The explicability pipeline: decision-path extraction, relevant-feature
//! mining, char-gram term reconstruction, per-category bags, expert
//! dictionaries and template rendering.

mod bags;
mod dictionary;
mod reconstruct;
mod render;

pub use bags::{
    build_bags, reconstruct_pool, BagSet, CategoryBag, ExpansionRecord, BAGS_FILE_VERSION,
};
pub use dictionary::{
    import_dictionary, questionnaire, AuditRow, ExpertDictionary, SheetRow, TermSheet, QUESTION_ONE,
};
pub use reconstruct::{reconstruct_term, PoolEntry, Reconstruction, MIN_CHAR_GRAM_CHARS};
pub use render::{
    explain_judgment, explain_vector, render_explanation, Explanation, ExplanationCaps, Language,
};

use serde::{Deserialize, Serialize};

use crate::featurize::CountVector;
use crate::trees::TreeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Left,
    Right,
}

/// The exact root-to-leaf route of one vector through one tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionPath {
    pub tree_id: usize,
    /// Node indices from root to leaf.
    pub nodes: Vec<usize>,
    /// Branch taken at each internal node; one entry fewer than `nodes`.
    pub branches: Vec<Branch>,
    /// Category index of the leaf (the tree's local decision).
    pub leaf_category: usize,
}

/// Navigate the node array from the root, recording every step, until a leaf
/// is reached. The leaf category always equals `tree.predict`.
pub fn trace_path(tree: &TreeModel, vector: &CountVector, tree_id: usize) -> DecisionPath {
    let mut nodes = Vec::new();
    let mut branches = Vec::new();
    let mut node_idx = 0usize;
    loop {
        nodes.push(node_idx);
        let node = &tree.nodes[node_idx];
        match node.feature {
            None => {
                let (category, leaf) = tree.predict(vector);
                debug_assert_eq!(leaf, node_idx);
                return DecisionPath {
                    tree_id,
                    nodes,
                    branches,
                    leaf_category: category,
                };
            }
            Some(feature) => {
                let count = vector.get(feature) as f64;
                if count <= node.threshold {
                    branches.push(Branch::Left);
                    node_idx = node.left.expect("internal node has left child") as usize;
                } else {
                    branches.push(Branch::Right);
                    node_idx = node.right.expect("internal node has right child") as usize;
                }
            }
        }
    }
}

/// A feature tested at a node where the `>` branch was taken: the document
/// holds more of it than the learned threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantFeature {
    pub feature: u32,
    /// Number of RIGHT steps along the path that tested this feature.
    pub frequency: u64,
}

/// Exactly the features at RIGHT-branch nodes of the path, in first-seen
/// order, with one frequency unit per RIGHT step.
pub fn relevant_features(path: &DecisionPath, tree: &TreeModel) -> Vec<RelevantFeature> {
    let mut out: Vec<RelevantFeature> = Vec::new();
    for (node_idx, branch) in path.nodes.iter().zip(&path.branches) {
        if *branch != Branch::Right {
            continue;
        }
        let feature = tree.nodes[*node_idx]
            .feature
            .expect("a branched node is internal");
        match out.iter_mut().find(|rf| rf.feature == feature) {
            Some(rf) => rf.frequency += 1,
            None => out.push(RelevantFeature {
                feature,
                frequency: 1,
            }),
        }
    }
    out
}
