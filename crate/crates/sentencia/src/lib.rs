//! Explainable classification of jurisdiction-partitioned legal judgments.
//!
//! The pipeline mirrors a production legal-analytics workflow: judgments are
//! grouped by jurisdiction, normalized, vectorized into char-gram and
//! word-gram counts, classified with natively trained decision trees or
//! random forests, and every prediction is explained in natural language by
//! mining the decision paths of the trees, reconstructing char-gram features
//! into readable terms, and ranking them against expert-curated dictionaries.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod explain;
pub mod featurize;
pub mod synthetic;
pub mod textprep;
pub mod trees;

pub use error::{Error, Result};
