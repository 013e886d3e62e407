//! Morph-fitting: fine-tune word vectors with ATTRACT/REPEL constraints
//! extracted from a vocabulary by simple language-specific morphological
//! rules.
//!
//! The pipeline has three stages:
//!
//! 1. [`constraints::build`] applies a [`morph_rules::RuleSet`] (English,
//!    German, Italian or Russian) to a vocabulary, producing inflectional
//!    ATTRACT pairs and derivational-antonym REPEL pairs.
//! 2. [`optimizer::fit`] moves the vectors of a [`VectorStore`] so that
//!    ATTRACT pairs end up closer than their in-batch negatives and REPEL
//!    pairs further apart, while a regulariser pulls towards the original
//!    vectors. [`morph_fix::morph_fix`] is a simpler baseline.
//! 3. [`eval`] measures Spearman's ρ against similarity datasets and lists
//!    nearest neighbours.

pub mod cli;
pub mod constraints;
pub mod error;
pub mod eval;
pub mod morph_fix;
pub mod morph_rules;
pub mod optimizer;
pub mod vector_store;

pub use constraints::{ConstraintSet, Pair};
pub use error::{Error, Result};
pub use morph_rules::{Language, MorphRule, RuleSet};
pub use optimizer::{MiniBatch, TrainingConfig};
pub use vector_store::VectorStore;
