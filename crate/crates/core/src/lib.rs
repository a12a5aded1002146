//! Cyberbullying detection for Turkish short texts.

pub mod bayes;
pub mod boosting;
pub mod corpus;
pub mod discriminant;
pub mod error;
pub mod eval;
pub mod features;
pub mod linear;
pub mod model;
pub mod neighbors;
pub mod normalize;
pub mod sparse;
pub mod synthetic;
pub mod tree;
pub mod util;

pub use corpus::{Label, LabeledCorpus, LabeledDocument};
pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureSpace, TfidfFeaturizer};
pub use sparse::{SparseMatrix, SparseVector};
