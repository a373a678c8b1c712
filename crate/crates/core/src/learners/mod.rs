//! Learning primitives: decision trees, random forests, gradient-boosted
//! regression trees, a linear SVM, feature selection and oversampling.

pub mod forest;
pub mod gbt;
pub mod sampling;
pub mod select;
pub mod svm;
pub mod tree;

pub use forest::{ForestConfig, ForestVote, RandomForest};
pub use gbt::{GbtConfig, GbtEnsemble};
pub use sampling::oversample;
pub use select::select_features;
pub use svm::{LinearSvm, SvmConfig};
pub use tree::{gini, split_gini, ClassificationTree, Node, RegressionTree};
