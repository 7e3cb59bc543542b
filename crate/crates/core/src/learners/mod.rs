//! Subset selectors learned from reported CSI: a CART decision tree, a
//! random forest, a multi-layer perceptron and a 1-D convolutional network,
//! plus the Euclidean rule wrapped behind the same interface.

mod dataset;
mod features;
mod forest;
mod model;
pub mod nn;
mod tree;

pub use dataset::{Dataset, DatasetMeta};
pub use features::{extract_features, FeatureSpec};
pub use forest::{train_forest, ForestConfig, ForestModel};
pub use model::{train_selector, Algorithm, LearnerConfig, Prediction, SelectorModel};
pub use tree::{grow_tree, train_tree, Node, TreeConfig, TreeModel};
