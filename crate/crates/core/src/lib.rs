//! Decision-tree and random-forest learning under label noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] generates the synthetic benchmark datasets, loads delimited
//!   tables and produces train/validation/test partitions.
//! * [`noise`] corrupts labels under symmetric, class-conditional or
//!   feature-dependent noise and records which labels were flipped.
//! * [`criteria`] holds the impurity measures, the impurity-gain and twoing
//!   split criteria, and the closed-form large-sample values of those
//!   criteria under symmetric noise.
//! * [`tree`] grows axis-aligned binary trees greedily with majority-vote
//!   leaves.
//! * [`forest`] builds bagged greedy forests and purely random forests.
//! * [`bounds`] evaluates the Hoeffding-style sample-size bounds for leaf
//!   labelling and split selection, and checks them by simulation.
//! * [`bench`] runs noise, leaf-size and training-size sweeps and writes
//!   CSV result tables.

pub mod bench;
pub mod bounds;
pub mod criteria;
pub mod data;
mod error;
pub mod forest;
pub mod noise;
pub mod rng;
pub mod tree;

pub use criteria::{Criterion, ImpurityKind, SplitFractions, SplitStats};
pub use data::{Dataset, Label, SplitSpec};
pub use error::{Error, Result};
pub use forest::{ForestMode, ForestParams, RandomForest};
pub use noise::{NoiseModel, NoisyDataset};
pub use tree::{Classifier, DecisionTree, TreeParams};
