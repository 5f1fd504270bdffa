//! Post-hoc explanations for black-box multivariate time-series classifiers.
//!
//! Salient signals are found by swapping whole signals of the instance with
//! those of nearby training instances from other classes; salient time
//! windows are then found by sliding partial swaps over those signals. The
//! resulting drops in the winner-class score become a per-cell importance
//! matrix.

pub mod baseline;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use data::{
    load_dataset, save_dataset, DatasetMeta, LabeledDataset, LabeledInstance, Series,
    TimeSeriesInstance,
};
pub use error::{Error, Result};
pub use explain::{explain, Explanation, ImportanceMatrix, SsetConfig, Status};
pub use oracle::{CentroidClassifier, PredictionOracle, SubprocessOracle};
pub use rng::RandomSource;
