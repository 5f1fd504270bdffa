//! Synthetic ground truth, explanation-quality metrics and run analyses.

mod metrics;
mod report;
mod synth;

pub use metrics::{
    distance_window_correlation, informativeness_metric, precision_metric,
    salient_signal_histogram, similarity_metric, window_size_distribution, WindowSizeDistribution,
};
pub use report::{
    analyze, markdown_table, occlusion_quality, sset_quality, Analysis, InstanceQuality,
    QualityReport,
};
pub use synth::{generate_synthetic, GroundTruth, PlantedSignal, SyntheticDataset, SyntheticSpec};
