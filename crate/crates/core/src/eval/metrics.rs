use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Series;
use crate::error::Result;
use crate::explain::{Explanation, ImportanceMatrix, Status};
use crate::stats::{euclidean_distance, pearson_correlation};

/// Score suppression of a manipulation: `max(0, y_i_c - manipulated_score)`.
pub fn precision_metric(y_i_c: f64, manipulated_score: f64) -> f64 {
    (y_i_c - manipulated_score).max(0.0)
}

/// Number of time steps with any nonzero importance.
pub fn informativeness_metric(importance: &ImportanceMatrix) -> usize {
    importance.nonzero_time_steps()
}

/// Distance between the instance and its manipulated version.
pub fn similarity_metric(x: &Series, manipulated: &Series) -> Result<f64> {
    euclidean_distance(x, manipulated)
}

/// For each signal, the number of explanations in which it is salient
/// (alone or as a pair member).
pub fn salient_signal_histogram(explanations: &[Explanation], signals: usize) -> Vec<usize> {
    let mut counts = vec![0; signals];
    for e in explanations {
        let mut seen = vec![false; signals];
        for s in e.salient_signals.iter().flat_map(|x| &x.signals) {
            if *s < signals && !seen[*s] {
                seen[*s] = true;
                counts[*s] += 1;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSizeDistribution {
    /// Representative window size -> number of explanations.
    pub histogram: BTreeMap<usize, usize>,
    pub mean: Option<f64>,
}

/// Distribution of each explained instance's smallest salient window.
pub fn window_size_distribution(explanations: &[Explanation]) -> WindowSizeDistribution {
    let sizes: Vec<usize> = explanations
        .iter()
        .filter(|e| e.status == Status::Explained)
        .filter_map(Explanation::min_window_size)
        .collect();
    let mut histogram = BTreeMap::new();
    for &w in &sizes {
        *histogram.entry(w).or_insert(0) += 1;
    }
    let mean = (!sizes.is_empty()).then(|| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64);
    WindowSizeDistribution { histogram, mean }
}

/// Pearson correlation between the chosen neighbor's distance and the
/// smallest salient window size over explained instances.
pub fn distance_window_correlation(explanations: &[Explanation]) -> Result<f64> {
    let (distances, sizes): (Vec<f64>, Vec<f64>) = explanations
        .iter()
        .filter(|e| e.status == Status::Explained)
        .filter_map(|e| {
            Some((
                e.chosen_neighbor.as_ref()?.distance,
                e.min_window_size()? as f64,
            ))
        })
        .unzip();
    pearson_correlation(&distances, &sizes)
}
