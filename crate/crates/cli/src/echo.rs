//! Reference echo model: class `c` gets the mean of signal `c`, normalized
//! over signals. Only meaningful when V = C.
//!
//! Sums run in index order so that other implementations of the same model
//! produce bit-identical probabilities.

use sset_core::Series;

pub fn echo_probabilities(values: &Series) -> Vec<f64> {
    let (time_steps, signals) = values.dim();
    let means: Vec<f64> = (0..signals)
        .map(|s| values.column(s).iter().fold(0.0, |acc, v| acc + v) / time_steps as f64)
        .collect();
    let total = means.iter().fold(0.0, |acc, m| acc + m);
    if total <= 0.0 {
        return vec![1.0 / signals as f64; signals];
    }
    means.iter().map(|m| m / total).collect()
}
