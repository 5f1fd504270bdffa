use ndarray::Array2;

use super::PredictionOracle;
use crate::data::{LabeledInstance, Series};
use crate::error::{Error, Result};
use crate::stats::euclidean_distance;

/// Nearest-centroid classifier with a softmax over negative distances:
/// `p_c ∝ exp(-temperature * ||x - centroid_c||)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidClassifier {
    pub centroids: Vec<Series>,
    pub temperature: f64,
}

impl CentroidClassifier {
    pub const DEFAULT_TEMPERATURE: f64 = 5.0;

    pub fn classes(&self) -> usize {
        self.centroids.len()
    }
}

/// Per-class element-wise mean of the training instances.
pub fn fit_centroid_classifier(
    train: &[LabeledInstance],
    classes: usize,
    temperature: f64,
) -> Result<CentroidClassifier> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let shape = train
        .first()
        .map(|item| item.instance.values.dim())
        .ok_or(Error::EmptyClass(0))?;
    let mut sums = vec![Array2::<f64>::zeros(shape); classes];
    let mut counts = vec![0usize; classes];
    for item in train {
        if item.instance.values.dim() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                actual: item.instance.values.dim(),
            });
        }
        if item.label >= classes {
            return Err(Error::InvalidConfig(format!(
                "label {} out of range for {classes} classes",
                item.label
            )));
        }
        sums[item.label] += &item.instance.values;
        counts[item.label] += 1;
    }
    let centroids = sums
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (sum, n))| {
            if n == 0 {
                Err(Error::EmptyClass(c))
            } else {
                Ok(sum / n as f64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CentroidClassifier {
        centroids,
        temperature,
    })
}

impl PredictionOracle for CentroidClassifier {
    fn predict(&self, values: &Series) -> Result<Vec<f64>> {
        let logits = self
            .centroids
            .iter()
            .map(|c| euclidean_distance(values, c).map(|d| -self.temperature * d))
            .collect::<Result<Vec<_>>>()?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }
}
