//! The black-box classifier abstraction.
//!
//! The explainer only ever sees class-probability vectors. Every response is
//! checked against the probability simplex before it is used.

mod centroid;
pub mod protocol;
mod subprocess;

pub use centroid::{fit_centroid_classifier, CentroidClassifier};
pub use subprocess::SubprocessOracle;

use crate::data::Series;
use crate::error::{Error, Result};

/// Tolerance on `sum(probs) == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// A classifier queried only through its probability output.
///
/// Implementations must be pure: repeated calls on the same values return the
/// same vector.
pub trait PredictionOracle: Send + Sync {
    fn predict(&self, values: &Series) -> Result<Vec<f64>>;

    fn predict_batch(&self, batch: &[Series]) -> Result<Vec<Vec<f64>>> {
        batch.iter().map(|x| self.predict(x)).collect()
    }
}

impl<O: PredictionOracle + ?Sized> PredictionOracle for &O {
    fn predict(&self, values: &Series) -> Result<Vec<f64>> {
        (**self).predict(values)
    }

    fn predict_batch(&self, batch: &[Series]) -> Result<Vec<Vec<f64>>> {
        (**self).predict_batch(batch)
    }
}

impl<O: PredictionOracle + ?Sized> PredictionOracle for Box<O> {
    fn predict(&self, values: &Series) -> Result<Vec<f64>> {
        (**self).predict(values)
    }

    fn predict_batch(&self, batch: &[Series]) -> Result<Vec<Vec<f64>>> {
        (**self).predict_batch(batch)
    }
}

/// Wraps a closure as an oracle.
pub struct FnOracle<F>(pub F);

impl<F> PredictionOracle for FnOracle<F>
where
    F: Fn(&Series) -> Vec<f64> + Send + Sync,
{
    fn predict(&self, values: &Series) -> Result<Vec<f64>> {
        Ok((self.0)(values))
    }
}

/// Checks length, range and normalization of one oracle response.
pub fn check_probabilities(probs: &[f64], classes: usize) -> Result<()> {
    if probs.len() != classes {
        return Err(Error::InvalidPrediction(format!(
            "expected {classes} probabilities, got {}",
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidPrediction(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidPrediction(format!(
            "probabilities sum to {sum}"
        )));
    }
    Ok(())
}

/// Validated prediction.
pub fn predict_checked(
    oracle: &dyn PredictionOracle,
    values: &Series,
    classes: usize,
) -> Result<Vec<f64>> {
    let probs = oracle.predict(values)?;
    check_probabilities(&probs, classes)?;
    Ok(probs)
}

/// Index and value of the maximum; ties go to the lowest index.
pub fn argmax(probs: &[f64]) -> (usize, f64) {
    probs
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
            if p > best.1 {
                (i, p)
            } else {
                best
            }
        })
}

/// The winner class of `values` and its probability.
pub fn predict_winner(
    oracle: &dyn PredictionOracle,
    values: &Series,
    classes: usize,
) -> Result<(usize, f64)> {
    let probs = predict_checked(oracle, values, classes)?;
    Ok(argmax(&probs))
}
