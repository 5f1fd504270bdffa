//! Sliding-occlusion baseline explainer.
//!
//! Each cell `(t', s)` is scored by the winner-class drop caused by occluding
//! a fixed window around `t'` in signal `s`. There is no search over window
//! size, so the scores have no notion of a minimal salient context.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{LabeledInstance, Series};
use crate::error::{Error, Result};
use crate::explain::{window_bounds, ImportanceMatrix};
use crate::oracle::{predict_checked, PredictionOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Replacement {
    /// Per-cell mean over all training instances.
    TrainMean,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OcclusionConfig {
    /// Odd window length centered on each step.
    pub window_size: usize,
    pub replacement: Replacement,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            window_size: 3,
            replacement: Replacement::TrainMean,
        }
    }
}

/// The occlusion with the largest drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occlusion {
    pub t_prime: usize,
    pub signal: usize,
    pub t_lo: usize,
    pub t_hi: usize,
    pub score: f64,
    pub drop: f64,
}

#[derive(Debug, Clone)]
pub struct OcclusionResult {
    pub y_i_c: f64,
    pub importance: ImportanceMatrix,
    pub best: Option<Occlusion>,
    pub best_manipulated: Option<Series>,
}

fn replacement_values(
    shape: (usize, usize),
    train: &[LabeledInstance],
    replacement: Replacement,
) -> Result<Series> {
    match replacement {
        Replacement::Zero => Ok(Array2::zeros(shape)),
        Replacement::TrainMean => {
            if train.is_empty() {
                return Err(Error::InvalidConfig(
                    "train-mean occlusion needs training data".into(),
                ));
            }
            let mut sum = Array2::<f64>::zeros(shape);
            for item in train {
                if item.instance.values.dim() != shape {
                    return Err(Error::ShapeMismatch {
                        expected: shape,
                        actual: item.instance.values.dim(),
                    });
                }
                sum += &item.instance.values;
            }
            Ok(sum / train.len() as f64)
        }
    }
}

/// Occlusion importance of every cell at class `class`.
pub fn occlusion_explain(
    x: &Series,
    oracle: &dyn PredictionOracle,
    classes: usize,
    class: usize,
    train: &[LabeledInstance],
    config: &OcclusionConfig,
) -> Result<OcclusionResult> {
    let (time_steps, signals) = x.dim();
    if config.window_size.is_multiple_of(2) || config.window_size > time_steps {
        return Err(Error::InvalidConfig(format!(
            "occlusion window must be odd and at most T = {time_steps}, got {}",
            config.window_size
        )));
    }
    if class >= classes {
        return Err(Error::InvalidConfig(format!("class {class} out of range")));
    }
    let fill = replacement_values(x.dim(), train, config.replacement)?;
    let y_i_c = predict_checked(oracle, x, classes)?[class];
    let ctx = config.window_size / 2;

    let mut importance = ImportanceMatrix::zeros(time_steps, signals);
    let mut best: Option<(Occlusion, Series)> = None;
    for s in 0..signals {
        for t_prime in 0..time_steps {
            let (lo, hi) = window_bounds(t_prime, ctx, time_steps);
            let mut occluded = x.clone();
            for t in lo..=hi {
                occluded[[t, s]] = fill[[t, s]];
            }
            let score = predict_checked(oracle, &occluded, classes)?[class];
            let drop = (y_i_c - score).clamp(0.0, 1.0);
            importance.scores[[t_prime, s]] = drop;
            if drop > 0.0 && best.as_ref().is_none_or(|(b, _)| drop > b.drop) {
                let occlusion = Occlusion {
                    t_prime,
                    signal: s,
                    t_lo: lo,
                    t_hi: hi,
                    score,
                    drop,
                };
                best = Some((occlusion, occluded));
            }
        }
    }
    let (best, best_manipulated) = best.unzip();
    Ok(OcclusionResult {
        y_i_c,
        importance,
        best,
        best_manipulated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TimeSeriesInstance;
    use crate::oracle::FnOracle;
    use ndarray::{array, Array2};

    fn item(values: Series) -> LabeledInstance {
        LabeledInstance {
            instance: TimeSeriesInstance::new("tr", values),
            label: 0,
        }
    }

    #[test]
    fn constant_oracle_gives_zero_matrix() {
        let x = Array2::from_elem((5, 2), 0.4);
        let oracle = FnOracle(|_: &Series| vec![0.7, 0.3]);
        let r = occlusion_explain(
            &x,
            &oracle,
            2,
            0,
            &[],
            &OcclusionConfig {
                replacement: Replacement::Zero,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.importance.is_zero());
        assert!(r.best.is_none() && r.best_manipulated.is_none());
    }

    #[test]
    fn train_mean_equal_to_instance_is_neutral() {
        let x = array![[0.2, 0.4], [0.6, 0.8], [0.1, 0.3]];
        let train = [
            item(array![[0.1, 0.3], [0.5, 0.9], [0.0, 0.2]]),
            item(array![[0.3, 0.5], [0.7, 0.7], [0.2, 0.4]]),
        ];
        let oracle = FnOracle(|x: &Series| {
            let p = x.sum() / x.len() as f64;
            vec![p, 1.0 - p]
        });
        let r = occlusion_explain(&x, &oracle, 2, 0, &train, &OcclusionConfig::default()).unwrap();
        assert!(r.importance.is_zero(), "{:?}", r.importance);
    }

    #[test]
    fn peak_at_the_sensitive_cell() {
        let x = array![[0.9], [0.9], [0.9], [0.9]];
        // Sensitive only to cell 2; less occluded context elsewhere matters not.
        let oracle = FnOracle(|x: &Series| {
            let p = 0.5 + 0.4 * x[[2, 0]];
            vec![p, 1.0 - p]
        });
        let config = OcclusionConfig {
            window_size: 1,
            replacement: Replacement::Zero,
        };
        let r = occlusion_explain(&x, &oracle, 2, 0, &[], &config).unwrap();

        // Exhaustive check over the four single-cell occlusions.
        let y = oracle.predict(&x).unwrap()[0];
        for t in 0..4 {
            let mut occ = x.clone();
            occ[[t, 0]] = 0.0;
            let expected = (y - oracle.predict(&occ).unwrap()[0]).max(0.0);
            assert_eq!(r.importance.scores[[t, 0]], expected);
        }
        let best = r.best.unwrap();
        assert_eq!(best.t_prime, 2);
        assert_eq!(
            r.importance.scores.iter().cloned().fold(0.0, f64::max),
            r.importance.scores[[2, 0]]
        );
    }

    #[test]
    fn rejects_even_or_oversized_windows() {
        let x = Array2::from_elem((3, 1), 0.5);
        let oracle = FnOracle(|_: &Series| vec![1.0]);
        for w in [2, 5] {
            let config = OcclusionConfig {
                window_size: w,
                replacement: Replacement::Zero,
            };
            assert!(occlusion_explain(&x, &oracle, 1, 0, &[], &config).is_err());
        }
    }
}
