//! Importance scores of salient sub-sequences.

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::slide::SalientSubsequence;
use crate::data::{rows_to_series, series_to_rows, Series};

/// Per-cell importance in `[0, 1]`, indexed `[t, s]`. Serialized as `T` rows
/// of `V` scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix {
    pub scores: Series,
}

impl ImportanceMatrix {
    pub fn zeros(time_steps: usize, signals: usize) -> Self {
        Self {
            scores: Array2::zeros((time_steps, signals)),
        }
    }

    pub fn time_steps(&self) -> usize {
        self.scores.nrows()
    }

    pub fn signals(&self) -> usize {
        self.scores.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.scores.iter().all(|&v| v == 0.0)
    }

    /// Time steps with at least one nonzero cell.
    pub fn nonzero_time_steps(&self) -> usize {
        self.scores
            .rows()
            .into_iter()
            .filter(|row| row.iter().any(|&v| v != 0.0))
            .count()
    }

    /// `(t, s, score)` triples in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.scores.indexed_iter().map(|((t, s), &v)| (t, s, v))
    }

    /// Flat `t,s,score` CSV with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,score\n");
        for (t, s, v) in self.cells() {
            out.push_str(&format!("{t},{s},{v}\n"));
        }
        out
    }
}

impl Serialize for ImportanceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        series_to_rows(&self.scores).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ImportanceMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        let scores = rows_to_series(&rows).map_err(serde::de::Error::custom)?;
        Ok(Self { scores })
    }
}

/// Scores of one salient sub-sequence: `(current, neighbor)` where
/// `current = min(|y_i_c - y_m_c| + lambda * exp(-window_size / T), 1)` and
/// `neighbor = alpha * current`.
pub fn subsequence_scores(
    y_i_c: f64,
    y_m_c: f64,
    window_size: usize,
    time_steps: usize,
    lambda: f64,
    alpha: f64,
) -> (f64, f64) {
    let size_term = lambda * (-(window_size as f64) / time_steps as f64).exp();
    let current = ((y_i_c - y_m_c).abs() + size_term).min(1.0);
    (current, alpha * current)
}

/// Combines sub-sequence scores into the importance matrix. Overlapping
/// windows keep the highest score per cell; cells outside every window are 0.
pub fn importance_scores(
    y_i_c: f64,
    subsequences: &[SalientSubsequence],
    time_steps: usize,
    signals: usize,
    lambda: f64,
    alpha: f64,
) -> ImportanceMatrix {
    let mut imp = ImportanceMatrix::zeros(time_steps, signals);
    for sub in subsequences {
        let (current, neighbor) =
            subsequence_scores(y_i_c, sub.y_m_c, sub.window_size, time_steps, lambda, alpha);
        for t in sub.t_lo..=sub.t_hi {
            let score = if t == sub.t_prime { current } else { neighbor };
            for &s in &sub.signals {
                let cell = &mut imp.scores[[t, s]];
                *cell = cell.max(score);
            }
        }
    }
    imp
}
