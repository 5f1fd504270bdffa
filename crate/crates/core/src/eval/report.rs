use serde::{Deserialize, Serialize};

use super::metrics::{
    distance_window_correlation, informativeness_metric, precision_metric,
    salient_signal_histogram, similarity_metric, window_size_distribution, WindowSizeDistribution,
};
use crate::baseline::OcclusionResult;
use crate::data::{LabeledDataset, Series};
use crate::error::{Error, Result};
use crate::explain::{Explanation, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceQuality {
    pub instance_id: String,
    pub explained: bool,
    pub precision: f64,
    pub informativeness: usize,
    pub similarity: Option<f64>,
}

/// Dataset-level explanation quality of one explainer.
///
/// Means are taken over explained instances only; `precision_pessimistic`
/// also counts failed instances with precision 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub explainer: String,
    pub precision: Option<f64>,
    pub precision_pessimistic: Option<f64>,
    pub informativeness: Option<f64>,
    pub similarity: Option<f64>,
    pub n_explained: usize,
    pub n_failed: usize,
    pub rows: Vec<InstanceQuality>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl QualityReport {
    pub fn from_rows(explainer: impl Into<String>, rows: Vec<InstanceQuality>) -> Self {
        let explained = || rows.iter().filter(|r| r.explained);
        let n_explained = explained().count();
        let n_failed = rows.len() - n_explained;
        Self {
            explainer: explainer.into(),
            precision: mean(explained().map(|r| r.precision)),
            precision_pessimistic: mean(rows.iter().map(|r| {
                if r.explained {
                    r.precision
                } else {
                    0.0
                }
            })),
            informativeness: mean(explained().map(|r| r.informativeness as f64)),
            similarity: mean(explained().filter_map(|r| r.similarity)),
            n_explained,
            n_failed,
            rows,
        }
    }
}

fn instance_values<'a>(dataset: &'a LabeledDataset, id: &str) -> Result<&'a Series> {
    dataset
        .find(id)
        .map(|item| &item.instance.values)
        .ok_or_else(|| Error::UnknownInstance(id.to_string()))
}

/// Quality of swapping-sliding explanations, using each explanation's best
/// manipulation.
pub fn sset_quality(
    explanations: &[Explanation],
    dataset: &LabeledDataset,
) -> Result<QualityReport> {
    let rows = explanations
        .iter()
        .map(|e| {
            let x = instance_values(dataset, &e.instance_id)?;
            if x.dim() != e.importance.scores.dim() {
                return Err(Error::ShapeMismatch {
                    expected: x.dim(),
                    actual: e.importance.scores.dim(),
                });
            }
            let explained = e.status == Status::Explained;
            let (precision, similarity) = match (e.best(), e.best_manipulated(x, dataset)?) {
                (Some(best), Some(m)) if explained => (
                    precision_metric(e.y_i_c, best.y_m_c),
                    Some(similarity_metric(x, &m)?),
                ),
                _ => (0.0, None),
            };
            Ok(InstanceQuality {
                instance_id: e.instance_id.clone(),
                explained,
                precision,
                informativeness: informativeness_metric(&e.importance),
                similarity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QualityReport::from_rows("SSET", rows))
}

/// Quality of occlusion results, keyed by instance id.
pub fn occlusion_quality(
    results: &[(String, OcclusionResult)],
    dataset: &LabeledDataset,
) -> Result<QualityReport> {
    let rows = results
        .iter()
        .map(|(id, r)| {
            let x = instance_values(dataset, id)?;
            let similarity = r
                .best_manipulated
                .as_ref()
                .map(|m| similarity_metric(x, m))
                .transpose()?;
            Ok(InstanceQuality {
                instance_id: id.clone(),
                explained: r.best.is_some(),
                precision: r
                    .best
                    .as_ref()
                    .map_or(0.0, |b| precision_metric(r.y_i_c, b.score)),
                informativeness: informativeness_metric(&r.importance),
                similarity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QualityReport::from_rows("Occlusion", rows))
}

/// Markdown table with one row per explainer.
pub fn markdown_table(reports: &[QualityReport]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
    let mut out = String::from("| Explainer | Precision | Informativeness | Similarity |\n");
    out.push_str("|---|---|---|---|\n");
    for r in reports {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            r.explainer,
            cell(r.precision),
            cell(r.informativeness),
            cell(r.similarity)
        ));
    }
    out
}

/// Everything reported for one explanation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub quality: Vec<QualityReport>,
    pub salient_signal_histogram: Vec<(String, usize)>,
    pub window_sizes: WindowSizeDistribution,
    pub distance_window_correlation: Option<f64>,
    /// Why the correlation is missing, when it is.
    pub correlation_error: Option<String>,
    pub status_counts: Vec<(Status, usize)>,
}

pub fn analyze(
    explanations: &[Explanation],
    dataset: &LabeledDataset,
    baseline: Option<QualityReport>,
) -> Result<Analysis> {
    let mut quality = vec![sset_quality(explanations, dataset)?];
    quality.extend(baseline);
    let histogram = salient_signal_histogram(explanations, dataset.meta.signals);
    let (correlation, correlation_error) = match distance_window_correlation(explanations) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let status_counts = [
        Status::Explained,
        Status::NoSalientSignal,
        Status::NoSalientSubsequence,
    ]
    .into_iter()
    .map(|s| (s, explanations.iter().filter(|e| e.status == s).count()))
    .collect();
    Ok(Analysis {
        quality,
        salient_signal_histogram: dataset
            .meta
            .signal_names
            .iter()
            .cloned()
            .zip(histogram)
            .collect(),
        window_sizes: window_size_distribution(explanations),
        distance_window_correlation: correlation,
        correlation_error,
        status_counts,
    })
}
