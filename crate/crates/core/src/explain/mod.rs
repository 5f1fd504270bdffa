//! Swapping-sliding explanation of a single instance.
//!
//! The search runs in two stages over the same neighborhood schedule. The
//! single-signal stage swaps one column at a time with target-class neighbors
//! sampled from a growing distance annulus. If no scope yields a salient
//! signal, the dual stage repeats the schedule swapping signal pairs. The
//! first salient swap is localized in time by sliding windows of growing
//! context, and the salient windows are turned into an importance matrix.

mod config;
mod importance;
mod neighbors;
mod probe;
mod slide;
mod swap;

pub use config::SsetConfig;
pub use importance::{importance_scores, subsequence_scores, ImportanceMatrix};
pub use neighbors::{sample_neighbors, scope_schedule, Neighbor, NeighborPool, Scope};
pub use probe::{splice, Probe};
pub use slide::{slide, window_bounds, SalientSubsequence};
pub use swap::{
    detect_salient_signals, dual_pair_order, dual_signals, swap_signal, swap_signals, SwapResult,
    SwapTrial,
};

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Series, TimeSeriesInstance};
use crate::error::{Error, Result};
use crate::oracle::PredictionOracle;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Explained,
    NoSalientSignal,
    NoSalientSubsequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    pub id: String,
    pub distance: f64,
}

impl From<&Neighbor<'_>> for NeighborRecord {
    fn from(n: &Neighbor<'_>) -> Self {
        Self {
            id: n.instance.id.clone(),
            distance: n.distance,
        }
    }
}

/// A salient signal (or pair) with the swap that made it salient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientSignal {
    pub signals: Vec<usize>,
    pub neighbor: NeighborRecord,
    /// Winner-class score after the full-length swap.
    pub swap_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub instance_id: String,
    pub status: Status,
    pub winner_class: usize,
    pub y_i_c: f64,
    /// Whether the salient signals are pairs found by dual-signal swapping.
    pub dual_signals: bool,
    pub salient_signals: Vec<SalientSignal>,
    pub subsequences: Vec<SalientSubsequence>,
    /// Index into `subsequences` of the manipulation with the largest drop.
    pub best_subsequence: Option<usize>,
    /// Source neighbor of the best manipulation.
    pub chosen_neighbor: Option<NeighborRecord>,
    /// Largest context at which sliding concluded.
    pub ctx_used: Option<usize>,
    /// Sampling attempts made by the single-signal stage.
    pub attempts_used: usize,
    /// Sampling attempts made by the dual-signal stage, if it ran.
    pub dual_attempts_used: Option<usize>,
    /// Attempts made within the concluding scope, counting the successful one.
    pub attempts_in_scope: Option<usize>,
    pub scope_used: Option<Scope>,
    /// Neighbors sampled in the concluding attempt.
    pub sampled_neighbors: Vec<NeighborRecord>,
    pub oracle_calls: usize,
    pub signal_names: Vec<String>,
    pub importance: ImportanceMatrix,
}

impl Explanation {
    pub fn best(&self) -> Option<&SalientSubsequence> {
        self.best_subsequence.map(|i| &self.subsequences[i])
    }

    /// Smallest salient window size.
    pub fn min_window_size(&self) -> Option<usize> {
        self.subsequences.iter().map(|s| s.window_size).min()
    }

    /// Rebuilds the best manipulated instance from `x` and the training neighbor
    /// it was taken from.
    pub fn best_manipulated(&self, x: &Series, dataset: &LabeledDataset) -> Result<Option<Series>> {
        let Some(best) = self.best() else {
            return Ok(None);
        };
        let neighbor = dataset
            .train
            .iter()
            .find(|item| item.instance.id == best.neighbor_id)
            .ok_or_else(|| Error::UnknownInstance(best.neighbor_id.clone()))?;
        Ok(Some(splice(
            x,
            &neighbor.instance.values,
            &best.signals,
            best.t_lo,
            best.t_hi,
        )))
    }
}

struct StageHit<'a> {
    results: Vec<SwapResult<'a>>,
    scope: Scope,
    attempts_in_scope: usize,
    neighbors: Vec<Neighbor<'a>>,
}

/// Walks the scope schedule, sampling neighbors up to `thr_a` times per scope
/// and handing each non-empty sample to `detect`. Stops at the first sample
/// for which `detect` returns salient results. Returns the hit (if any) and
/// the number of attempts made.
fn search_scopes<'a>(
    pool: &NeighborPool<'a>,
    config: &SsetConfig,
    rng: &mut RandomSource,
    mut detect: impl FnMut(&[Neighbor<'a>]) -> Result<Vec<SwapResult<'a>>>,
) -> Result<(Option<StageHit<'a>>, usize)> {
    let mut attempts = 0;
    for scope in scope_schedule(config) {
        for attempt in 1..=config.thr_a {
            attempts += 1;
            let neighbors = pool.sample(scope, config.n_neighbors, rng);
            if neighbors.is_empty() {
                continue;
            }
            let results = detect(&neighbors)?;
            if !results.is_empty() {
                let hit = StageHit {
                    results,
                    scope,
                    attempts_in_scope: attempt,
                    neighbors,
                };
                return Ok((Some(hit), attempts));
            }
        }
    }
    Ok((None, attempts))
}

/// Explains the winner-class prediction of `x`.
///
/// The result is a pure function of the inputs and the state of `rng`.
pub fn explain(
    x: &TimeSeriesInstance,
    dataset: &LabeledDataset,
    oracle: &dyn PredictionOracle,
    config: &SsetConfig,
    rng: &mut RandomSource,
) -> Result<Explanation> {
    config.validate()?;
    let meta = &dataset.meta;
    let expected = (meta.time_steps, meta.signals);
    if x.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: x.shape(),
        });
    }
    let (time_steps, signals) = expected;
    let ctx_max = config.effective_ctx_max(time_steps);

    let mut probe = Probe::new(x, oracle, meta.classes)?;
    let winner = probe.class();
    let pool = NeighborPool::new(x, &dataset.train, |label| label != winner)?;

    let mut explanation = Explanation {
        instance_id: x.id.clone(),
        status: Status::NoSalientSignal,
        winner_class: winner,
        y_i_c: probe.y_c(),
        dual_signals: false,
        salient_signals: Vec::new(),
        subsequences: Vec::new(),
        best_subsequence: None,
        chosen_neighbor: None,
        ctx_used: None,
        attempts_used: 0,
        dual_attempts_used: None,
        attempts_in_scope: None,
        scope_used: None,
        sampled_neighbors: Vec::new(),
        oracle_calls: 0,
        signal_names: meta.signal_names.clone(),
        importance: ImportanceMatrix::zeros(time_steps, signals),
    };

    let (mut hit, attempts) = search_scopes(&pool, config, rng, |neighbors| {
        let (salient, results) = detect_salient_signals(&mut probe, neighbors, config.thr_c)?;
        Ok(results
            .into_iter()
            .enumerate()
            .filter(|(s, _)| salient.contains(s))
            .map(|(_, r)| r)
            .collect())
    })?;
    explanation.attempts_used = attempts;

    if hit.is_none() && signals >= 2 {
        let non_correlated = meta.non_correlated_signals();
        let (dual_hit, dual_attempts) = search_scopes(&pool, config, rng, |neighbors| {
            dual_signals(
                &mut probe,
                neighbors,
                config.thr_c,
                &meta.signal_groups,
                &non_correlated,
            )
        })?;
        explanation.dual_attempts_used = Some(dual_attempts);
        explanation.dual_signals = dual_hit.is_some();
        hit = dual_hit;
    }

    let Some(hit) = hit else {
        explanation.oracle_calls = probe.calls();
        return Ok(explanation);
    };

    explanation.scope_used = Some(hit.scope);
    explanation.attempts_in_scope = Some(hit.attempts_in_scope);
    explanation.sampled_neighbors = hit.neighbors.iter().map(NeighborRecord::from).collect();
    explanation.salient_signals = hit
        .results
        .iter()
        .map(|r| SalientSignal {
            signals: r.signals.clone(),
            neighbor: NeighborRecord::from(&r.best_trial().neighbor),
            swap_score: r.best_score(),
        })
        .collect();

    let mut ctx_used = None;
    for result in &hit.results {
        let found = slide(&mut probe, result, config.thr_c, config.ctx0, ctx_max)?;
        if let Some(first) = found.first() {
            ctx_used = ctx_used.max(Some(first.context));
        }
        explanation.subsequences.extend(found);
    }
    explanation.ctx_used = ctx_used;
    explanation.oracle_calls = probe.calls();

    if explanation.subsequences.is_empty() {
        explanation.status = Status::NoSalientSubsequence;
        let strongest =
            explanation
                .salient_signals
                .iter()
                .fold(None::<&SalientSignal>, |best, s| match best {
                    Some(b) if b.swap_score <= s.swap_score => Some(b),
                    _ => Some(s),
                });
        explanation.chosen_neighbor = strongest.map(|s| s.neighbor.clone());
        return Ok(explanation);
    }

    let best = best_subsequence(&explanation.subsequences);
    let chosen = &explanation.subsequences[best];
    explanation.chosen_neighbor = Some(NeighborRecord {
        id: chosen.neighbor_id.clone(),
        distance: chosen.neighbor_distance,
    });
    explanation.best_subsequence = Some(best);
    explanation.importance = importance_scores(
        explanation.y_i_c,
        &explanation.subsequences,
        time_steps,
        signals,
        config.lambda,
        config.alpha,
    );
    explanation.status = Status::Explained;
    Ok(explanation)
}

/// Largest drop; ties prefer the smaller window, then the earlier entry.
fn best_subsequence(subs: &[SalientSubsequence]) -> usize {
    let mut best = 0;
    for (i, s) in subs.iter().enumerate().skip(1) {
        let b = &subs[best];
        if s.drop > b.drop || (s.drop == b.drop && s.window_size < b.window_size) {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetMeta, LabeledInstance};
    use crate::oracle::FnOracle;
    use ndarray::Array2;

    fn dataset(train: Vec<LabeledInstance>, t: usize, v: usize) -> LabeledDataset {
        LabeledDataset {
            meta: DatasetMeta {
                time_steps: t,
                signals: v,
                classes: 2,
                signal_names: (0..v).map(|s| format!("s{s}")).collect(),
                class_names: vec!["a".into(), "b".into()],
                signal_groups: vec![],
            },
            train,
            test: vec![],
        }
    }

    fn labeled(id: &str, value: f64, t: usize, v: usize, label: usize) -> LabeledInstance {
        LabeledInstance {
            instance: TimeSeriesInstance::new(id, Array2::from_elem((t, v), value)),
            label,
        }
    }

    #[test]
    fn constant_oracle_exhausts_every_scope() {
        let train = (0..5)
            .map(|i| labeled(&format!("n{i}"), 0.1 * i as f64, 4, 2, 1))
            .collect();
        let ds = dataset(train, 4, 2);
        let x = TimeSeriesInstance::new("x", Array2::from_elem((4, 2), 0.5));
        let oracle = FnOracle(|_: &Series| vec![0.8, 0.2]);
        let config = SsetConfig::default();
        let e = explain(&x, &ds, &oracle, &config, &mut RandomSource::new(1)).unwrap();
        let scopes = scope_schedule(&config).count();
        assert_eq!(e.status, Status::NoSalientSignal);
        assert!(e.importance.is_zero());
        assert_eq!(e.attempts_used, config.thr_a * scopes);
        assert_eq!(e.dual_attempts_used, Some(config.thr_a * scopes));
        assert!(e.salient_signals.is_empty() && e.scope_used.is_none());
    }

    #[test]
    fn finds_the_column_the_oracle_reads() {
        let (t, v) = (8, 3);
        let train = vec![labeled("far", 0.0, t, v, 1), labeled("same", 0.9, t, v, 0)];
        let ds = dataset(train, t, v);
        let x = TimeSeriesInstance::new("x", Array2::from_elem((t, v), 0.2));
        // Class 0 score falls with the mean of column 1 below 0.2 over steps 2..=4.
        let oracle = FnOracle(|x: &Series| {
            let low = (2..=4).filter(|&t| x[[t, 1]] < 0.1).count();
            let p = if low == 3 { 0.1 } else { 0.9 };
            vec![p, 1.0 - p]
        });
        let e = explain(
            &x,
            &ds,
            &oracle,
            &SsetConfig::default(),
            &mut RandomSource::new(5),
        )
        .unwrap();
        assert_eq!(e.status, Status::Explained);
        assert_eq!(e.salient_signals.len(), 1);
        assert_eq!(e.salient_signals[0].signals, vec![1]);
        assert_eq!(e.subsequences.len(), 1);
        let s = &e.subsequences[0];
        assert_eq!((s.t_prime, s.t_lo, s.t_hi), (3, 2, 4));
        assert_eq!(e.chosen_neighbor.as_ref().unwrap().id, "far");
        let scope = e.scope_used.unwrap();
        assert!(scope.contains(e.chosen_neighbor.as_ref().unwrap().distance));
        assert!(e.importance.scores.column(0).iter().all(|&v| v == 0.0));
        assert!(e.importance.scores[[3, 1]] > e.importance.scores[[2, 1]]);
        assert_eq!(e.importance.nonzero_time_steps(), 3);

        let again = explain(
            &x,
            &ds,
            &oracle,
            &SsetConfig::default(),
            &mut RandomSource::new(5),
        )
        .unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn sliding_can_fail_under_a_tight_context_cap() {
        let (t, v) = (6, 1);
        let ds = dataset(vec![labeled("n", 0.0, t, v, 1)], t, v);
        let x = TimeSeriesInstance::new("x", Array2::from_elem((t, v), 0.3));
        // Needs every step replaced.
        let oracle = FnOracle(|x: &Series| {
            let p = if x.iter().all(|&v| v < 0.1) { 0.1 } else { 0.9 };
            vec![p, 1.0 - p]
        });
        let config = SsetConfig {
            ctx_max: Some(1),
            ..SsetConfig::default()
        };
        let e = explain(&x, &ds, &oracle, &config, &mut RandomSource::new(0)).unwrap();
        assert_eq!(e.status, Status::NoSalientSubsequence);
        assert_eq!(e.salient_signals[0].signals, vec![0]);
        assert!(e.importance.is_zero());

        let e = explain(
            &x,
            &ds,
            &oracle,
            &SsetConfig::default(),
            &mut RandomSource::new(0),
        )
        .unwrap();
        assert_eq!(e.status, Status::Explained);
        assert_eq!(e.ctx_used, Some(3));
    }

    #[test]
    fn rejects_invalid_config_and_shape() {
        let ds = dataset(vec![labeled("n", 0.0, 4, 2, 1)], 4, 2);
        let oracle = FnOracle(|_: &Series| vec![0.8, 0.2]);
        let x = TimeSeriesInstance::new("x", Array2::from_elem((4, 2), 0.5));
        let bad = SsetConfig {
            thr_c: 0.0,
            ..SsetConfig::default()
        };
        assert!(explain(&x, &ds, &oracle, &bad, &mut RandomSource::new(0)).is_err());
        let wrong = TimeSeriesInstance::new("x", Array2::from_elem((3, 2), 0.5));
        assert!(explain(
            &wrong,
            &ds,
            &oracle,
            &SsetConfig::default(),
            &mut RandomSource::new(0)
        )
        .is_err());
    }
}
