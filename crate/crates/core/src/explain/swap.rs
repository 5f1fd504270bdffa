//! Swapping stage: replace whole signals with their counterparts in target-class
//! neighbors and watch the winner-class score.

use super::neighbors::Neighbor;
use super::probe::Probe;
use crate::data::Series;
use crate::error::{Error, Result};

/// One neighbor's contribution to a swap.
#[derive(Debug, Clone)]
pub struct SwapTrial<'a> {
    pub neighbor: Neighbor<'a>,
    pub manipulated: Series,
    pub score: f64,
}

/// All swaps of one signal set, one per neighbor.
#[derive(Debug, Clone)]
pub struct SwapResult<'a> {
    pub signals: Vec<usize>,
    pub trials: Vec<SwapTrial<'a>>,
    /// Index of the trial with the lowest winner-class score (first on ties).
    pub best: usize,
}

impl<'a> SwapResult<'a> {
    pub fn best_trial(&self) -> &SwapTrial<'a> {
        &self.trials[self.best]
    }

    pub fn best_score(&self) -> f64 {
        self.trials[self.best].score
    }
}

/// Swaps column `signal` of the probed instance with each neighbor's column.
pub fn swap_signal<'a>(
    probe: &mut Probe<'_>,
    neighbors: &[Neighbor<'a>],
    signal: usize,
) -> Result<SwapResult<'a>> {
    swap_signals(probe, neighbors, &[signal])
}

/// Joint swap of every column in `signals`, all taken from the same neighbor.
pub fn swap_signals<'a>(
    probe: &mut Probe<'_>,
    neighbors: &[Neighbor<'a>],
    signals: &[usize],
) -> Result<SwapResult<'a>> {
    let v = probe.signals();
    if let Some(&s) = signals.iter().find(|&&s| s >= v) {
        return Err(Error::InvalidConfig(format!(
            "signal {s} out of range for V = {v}"
        )));
    }
    if neighbors.is_empty() {
        return Err(Error::InvalidConfig(
            "swap needs at least one neighbor".into(),
        ));
    }
    let last = probe.time_steps() - 1;
    let mut trials = Vec::with_capacity(neighbors.len());
    for n in neighbors {
        let (manipulated, score) = probe.score_splice(n.instance, signals, 0, last)?;
        trials.push(SwapTrial {
            neighbor: *n,
            manipulated,
            score,
        });
    }
    let best = trials.iter().enumerate().fold(0, |best, (i, t)| {
        if t.score < trials[best].score {
            i
        } else {
            best
        }
    });
    Ok(SwapResult {
        signals: signals.to_vec(),
        trials,
        best,
    })
}

/// Single-signal saliency.
///
/// Returns the salient signals (ascending) and the swap result of every signal,
/// indexed by signal. A signal is salient when its best swap drops the
/// winner-class score to `thr_c` or below.
pub fn detect_salient_signals<'a>(
    probe: &mut Probe<'_>,
    neighbors: &[Neighbor<'a>],
    thr_c: f64,
) -> Result<(Vec<usize>, Vec<SwapResult<'a>>)> {
    let results = (0..probe.signals())
        .map(|s| swap_signal(probe, neighbors, s))
        .collect::<Result<Vec<_>>>()?;
    let salient = results
        .iter()
        .enumerate()
        .filter(|(_, r)| probe.is_salient(r.best_score(), thr_c))
        .map(|(s, _)| s)
        .collect();
    Ok((salient, results))
}

/// Unordered pairs `(a, b)` with `a < b` of a signal set, lexicographic.
fn pairs_of(set: &[usize]) -> Vec<[usize; 2]> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            out.push([a, b]);
        }
    }
    out
}

/// Pair search order: pairs inside each correlated group (groups in declared
/// order), then pairs inside the non-correlated remainder.
pub fn dual_pair_order(
    groups: &[Vec<usize>],
    non_correlated: &[usize],
) -> (Vec<[usize; 2]>, Vec<[usize; 2]>) {
    (
        groups.iter().flat_map(|g| pairs_of(g)).collect(),
        pairs_of(non_correlated),
    )
}

/// Dual-signal saliency, used once single-signal swapping has failed.
///
/// Every pair within a correlated group is tried first; only if none of them
/// is salient are the pairs of the non-correlated set tried. Returns the
/// salient pairs' swap results in search order.
pub fn dual_signals<'a>(
    probe: &mut Probe<'_>,
    neighbors: &[Neighbor<'a>],
    thr_c: f64,
    groups: &[Vec<usize>],
    non_correlated: &[usize],
) -> Result<Vec<SwapResult<'a>>> {
    if probe.signals() < 2 {
        return Err(Error::DualSwapImpossible(format!(
            "V = {} leaves no signal pairs",
            probe.signals()
        )));
    }
    let (grouped, rest) = dual_pair_order(groups, non_correlated);
    for phase in [grouped, rest] {
        let mut salient = Vec::new();
        for pair in phase {
            let result = swap_signals(probe, neighbors, &pair)?;
            if probe.is_salient(result.best_score(), thr_c) {
                salient.push(result);
            }
        }
        if !salient.is_empty() {
            return Ok(salient);
        }
    }
    Ok(Vec::new())
}
