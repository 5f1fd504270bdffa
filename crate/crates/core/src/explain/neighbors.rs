//! Neighborhood scopes and neighbor sampling from the target classes.

use serde::{Deserialize, Serialize};

use super::config::SsetConfig;
use crate::data::{LabeledInstance, TimeSeriesInstance};
use crate::error::Result;
use crate::rng::RandomSource;
use crate::stats::euclidean_distance;

const SCOPE_EPSILON: f64 = 1e-9;

/// Closed distance annulus `[lo, hi]` around the instance being explained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    pub lo: f64,
    pub hi: f64,
}

impl Scope {
    pub fn contains(&self, distance: f64) -> bool {
        self.lo <= distance && distance <= self.hi
    }
}

/// The scope schedule `[k * delta, k * delta + l]` for `k = 0, 1, ...` while
/// the outer radius stays within `thr_n`.
pub fn scope_schedule(config: &SsetConfig) -> impl Iterator<Item = Scope> + '_ {
    (0usize..)
        .map(|k| {
            let lo = k as f64 * config.delta;
            Scope {
                lo,
                hi: lo + config.l,
            }
        })
        .take_while(|s| s.hi <= config.thr_n + SCOPE_EPSILON)
        .map(|s| Scope {
            lo: s.lo,
            hi: s.hi.min(config.thr_n),
        })
}

/// A training instance from a target class together with its distance to
/// the instance being explained.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub instance: &'a TimeSeriesInstance,
    pub label: usize,
    pub distance: f64,
}

/// Target-class training instances with precomputed distances, in training order.
#[derive(Debug, Clone)]
pub struct NeighborPool<'a> {
    candidates: Vec<Neighbor<'a>>,
}

impl<'a> NeighborPool<'a> {
    /// Keeps training instances whose label satisfies `is_target`.
    pub fn new(
        x: &TimeSeriesInstance,
        train: &'a [LabeledInstance],
        is_target: impl Fn(usize) -> bool,
    ) -> Result<Self> {
        let candidates = train
            .iter()
            .filter(|item| is_target(item.label))
            .map(|item| {
                Ok(Neighbor {
                    instance: &item.instance,
                    label: item.label,
                    distance: euclidean_distance(&x.values, &item.instance.values)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { candidates })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Up to `n` distinct candidates inside `scope`, drawn uniformly without
    /// replacement. Fewer (possibly none) when the scope is sparse.
    pub fn sample(&self, scope: Scope, n: usize, rng: &mut RandomSource) -> Vec<Neighbor<'a>> {
        let inside: Vec<&Neighbor<'a>> = self
            .candidates
            .iter()
            .filter(|c| scope.contains(c.distance))
            .collect();
        if inside.is_empty() {
            return Vec::new();
        }
        rng.sample_indices(inside.len(), n)
            .into_iter()
            .map(|i| *inside[i])
            .collect()
    }
}

/// Samples up to `n` training neighbors of `x` whose labels are in
/// `target_classes` and whose distance to `x` lies in `scope`.
pub fn sample_neighbors<'a>(
    x: &TimeSeriesInstance,
    train: &'a [LabeledInstance],
    target_classes: &[usize],
    scope: Scope,
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<Neighbor<'a>>> {
    let pool = NeighborPool::new(x, train, |label| target_classes.contains(&label))?;
    Ok(pool.sample(scope, n, rng))
}
