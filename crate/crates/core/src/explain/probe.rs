use std::collections::HashMap;

use crate::data::{Series, TimeSeriesInstance};
use crate::error::Result;
use crate::oracle::{predict_checked, predict_winner, PredictionOracle};

/// A copy of `base` whose cells `[lo..=hi] x signals` come from `source`.
pub fn splice(base: &Series, source: &Series, signals: &[usize], lo: usize, hi: usize) -> Series {
    let mut out = base.clone();
    for t in lo..=hi {
        for &s in signals {
            out[[t, s]] = source[[t, s]];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SpliceKey {
    neighbor: String,
    signals: Vec<usize>,
    lo: usize,
    hi: usize,
}

/// Scores manipulations of one instance at its winner class.
///
/// A manipulation is identified by (neighbor id, signals, window); the oracle
/// is pure, so each distinct manipulation is sent to it once.
pub struct Probe<'a> {
    instance: &'a TimeSeriesInstance,
    oracle: &'a dyn PredictionOracle,
    classes: usize,
    class: usize,
    y_c: f64,
    cache: HashMap<SpliceKey, f64>,
    calls: usize,
}

impl<'a> Probe<'a> {
    /// Predicts the winner class of `instance`.
    pub fn new(
        instance: &'a TimeSeriesInstance,
        oracle: &'a dyn PredictionOracle,
        classes: usize,
    ) -> Result<Self> {
        let (class, y_c) = predict_winner(oracle, &instance.values, classes)?;
        Ok(Self::for_class(instance, oracle, classes, class, y_c))
    }

    /// A probe for a known winner class `class` with score `y_c`.
    pub fn for_class(
        instance: &'a TimeSeriesInstance,
        oracle: &'a dyn PredictionOracle,
        classes: usize,
        class: usize,
        y_c: f64,
    ) -> Self {
        Self {
            instance,
            oracle,
            classes,
            class,
            y_c,
            cache: HashMap::new(),
            calls: 1,
        }
    }

    pub fn instance(&self) -> &'a TimeSeriesInstance {
        self.instance
    }

    pub fn class(&self) -> usize {
        self.class
    }

    /// Winner-class score of the unmodified instance.
    pub fn y_c(&self) -> f64 {
        self.y_c
    }

    pub fn time_steps(&self) -> usize {
        self.instance.time_steps()
    }

    pub fn signals(&self) -> usize {
        self.instance.signals()
    }

    /// Number of oracle calls issued so far, the initial prediction included.
    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Winner-class score of an arbitrary series.
    pub fn score(&mut self, values: &Series) -> Result<f64> {
        self.calls += 1;
        Ok(predict_checked(self.oracle, values, self.classes)?[self.class])
    }

    /// Winner-class score of the instance with `[lo..=hi] x signals` taken from `source`.
    pub fn score_splice(
        &mut self,
        source: &TimeSeriesInstance,
        signals: &[usize],
        lo: usize,
        hi: usize,
    ) -> Result<(Series, f64)> {
        let manipulated = splice(&self.instance.values, &source.values, signals, lo, hi);
        let key = SpliceKey {
            neighbor: source.id.clone(),
            signals: signals.to_vec(),
            lo,
            hi,
        };
        if let Some(&score) = self.cache.get(&key) {
            return Ok((manipulated, score));
        }
        let score = self.score(&manipulated)?;
        self.cache.insert(key, score);
        Ok((manipulated, score))
    }

    /// Whether a manipulated score counts as a salient drop: at or below
    /// `thr_c` and strictly below the original winner score.
    pub fn is_salient(&self, score: f64, thr_c: f64) -> bool {
        score <= thr_c && score < self.y_c
    }
}
