use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the swapping-sliding search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsetConfig {
    /// A manipulation is salient when the winner-class score falls to or below this.
    pub thr_c: f64,
    /// Upper bound on the outer radius of the neighborhood scope.
    pub thr_n: f64,
    /// Sampling attempts per scope.
    pub thr_a: usize,
    /// Scope width.
    pub l: f64,
    /// Shift applied to the scope after `thr_a` failed attempts.
    pub delta: f64,
    /// Initial scope offset of the pre-incremented loop form. Informational:
    /// the schedule always starts at `[0, l]`.
    pub start: f64,
    /// Neighbors drawn per attempt.
    pub n_neighbors: usize,
    /// Initial sliding context.
    pub ctx0: usize,
    /// Weight of the window-size term in the importance score.
    pub lambda: f64,
    /// Share of the current step's score given to the other steps of its window.
    pub alpha: f64,
    /// Largest sliding context; `None` means `floor(T / 2)`, the smallest
    /// context whose window can cover the whole series.
    pub ctx_max: Option<usize>,
}

impl Default for SsetConfig {
    fn default() -> Self {
        Self {
            thr_c: 0.5,
            thr_n: 8.0,
            thr_a: 10,
            l: 1.0,
            delta: 0.1,
            start: -1.0,
            n_neighbors: 10,
            ctx0: 1,
            lambda: 0.1,
            alpha: 0.9,
            ctx_max: None,
        }
    }
}

impl SsetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.thr_c > 0.0 && self.thr_c < 1.0) {
            return bad(format!("thr_c must lie in (0, 1), got {}", self.thr_c));
        }
        if !(self.delta > 0.0 && self.delta <= self.l && self.l <= self.thr_n) {
            return bad(format!(
                "need 0 < delta <= l <= thr_n, got delta = {}, l = {}, thr_n = {}",
                self.delta, self.l, self.thr_n
            ));
        }
        if !self.thr_n.is_finite() {
            return bad("thr_n must be finite".into());
        }
        if self.thr_a == 0 {
            return bad("thr_a must be at least 1".into());
        }
        if self.n_neighbors == 0 {
            return bad("n_neighbors must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.ctx0 == 0 {
            return bad("ctx0 must be at least 1".into());
        }
        Ok(())
    }

    pub fn effective_ctx_max(&self, time_steps: usize) -> usize {
        self.ctx_max.unwrap_or(time_steps / 2)
    }
}
