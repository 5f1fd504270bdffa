//! Sliding stage: localize a salient swap in time.

use serde::{Deserialize, Serialize};

use super::probe::Probe;
use super::swap::SwapResult;
use crate::error::Result;

/// A window manipulation that drops the winner-class score to the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientSubsequence {
    pub signals: Vec<usize>,
    /// The "current" step the window is centered on.
    pub t_prime: usize,
    pub t_lo: usize,
    pub t_hi: usize,
    /// `t_hi - t_lo + 1`; smaller than `2 * context + 1` near the boundaries.
    pub window_size: usize,
    pub context: usize,
    /// Winner-class score of the manipulated instance.
    pub y_m_c: f64,
    /// `y_i_c - y_m_c`.
    pub drop: f64,
    pub neighbor_id: String,
    pub neighbor_distance: f64,
}

/// Window `[t' - ctx, t' + ctx]` clipped to `[0, T - 1]`.
pub fn window_bounds(t_prime: usize, ctx: usize, time_steps: usize) -> (usize, usize) {
    (
        t_prime.saturating_sub(ctx),
        (t_prime + ctx).min(time_steps - 1),
    )
}

/// Slides windows of growing context over the salient signal(s) of `swap`,
/// taking replacement values from its best neighbor.
///
/// Contexts run from `ctx0` to `ctx_max`; at each context every step `t'` is
/// tried. The first context with at least one salient window ends the search
/// and all of its salient windows are returned. Empty when no context up to
/// `ctx_max` succeeds.
pub fn slide(
    probe: &mut Probe<'_>,
    swap: &SwapResult<'_>,
    thr_c: f64,
    ctx0: usize,
    ctx_max: usize,
) -> Result<Vec<SalientSubsequence>> {
    let time_steps = probe.time_steps();
    let source = swap.best_trial().neighbor;
    let y_c = probe.y_c();
    for ctx in ctx0..=ctx_max {
        let mut found = Vec::new();
        for t_prime in 0..time_steps {
            let (lo, hi) = window_bounds(t_prime, ctx, time_steps);
            let (_, y_m_c) = probe.score_splice(source.instance, &swap.signals, lo, hi)?;
            if probe.is_salient(y_m_c, thr_c) {
                found.push(SalientSubsequence {
                    signals: swap.signals.clone(),
                    t_prime,
                    t_lo: lo,
                    t_hi: hi,
                    window_size: hi - lo + 1,
                    context: ctx,
                    y_m_c,
                    drop: y_c - y_m_c,
                    neighbor_id: source.instance.id.clone(),
                    neighbor_distance: source.distance,
                });
            }
        }
        if !found.is_empty() {
            return Ok(found);
        }
    }
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Series, TimeSeriesInstance};
    use crate::explain::neighbors::Neighbor;
    use crate::explain::swap::swap_signal;
    use crate::oracle::FnOracle;
    use ndarray::Array2;

    #[test]
    fn windows_clip_at_boundaries() {
        assert_eq!(window_bounds(0, 1, 5), (0, 1));
        assert_eq!(window_bounds(4, 1, 5), (3, 4));
        assert_eq!(window_bounds(2, 1, 5), (1, 3));
        assert_eq!(window_bounds(2, 9, 5), (0, 4));
    }

    #[test]
    fn full_width_window_reproduces_the_swap() {
        let x = TimeSeriesInstance::new("x", Array2::from_elem((6, 2), 0.8));
        let n = TimeSeriesInstance::new("n", Array2::from_elem((6, 2), 0.1));
        // Score falls with the number of replaced cells in signal 1.
        let oracle = FnOracle(|x: &Series| {
            let low = x.column(1).iter().filter(|&&v| v < 0.5).count() as f64;
            let p = 0.9 - 0.8 * low / 6.0;
            vec![p, 1.0 - p]
        });
        let mut probe = Probe::new(&x, &oracle, 2).unwrap();
        let nb = [Neighbor {
            instance: &n,
            label: 1,
            distance: 1.0,
        }];
        let swap = swap_signal(&mut probe, &nb, 1).unwrap();
        let subs = slide(&mut probe, &swap, swap.best_score(), 5, 5).unwrap();
        assert_eq!(subs.len(), 6);
        for s in &subs {
            assert_eq!((s.t_lo, s.t_hi), (0, 5));
            assert_eq!(s.y_m_c, swap.best_score());
        }
    }

    #[test]
    fn smallest_context_wins() {
        let x = TimeSeriesInstance::new("x", Array2::from_elem((10, 1), 0.8));
        let n = TimeSeriesInstance::new("n", Array2::from_elem((10, 1), 0.1));
        // Salient only when cells 3, 4 and 5 are all replaced.
        let oracle = FnOracle(|x: &Series| {
            if (3..=5).all(|t| x[[t, 0]] < 0.5) {
                vec![0.2, 0.8]
            } else {
                vec![0.9, 0.1]
            }
        });
        let mut probe = Probe::new(&x, &oracle, 2).unwrap();
        let nb = [Neighbor {
            instance: &n,
            label: 1,
            distance: 1.0,
        }];
        let swap = swap_signal(&mut probe, &nb, 0).unwrap();
        let subs = slide(&mut probe, &swap, 0.5, 1, 4).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(
            (subs[0].t_prime, subs[0].t_lo, subs[0].t_hi, subs[0].context),
            (4, 3, 5, 1)
        );
        assert!((subs[0].drop - 0.7).abs() < 1e-12);

        let subs = slide(&mut probe, &swap, 0.5, 2, 4).unwrap();
        let centers: Vec<usize> = subs.iter().map(|s| s.t_prime).collect();
        assert_eq!(centers, vec![3, 4, 5]);
        assert!(slide(&mut probe, &swap, 0.5, 1, 0).unwrap().is_empty());
    }
}
