//! Guess enumeration shared by the drivers.

use crate::error::{internal, invalid, Result};
use crate::sparsify::{enumerate_b_grid, enumerate_threshold_sequences, ThresholdSequence};

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid!("eps must be positive and finite, got {eps}"));
    }
    Ok(())
}

/// Candidate values `≤ cap` (with a relative slack for grid round-off).
pub(crate) fn candidates_up_to(cands: &[f64], cap: f64) -> &[f64] {
    let k = cands.partition_point(|&c| c <= cap * (1.0 + 1e-12));
    &cands[..k]
}

/// Smallest index in `0..n` where the monotone predicate holds.
pub(crate) fn first_true(n: usize, mut pred: impl FnMut(usize) -> Result<bool>) -> Result<Option<usize>> {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok((lo < n).then_some(lo))
}

/// Ascending B grid: 0 when 0 is a candidate, then `lo·ratio^t` up to `hi`.
pub(crate) fn driver_grid(cands: &[f64], hi: f64, ratio_eps: f64) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    if cands.first() == Some(&0.0) {
        grid.push(0.0);
    }
    if let Some(&lo) = cands.iter().find(|&&c| c > 0.0) {
        grid.extend(enumerate_b_grid(lo, hi.max(lo), ratio_eps)?);
    }
    Ok(grid)
}

/// Smallest grid `B` for which the dominating pair (largest `R ≤ B`, largest
/// `T ≤ B/ℓ^{1/q}`) is feasible, then the smallest feasible `R`, then `T`.
pub(crate) fn top_guess_search<X>(
    cands: &[f64],
    grid: &[f64],
    ell_root: f64,
    mut feasible: impl FnMut(f64, f64, f64) -> Result<Option<X>>,
) -> Result<Option<(f64, f64, f64, X)>> {
    let dominating = |b: f64| -> Option<(f64, f64)> {
        let r = *candidates_up_to(cands, b).last()?;
        let t = *candidates_up_to(cands, b / ell_root).last()?;
        Some((r, t))
    };
    let Some(bidx) = first_true(grid.len(), |k| match dominating(grid[k]) {
        Some((r, t)) => Ok(feasible(r, grid[k], t)?.is_some()),
        None => Ok(false),
    })?
    else {
        return Ok(None);
    };
    let b = grid[bidx];
    let (_, tmax) = dominating(b).unwrap();
    let rs = candidates_up_to(cands, b);
    let ridx = first_true(rs.len(), |k| Ok(feasible(rs[k], b, tmax)?.is_some()))?
        .ok_or_else(|| internal!("dominating guess feasible but no R is"))?;
    let r = rs[ridx];
    let ts = candidates_up_to(cands, b / ell_root);
    let tidx = first_true(ts.len(), |k| Ok(feasible(r, b, ts[k])?.is_some()))?
        .ok_or_else(|| internal!("feasible R found but no T is"))?;
    let t = ts[tidx];
    let x = feasible(r, b, t)?.ok_or_else(|| internal!("accepted guess became infeasible"))?;
    Ok(Some((r, b, t, x)))
}

/// Search state of the ordered drivers: the best certificate so far.
pub(crate) struct OrderedBest<X> {
    pub bound: f64,
    pub r: f64,
    pub b: f64,
    pub seq: ThresholdSequence,
    pub item: X,
}

/// For each `R ≥ r_min` and threshold sequence, finds the smallest feasible
/// `B` on the `(1+eps)` grid over `[R·w̃max, n·R·w̃max]` and keeps the guess
/// with the smallest certificate. `floor` lower-bounds the certificate of
/// every guess with anchor `R` as a multiple of `R·w̃max`.
pub(crate) fn ordered_search<X>(
    anchors: &[f64],
    n: usize,
    wmax: f64,
    eps: f64,
    floor: f64,
    bound: impl Fn(f64, f64, &ThresholdSequence) -> f64,
    mut feasible: impl FnMut(f64, f64, &ThresholdSequence) -> Result<Option<X>>,
) -> Result<Option<OrderedBest<X>>> {
    let mut best: Option<OrderedBest<X>> = None;
    for &r in anchors.iter().filter(|&&r| r > 0.0) {
        if best.as_ref().is_some_and(|s| floor * r * wmax >= s.bound) {
            break;
        }
        let grid = enumerate_b_grid(r * wmax, n as f64 * r * wmax, eps)?;
        for seq in enumerate_threshold_sequences(r, n)? {
            if best.as_ref().is_some_and(|s| bound(r, grid[0], &seq) >= s.bound) {
                continue;
            }
            let Some(k) = first_true(grid.len(), |k| Ok(feasible(r, grid[k], &seq)?.is_some()))? else { continue };
            let b = grid[k];
            let cert = bound(r, b, &seq);
            if best.as_ref().is_some_and(|s| cert >= s.bound) {
                continue;
            }
            let item = feasible(r, b, &seq)?.ok_or_else(|| internal!("accepted ordered guess became infeasible"))?;
            best = Some(OrderedBest { bound: cert, r, b, seq, item });
        }
    }
    Ok(best)
}

