//! Guessing grids and weight-vector sparsification for ordered norms.

use crate::error::{invalid, Error, Result};
use crate::model::{check_weight_vector, ClusterInstance, LoadInstance};

/// Upper bound on the size of any geometric grid.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// `POS = {min(2^t, n) : t ≥ 0}` for a fixed dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pos {
    n: usize,
    members: Vec<usize>,
}

impl Pos {
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Members in ascending order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, ell: usize) -> bool {
        self.members.binary_search(&ell).is_ok()
    }

    /// Smallest member strictly greater than `ell`; `n + 1` past the end.
    pub fn next(&self, ell: usize) -> usize {
        match self.members.iter().find(|&&t| t > ell) {
            Some(&t) => t,
            None => self.n + 1,
        }
    }

    /// Largest member strictly smaller than `ell`; 0 before the start.
    pub fn prev(&self, ell: usize) -> usize {
        self.members.iter().rev().find(|&&t| t < ell).copied().unwrap_or(0)
    }
}

pub fn pos_set(n: usize) -> Result<Pos> {
    if n == 0 {
        return Err(invalid!("POS needs n >= 1"));
    }
    let mut members = Vec::new();
    let mut p = 1usize;
    while p < n {
        members.push(p);
        p *= 2;
    }
    members.push(n);
    Ok(Pos { n, members })
}

/// 1-based access into a zero-extended weight vector.
#[inline]
pub(crate) fn weight_at(w: &[f64], t: usize) -> f64 {
    if t == 0 {
        return f64::INFINITY;
    }
    w.get(t - 1).copied().unwrap_or(0.0)
}

/// Replaces `w_t` by `w_{next(t)}` for `t ∉ POS`; results have length `n`.
pub fn sparsify_weights(weights: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let pos = pos_set(n)?;
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            check_weight_vector(w).map_err(|e| invalid!("weight vector {k}: {e}"))?;
            Ok((1..=n)
                .map(|t| if pos.contains(t) { weight_at(w, t) } else { weight_at(w, pos.next(t)) })
                .collect())
        })
        .collect()
}

/// Coefficients `w̃_ℓ − w̃_{next(ℓ)}` for each `ℓ ∈ POS`, one row per vector.
pub fn telescoped_coefficients(sparse: &[Vec<f64>], pos: &Pos) -> Vec<Vec<f64>> {
    sparse
        .iter()
        .map(|w| {
            pos.members()
                .iter()
                .map(|&ell| (weight_at(w, ell) - weight_at(w, pos.next(ell))).max(0.0))
                .collect()
        })
        .collect()
}

/// Geometric grid `lo·(1+eps)^t`, extended until it reaches `hi`.
pub fn enumerate_b_grid(lo: f64, hi: f64, eps: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !lo.is_finite() {
        return Err(invalid!("grid lower end must be positive and finite, got {lo}"));
    }
    if !(hi >= lo) || !hi.is_finite() {
        return Err(invalid!("grid upper end {hi} must be finite and at least {lo}"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid!("grid ratio eps must be positive, got {eps}"));
    }
    let mut grid = vec![lo];
    let mut t = 0i32;
    while *grid.last().unwrap() < hi {
        t += 1;
        // powi from lo avoids drift from repeated multiplication
        let next = lo * (1.0 + eps).powi(t);
        if next <= *grid.last().unwrap() {
            return Err(invalid!("grid ratio eps={eps} too small to make progress"));
        }
        grid.push(next);
        if grid.len() > MAX_GRID_POINTS {
            return Err(Error::ResourceLimit(format!("B grid exceeds {MAX_GRID_POINTS} points")));
        }
    }
    Ok(grid)
}

/// Sorted distinct finite values plus 0.
pub fn threshold_candidates(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    v.push(0.0);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn load_threshold_candidates(inst: &LoadInstance) -> Vec<f64> {
    threshold_candidates(inst.processing_times().iter().copied())
}

/// Distinct facility-client distances plus 0.
pub fn cluster_threshold_candidates(inst: &ClusterInstance) -> Vec<f64> {
    threshold_candidates(
        (0..inst.facilities()).flat_map(|i| (0..inst.clients()).map(move |j| inst.d(i, j))),
    )
}

/// A non-increasing map `POS → {2^{-s}R ≥ R/n} ∪ {R/n}` with `T₁ = R`.
///
/// Entries are stored as level indices into the support, level 0 being `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSequence {
    r: f64,
    pos: Pos,
    support: Vec<f64>,
    levels: Vec<usize>,
}

impl ThresholdSequence {
    pub fn anchor(&self) -> f64 {
        self.r
    }

    pub fn pos(&self) -> &Pos {
        &self.pos
    }

    /// Value at the `k`-th member of POS.
    pub fn value_at(&self, k: usize) -> f64 {
        self.support[self.levels[k]]
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.levels.len()).map(|k| self.value_at(k)).collect()
    }

    /// `T_ℓ` for `ℓ ∈ POS`.
    pub fn get(&self, ell: usize) -> Option<f64> {
        self.pos.members().iter().position(|&t| t == ell).map(|k| self.value_at(k))
    }

    /// The sequence that rounds each target up to the next support point,
    /// or to `R/n` when the target lies below `R/n`. Targets are indexed
    /// like POS; they must be non-increasing and at most `R`.
    pub fn rounding_up(r: f64, n: usize, targets: &[f64]) -> Result<Self> {
        let pos = pos_set(n)?;
        if targets.len() != pos.len() {
            return Err(invalid!("need one target per POS member"));
        }
        let support = dyadic_support(r, n);
        let mut levels = Vec::with_capacity(targets.len());
        for (k, &t) in targets.iter().enumerate() {
            if t > r {
                return Err(invalid!("target {t} exceeds the anchor {r}"));
            }
            // deepest support point that still dominates t
            let lvl = support.iter().rposition(|&s| s >= t).unwrap_or(0);
            let lvl = if k == 0 { 0 } else { lvl };
            levels.push(lvl);
        }
        for k in 1..levels.len() {
            if levels[k] < levels[k - 1] {
                return Err(invalid!("targets must be non-increasing"));
            }
        }
        Ok(ThresholdSequence { r, pos, support, levels })
    }
}

/// Descending support `{2^{-s}R ≥ R/n} ∪ {R/n}`, deduplicated.
fn dyadic_support(r: f64, n: usize) -> Vec<f64> {
    let mut support = Vec::new();
    let mut s = 0u32;
    while s < 64 && (1u64 << s) as usize <= n {
        // division by a power of two is exact
        support.push(r / (1u64 << s) as f64);
        s += 1;
    }
    let floor = r / n as f64;
    if !n.is_power_of_two() {
        support.push(floor);
    }
    support
}

/// Lazy enumeration of every [`ThresholdSequence`] for anchor `R` and dimension `n`.
#[derive(Debug, Clone)]
pub struct ThresholdSequences {
    r: f64,
    pos: Pos,
    support: Vec<f64>,
    levels: Option<Vec<usize>>,
}

impl Iterator for ThresholdSequences {
    type Item = ThresholdSequence;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.levels.take()?;
        let top = self.support.len() - 1;
        let mut succ = current.clone();
        if let Some(k) = (1..succ.len()).rev().find(|&k| succ[k] < top) {
            let v = succ[k] + 1;
            for lvl in &mut succ[k..] {
                *lvl = v;
            }
            self.levels = Some(succ);
        }
        Some(ThresholdSequence {
            r: self.r,
            pos: self.pos.clone(),
            support: self.support.clone(),
            levels: current,
        })
    }
}

pub fn enumerate_threshold_sequences(r: f64, n: usize) -> Result<ThresholdSequences> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid!("threshold anchor must be positive and finite, got {r}"));
    }
    let pos = pos_set(n)?;
    let levels = vec![0; pos.len()];
    Ok(ThresholdSequences { r, support: dyadic_support(r, n), pos, levels: Some(levels) })
}

/// `max_n Σ_{ℓ∈POS} (w̃_ℓ − w̃_{next(ℓ)})·(ℓ − shift)·T_ℓ`.
pub(crate) fn gap_sum(sparse: &[Vec<f64>], seq: &ThresholdSequence, shift: usize) -> f64 {
    let pos = seq.pos();
    sparse
        .iter()
        .map(|w| {
            pos.members()
                .iter()
                .enumerate()
                .map(|(k, &ell)| {
                    let coef = (weight_at(w, ell) - weight_at(w, pos.next(ell))).max(0.0);
                    coef * ell.saturating_sub(shift) as f64 * seq.value_at(k)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn sparsified_gap_bound(sparse: &[Vec<f64>], seq: &ThresholdSequence) -> f64 {
    gap_sum(sparse, seq, 0)
}

/// `max_n w̃₁⁽ⁿ⁾`.
pub fn max_first_weight(weights: &[Vec<f64>]) -> f64 {
    weights.iter().map(|w| weight_at(w, 1)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Norm;
    use proptest::prelude::*;

    #[test]
    fn pos_examples() {
        assert_eq!(pos_set(5).unwrap().members(), &[1, 2, 4, 5]);
        let one = pos_set(1).unwrap();
        assert_eq!(one.members(), &[1]);
        assert_eq!(one.next(1), 2);
        assert_eq!(pos_set(8).unwrap().members(), &[1, 2, 4, 8]);
        let p = pos_set(5).unwrap();
        assert_eq!(p.next(2), 4);
        assert_eq!(p.next(5), 6);
        assert_eq!(p.prev(4), 2);
        assert_eq!(p.prev(1), 0);
        assert!(pos_set(0).is_err());
    }

    #[test]
    fn sparsify_examples() {
        let w = sparsify_weights(&[vec![4.0, 3.0, 2.0, 1.0, 0.5]], 5).unwrap();
        assert_eq!(w[0], vec![4.0, 3.0, 1.0, 1.0, 0.5]);
        let c = sparsify_weights(&[vec![2.0; 6]], 6).unwrap();
        assert_eq!(c[0], vec![2.0; 6]);
        assert!(sparsify_weights(&[vec![1.0, 2.0]], 2).is_err());
    }

    #[test]
    fn sparsify_pads_and_truncates() {
        let w = sparsify_weights(&[vec![3.0, 2.0]], 5).unwrap();
        assert_eq!(w[0], vec![3.0, 2.0, 0.0, 0.0, 0.0]);
        let w = sparsify_weights(&[vec![5.0, 4.0, 3.0, 2.0, 1.0]], 3).unwrap();
        assert_eq!(w[0], vec![5.0, 4.0, 3.0]);
    }

    #[test]
    fn grid_examples() {
        assert_eq!(enumerate_b_grid(1.0, 1.0, 0.3).unwrap(), vec![1.0]);
        assert_eq!(enumerate_b_grid(1.0, 4.0, 1.0).unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(enumerate_b_grid(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn candidate_examples() {
        let inst = LoadInstance::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(load_threshold_candidates(&inst), vec![0.0, 1.0, 2.0, 3.0]);
        let inst = LoadInstance::from_rows(&[vec![7.0; 3]]).unwrap();
        assert_eq!(load_threshold_candidates(&inst), vec![0.0, 7.0]);
    }

    #[test]
    fn sequence_examples() {
        let seqs: Vec<_> = enumerate_threshold_sequences(8.0, 2).unwrap().map(|s| s.values()).collect();
        assert_eq!(seqs, vec![vec![8.0, 8.0], vec![8.0, 4.0]]);
        let one: Vec<_> = enumerate_threshold_sequences(3.0, 1).unwrap().map(|s| s.values()).collect();
        assert_eq!(one, vec![vec![3.0]]);
    }

    #[test]
    fn sequences_are_valid_and_complete() {
        for n in 1..=9 {
            let seqs: Vec<_> = enumerate_threshold_sequences(1.0, n).unwrap().collect();
            let pos = pos_set(n).unwrap();
            let support = dyadic_support(1.0, n);
            // multisets of size |POS|-1 over the support
            let (a, b) = (pos.len() - 1, support.len() - 1);
            let expected = binomial(a + b, b);
            assert_eq!(seqs.len(), expected, "n={n}");
            for s in &seqs {
                let v = s.values();
                assert_eq!(v[0], 1.0);
                assert!(v.windows(2).all(|w| w[0] >= w[1]));
                assert!(v.iter().all(|x| *x >= 1.0 / n as f64));
            }
        }
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn rounding_up_matches_rule() {
        let s = ThresholdSequence::rounding_up(1.0, 6, &[1.0, 0.3, 0.1, 0.05]).unwrap();
        // support {1, 1/2, 1/4, 1/6}
        assert_eq!(s.values(), vec![1.0, 0.5, 1.0 / 6.0, 1.0 / 6.0]);
        let seqs: Vec<_> = enumerate_threshold_sequences(1.0, 6).unwrap().collect();
        assert!(seqs.contains(&s));
    }

    #[test]
    fn gap_bound_examples() {
        let s = enumerate_threshold_sequences(2.5, 4).unwrap().next().unwrap();
        assert_eq!(sparsified_gap_bound(&[vec![1.0, 0.0, 0.0, 0.0]], &s), 2.5);
        assert_eq!(sparsified_gap_bound(&[vec![0.0; 4]], &s), 0.0);
    }

    #[test]
    fn telescoping_reproduces_ordered_norm() {
        let pos = pos_set(6).unwrap();
        let w = sparsify_weights(&[vec![5.0, 3.0, 3.0, 2.0, 1.0, 0.5]], 6).unwrap();
        let coef = telescoped_coefficients(&w, &pos);
        let v = [4.0, 1.0, 3.0, 0.5, 2.0, 2.0];
        let f = Norm::max_ordered(w.clone()).unwrap().eval(&v).unwrap();
        let conic: f64 = pos
            .members()
            .iter()
            .zip(&coef[0])
            .map(|(&ell, c)| c * Norm::top(ell, 1.0).unwrap().eval(&v).unwrap())
            .sum();
        assert!((f - conic).abs() < 1e-12);
    }

    fn weight_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 1..8).prop_map(|mut w| {
            w.sort_by(|a, b| b.total_cmp(a));
            w
        })
    }

    proptest! {
        #[test]
        fn sandwich(w in weight_strategy(), v in prop::collection::vec(0.0f64..10.0, 1..8)) {
            let n = v.len().max(w.len());
            let sparse = sparsify_weights(&[w.clone()], n).unwrap();
            let f = Norm::max_ordered(vec![w]).unwrap().eval(&v).unwrap();
            let ft = Norm::max_ordered(sparse.clone()).unwrap().eval(&v).unwrap();
            prop_assert!(ft <= f * (1.0 + 1e-12));
            prop_assert!(f <= 2.0 * ft * (1.0 + 1e-12) + 1e-12);
            // piecewise constant between POS members
            let pos = pos_set(n).unwrap();
            for t in 1..=n {
                if !pos.contains(t) {
                    prop_assert_eq!(sparse[0][t - 1], weight_at(&sparse[0], pos.next(t)));
                }
            }
            prop_assert!(check_weight_vector(&sparse[0]).is_ok());
        }

        #[test]
        fn pos_is_logarithmic(n in 1usize..100_000) {
            let p = pos_set(n).unwrap();
            let bound = (n as f64).log2().ceil() as usize + 1;
            prop_assert!(p.len() <= bound);
        }

        #[test]
        fn grid_covers(lo in 0.01f64..10.0, span in 1.0f64..50.0, eps in 0.01f64..1.0, at in 0.0f64..1.0) {
            let hi = lo * span;
            let grid = enumerate_b_grid(lo, hi, eps).unwrap();
            let x = lo + at * (hi - lo);
            prop_assert!(grid.iter().any(|&b| x <= b && b < (1.0 + eps) * x * (1.0 + 1e-12)));
        }
    }
}
