//! Guessing drivers for Top(ℓ,q) and max-ordered k-center.

use crate::error::{internal, invalid, Error, Result};
use crate::search::{check_eps, driver_grid, first_true, ordered_search, top_guess_search};
use crate::model::{cluster_objective_unchecked, check_cluster_solution, ClusterInstance, ClusterSolution, FacilityConstraint, Norm};
use crate::sparsify::{
    cluster_threshold_candidates, gap_sum, max_first_weight, pos_set, sparsify_weights, ThresholdSequence,
};

use super::lp::{build_cluster_lp, build_cluster_model, build_ordered_cluster_lp, ClusterRows, FractionalCluster};
use super::round_cluster;

/// Accepted guess and the per-client bound `(2(3R)^q + 3^q(B^q + ℓT^q))^{1/q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCertificate {
    pub r: f64,
    pub b: f64,
    pub t: f64,
    pub bound: f64,
}

/// Accepted guess and the bound `2·max_n (3B + 6R w̃₁ + 3·Σ(w̃ℓ − w̃next)(ℓ−1)T_ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedClusterCertificate {
    pub r: f64,
    pub b: f64,
    pub pos: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome<C> {
    pub solution: ClusterSolution,
    pub value: f64,
    pub certificate: C,
}

pub fn topl_cluster_bound(ell: usize, q: f64, r: f64, b: f64, t: f64) -> f64 {
    (2.0 * (3.0 * r).powf(q) + 3f64.powf(q) * (b.powf(q) + ell as f64 * t.powf(q))).powf(1.0 / q)
}

pub fn ordered_cluster_bound(sparse: &[Vec<f64>], r: f64, b: f64, seq: &ThresholdSequence) -> f64 {
    let per_vector = sparse
        .iter()
        .map(|w| {
            let gap = gap_sum(std::slice::from_ref(w), seq, 1);
            3.0 * b + 6.0 * r * w.first().copied().unwrap_or(0.0) + 3.0 * gap
        })
        .fold(0.0, f64::max);
    2.0 * per_vector
}

/// Proof-chain ratio for ordered certificates against the optimum: `24 + 6eps + 12|POS|`.
pub fn ordered_cluster_ratio_bound(n: usize, eps: f64) -> f64 {
    let pos = pos_set(n.max(1)).map(|p| p.len()).unwrap_or(1);
    24.0 + 6.0 * eps + 12.0 * pos as f64
}

pub(crate) fn ordered_dimension(inst: &ClusterInstance) -> usize {
    inst.max_upper().max(1)
}

fn no_solution() -> Error {
    Error::Infeasible("no facility set meets the coverage and connection requirements".into())
}

pub(crate) fn finish(inst: &ClusterInstance, norm: &Norm, solution: ClusterSolution, bound: f64, slack: f64) -> Result<f64> {
    check_cluster_solution(inst, &solution, slack)?;
    let value = cluster_objective_unchecked(inst, norm, &solution);
    if value > bound * (1.0 + 1e-9) + 1e-12 {
        return Err(internal!("rounded value {value} exceeds its certificate {bound}"));
    }
    Ok(value)
}

pub(crate) fn top_kcenter_guess(
    inst: &ClusterInstance,
    ell: usize,
    q: f64,
    ratio_eps: f64,
) -> Result<Option<(f64, f64, f64, FractionalCluster)>> {
    let cands = cluster_threshold_candidates(inst);
    let hi = (ordered_dimension(inst) as f64).powf(1.0 / q) * cands.last().copied().unwrap_or(0.0);
    let grid = driver_grid(&cands, hi, ratio_eps)?;
    top_guess_search(&cands, &grid, (ell as f64).powf(1.0 / q), |r, b, t| build_cluster_lp(inst, ell, q, r, b, t).solve())
}

fn require_non_knapsack(inst: &ClusterInstance) -> Result<()> {
    if matches!(inst.constraint(), FacilityConstraint::Knapsack(_)) {
        return Err(invalid!("knapsack instances go through the knapsack center solver"));
    }
    Ok(())
}

/// Top(ℓ,q) k-center within factor `3·4^{1/q} + eps`.
pub fn solve_topl_kcenter(inst: &ClusterInstance, ell: usize, q: f64, eps: f64) -> Result<ClusterOutcome<ClusterCertificate>> {
    let norm = Norm::top(ell, q)?;
    check_eps(eps)?;
    require_non_knapsack(inst)?;
    let ratio = eps / (3.0 * 4f64.powf(1.0 / q));
    let (r, b, t, frac) = top_kcenter_guess(inst, ell, q, ratio)?.ok_or_else(no_solution)?;
    let rounded = round_cluster(inst, &frac, r, None)?;
    let bound = topl_cluster_bound(ell, q, r, b, t);
    let value = finish(inst, &norm, rounded.solution.clone(), bound, 1.0)?;
    Ok(ClusterOutcome { solution: rounded.solution, value, certificate: ClusterCertificate { r, b, t, bound } })
}

/// Max-ordered k-center with the logarithmic guarantee.
pub fn solve_ordered_kcenter(
    inst: &ClusterInstance,
    weights: &[Vec<f64>],
    eps: f64,
) -> Result<ClusterOutcome<OrderedClusterCertificate>> {
    let norm = Norm::max_ordered(weights.to_vec())?;
    check_eps(eps)?;
    require_non_knapsack(inst)?;
    let n = ordered_dimension(inst);
    let sparse = sparsify_weights(weights, n)?;
    let wmax = max_first_weight(&sparse);
    let pos = pos_set(n)?;
    let cands = cluster_threshold_candidates(inst);
    let basic = |r: f64| build_cluster_model(inst, r, ClusterRows::Basic, true).solve();
    let ridx = first_true(cands.len(), |k| Ok(basic(cands[k])?.is_some()))?.ok_or_else(no_solution)?;
    let rmin = cands[ridx];

    let (r, b, thresholds, bound, frac) = if rmin == 0.0 || wmax == 0.0 {
        (rmin, 0.0, vec![0.0; pos.len()], 0.0, basic(rmin)?.unwrap())
    } else {
        let best = ordered_search(
            &cands[ridx..],
            n,
            wmax,
            eps,
            18.0,
            |r, b, seq| ordered_cluster_bound(&sparse, r, b, seq),
            |r, b, seq| build_ordered_cluster_lp(inst, &sparse, r, b, seq).solve(),
        )?
        .ok_or_else(|| internal!("no ordered guess is feasible although the basic LP is"))?;
        (best.r, best.b, best.seq.values(), best.bound, best.item)
    };
    let rounded = round_cluster(inst, &frac, r, None)?;
    let value = finish(inst, &norm, rounded.solution.clone(), bound, 1.0)?;
    Ok(ClusterOutcome {
        solution: rounded.solution,
        value,
        certificate: OrderedClusterCertificate { r, b, pos: pos.members().to_vec(), thresholds, bound },
    })
}

/// Partition-matroid center for either norm family; the certificate is the proof bound.
pub fn solve_matroid_center(inst: &ClusterInstance, norm: &Norm, eps: f64) -> Result<ClusterOutcome<f64>> {
    if !matches!(inst.constraint(), FacilityConstraint::Partition(_)) {
        return Err(invalid!("matroid center needs a partition-matroid instance"));
    }
    match norm {
        Norm::TopLq { ell, q } => {
            let o = solve_topl_kcenter(inst, *ell, *q, eps)?;
            Ok(ClusterOutcome { solution: o.solution, value: o.value, certificate: o.certificate.bound })
        }
        Norm::MaxOrdered { weights } => {
            let o = solve_ordered_kcenter(inst, weights, eps)?;
            Ok(ClusterOutcome { solution: o.solution, value: o.value, certificate: o.certificate.bound })
        }
    }
}
