//! Knapsack center with a `(1 + 2eps)` budget violation.
//!
//! Heavy facilities (`wt ≥ eps·W`, positive) of the optimum are guessed as
//! `S₀`; clients connect greedily to nearby members of `S₀` and the rest is
//! solved over the light facilities with budget `W − wt(S₀)`.

use crate::error::{internal, invalid, Error, Result};
use crate::model::{ClusterInstance, ClusterSolution, FacilityConstraint, Knapsack, Norm};
use crate::search::{candidates_up_to, check_eps, driver_grid, first_true, ordered_search};
use crate::sparsify::{cluster_threshold_candidates, max_first_weight, sparsify_weights, ThresholdSequence};

use super::lp::{build_cluster_model, ClusterRows, FractionalCluster};
use super::round_cluster;
use super::solve::{finish, ordered_cluster_bound, ordered_dimension, topl_cluster_bound, ClusterOutcome};

/// Enumeration cap on the heavy-set guesses.
pub const MAX_PRESELECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackCertificate {
    /// Guessed heavy facilities `S₀`.
    pub preselected: Vec<usize>,
    pub r: f64,
    pub b: f64,
    /// `B` plus the residual rounding bound.
    pub bound: f64,
    /// Total weight of the opened multiset.
    pub weight: f64,
}

/// What remains after connecting clients to `S₀`.
struct Residual {
    pre: Vec<Vec<usize>>,
    /// `None` when no light facility exists and nothing remains to cover.
    inst: Option<ClusterInstance>,
}

struct Setup<'a> {
    inst: &'a ClusterInstance,
    norm: &'a Norm,
    ks: &'a Knapsack,
    light: Vec<usize>,
}

impl Setup<'_> {
    fn weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.ks.weights[i]).sum()
    }

    /// Greedy nearest-first connections to `S₀` within `radius` while the
    /// norm stays at most `b`, and the induced residual instance.
    fn residual(&self, s0: &[usize], radius: f64, b: f64) -> Result<Option<Residual>> {
        let inst = self.inst;
        let nc = inst.clients();
        let mut pre = Vec::with_capacity(nc);
        for j in 0..nc {
            let mut near: Vec<usize> = s0.iter().copied().filter(|&i| inst.d(i, j) <= radius).collect();
            near.sort_by(|&a, &c| inst.d(a, j).total_cmp(&inst.d(c, j)).then(a.cmp(&c)));
            let mut chosen: Vec<usize> = Vec::new();
            let mut vec: Vec<f64> = Vec::new();
            for i in near {
                if chosen.len() >= inst.upper()[j] {
                    break;
                }
                vec.push(inst.d(i, j));
                if self.norm.eval_unchecked(&vec) > b {
                    break;
                }
                chosen.push(i);
            }
            pre.push(chosen);
        }
        let nl = self.light.len();
        let done: usize = pre.iter().map(Vec::len).sum();
        let coverage = inst.coverage().saturating_sub(done);
        let lower: Vec<usize> = (0..nc).map(|j| inst.lower()[j].saturating_sub(pre[j].len())).collect();
        let upper: Vec<usize> = (0..nc).map(|j| (inst.upper()[j] - pre[j].len()).min(nl)).collect();
        if lower.iter().zip(&upper).any(|(l, u)| l > u) || coverage > upper.iter().sum::<usize>() {
            return Ok(None);
        }
        if nl == 0 {
            return Ok(Some(Residual { pre, inst: None }));
        }
        let n = nc + inst.facilities();
        let pts: Vec<usize> = (0..nc).chain(self.light.iter().map(|&i| nc + i)).collect();
        let metric = inst.metric();
        let dist = pts.iter().flat_map(|&a| pts.iter().map(move |&c| metric[a * n + c])).collect();
        let budget = (self.ks.budget - self.weight(s0)).max(0.0);
        let weights = self.light.iter().map(|&i| self.ks.weights[i]).collect();
        let sub = ClusterInstance::with_constraint(
            nc,
            nl,
            dist,
            FacilityConstraint::Knapsack(Knapsack { weights, budget }),
            coverage,
            lower,
            upper,
        )?;
        Ok(Some(Residual { pre, inst: Some(sub) }))
    }

    fn assemble(&self, s0: &[usize], res: &Residual, part: Option<&ClusterSolution>) -> ClusterSolution {
        let mut open = s0.to_vec();
        let mut connections = res.pre.clone();
        if let Some(p) = part {
            open.extend(p.open.iter().map(|&i| self.light[i]));
            for (c, extra) in connections.iter_mut().zip(&p.connections) {
                c.extend(extra.iter().map(|&i| self.light[i]));
            }
        }
        ClusterSolution::new(open, connections)
    }
}

/// Subsets of `heavy` of size at most `max_size` and weight at most `budget`,
/// by size then lexicographically.
fn preselections(heavy: &[usize], weights: &[f64], budget: f64, max_size: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_size.min(heavy.len()) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&last| heavy.iter().position(|&h| h == last).unwrap() + 1);
            for &h in &heavy[start..] {
                let mut t = s.clone();
                t.push(h);
                if t.iter().map(|&i| weights[i]).sum::<f64>() <= budget * (1.0 + 1e-12) {
                    next.push(t);
                }
            }
        }
        if out.len() + next.len() > MAX_PRESELECTIONS {
            return Err(Error::ResourceLimit(format!("more than {MAX_PRESELECTIONS} heavy-set guesses")));
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// A feasible fractional residual solution, or `Some(None)` when nothing is left to solve.
type ResidualLp = Option<Option<FractionalCluster>>;

fn solve_residual(res: &Residual, r: f64, rows: ClusterRows<'_>) -> Result<ResidualLp> {
    match &res.inst {
        None => Ok(Some(None)),
        Some(sub) => Ok(build_cluster_model(sub, r, rows, true).solve()?.map(Some)),
    }
}

/// Upper end for the B-grid precision; `eps` itself only sets the heavy
/// threshold and the budget violation.
pub const GRID_EPS: f64 = 0.1;

/// Knapsack center for either norm family. Locations may repeat in the
/// opened multiset, whose weight is at most `(1 + 2eps)·W`.
pub fn solve_knapsack_center(inst: &ClusterInstance, norm: &Norm, eps: f64) -> Result<ClusterOutcome<KnapsackCertificate>> {
    norm.validate()?;
    check_eps(eps)?;
    let FacilityConstraint::Knapsack(ks) = inst.constraint() else {
        return Err(invalid!("knapsack center needs a knapsack instance"));
    };
    let w = ks.budget;
    let heavy: Vec<usize> = (0..inst.facilities()).filter(|&i| ks.weights[i] > 0.0 && ks.weights[i] >= eps * w).collect();
    let light: Vec<usize> = (0..inst.facilities()).filter(|i| !heavy.contains(i)).collect();
    let setup = Setup { inst, norm, ks, light };
    let guesses = preselections(&heavy, &ks.weights, w, (1.0 / eps).floor() as usize)?;
    let cands = cluster_threshold_candidates(inst);

    // (S₀, residual, R, B, rounding bound, fractional residual)
    let found = match norm {
        Norm::TopLq { ell, q } => {
            let (ell, q) = (*ell, *q);
            let ell_root = (ell as f64).powf(1.0 / q);
            let hi = (ordered_dimension(inst) as f64).powf(1.0 / q) * cands.last().copied().unwrap_or(0.0);
            let grid = driver_grid(&cands, hi, eps.min(GRID_EPS) / (1.0 + 3.0 * 4f64.powf(1.0 / q)))?;
            // more pre-connections only relax the residual, so feasibility is monotone in B
            let dominating = |b: f64| -> Option<(f64, f64)> {
                Some((*candidates_up_to(&cands, b).last()?, *candidates_up_to(&cands, b / ell_root).last()?))
            };
            let accepts = |b: f64, s0: &[usize]| -> Result<Option<Residual>> {
                let Some((rmax, tmax)) = dominating(b) else { return Ok(None) };
                let Some(res) = setup.residual(s0, rmax, b)? else { return Ok(None) };
                let ok = solve_residual(&res, rmax, ClusterRows::Top { ell, q, b, t: tmax })?.is_some();
                Ok(ok.then_some(res))
            };
            let bidx = first_true(grid.len(), |k| {
                for s0 in &guesses {
                    if accepts(grid[k], s0)?.is_some() {
                        return Ok(true);
                    }
                }
                Ok(false)
            })?;
            let mut found = None;
            if let Some(bidx) = bidx {
                let b = grid[bidx];
                let (_, tmax) = dominating(b).unwrap();
                for s0 in &guesses {
                    let Some(res) = accepts(b, s0)? else { continue };
                    let rows = |t: f64| ClusterRows::Top { ell, q, b, t };
                    let rs = candidates_up_to(&cands, b);
                    let ridx = first_true(rs.len(), |k| Ok(solve_residual(&res, rs[k], rows(tmax))?.is_some()))?.unwrap();
                    let r = rs[ridx];
                    let ts = candidates_up_to(&cands, b / ell_root);
                    let tidx = first_true(ts.len(), |k| Ok(solve_residual(&res, r, rows(ts[k]))?.is_some()))?.unwrap();
                    let t = ts[tidx];
                    let frac = solve_residual(&res, r, rows(t))?.unwrap();
                    let bound = if res.inst.is_some() { b + topl_cluster_bound(ell, q, r, b, t) } else { b };
                    found = Some((s0.clone(), res, r, b, bound, frac));
                    break;
                }
            }
            found
        }
        Norm::MaxOrdered { weights } => {
            let n = ordered_dimension(inst);
            let sparse = sparsify_weights(weights, n)?;
            let wmax = max_first_weight(&sparse);
            let mut found = None;
            // zero-cost solutions first
            for (r, b) in [(0.0, 0.0), (cands.last().copied().unwrap_or(0.0), 0.0)] {
                if r > 0.0 && wmax > 0.0 {
                    continue;
                }
                for s0 in &guesses {
                    let Some(res) = setup.residual(s0, r, b)? else { continue };
                    if let Some(frac) = solve_residual(&res, r, ClusterRows::Basic)? {
                        found = Some((s0.clone(), res, r, 0.0, 0.0, frac));
                        break;
                    }
                }
                if found.is_some() {
                    break;
                }
            }
            if found.is_none() && wmax > 0.0 {
                let bound = |r: f64, b: f64, seq: &ThresholdSequence| b + ordered_cluster_bound(&sparse, r, b, seq);
                let mut best: Option<(f64, Vec<usize>, Residual, f64, f64, Option<FractionalCluster>)> = None;
                for s0 in &guesses {
                    let cap = best.as_ref().map(|b| b.0);
                    let anchors: Vec<f64> = cands.iter().copied().filter(|&r| r > 0.0).collect();
                    let hit = ordered_search(&anchors, n, wmax, eps.min(GRID_EPS), 19.0, bound, |r, b, seq| {
                        let Some(res) = setup.residual(s0, r, b)? else { return Ok(None) };
                        let rows = ClusterRows::Ordered { sparse: &sparse, b, seq };
                        Ok(solve_residual(&res, r, rows)?.map(|f| (res, f)))
                    })?;
                    if let Some(h) = hit {
                        if cap.map_or(true, |c| h.bound < c) {
                            let (res, frac) = h.item;
                            best = Some((h.bound, s0.clone(), res, h.r, h.b, frac));
                        }
                    }
                }
                found = best.map(|(bound, s0, res, r, b, frac)| (s0, res, r, b, bound, frac));
            }
            found
        }
    };
    let (s0, res, r, b, bound, frac) =
        found.ok_or_else(|| Error::Infeasible("no heavy-set guess admits a feasible residual instance".into()))?;
    let part = match (&res.inst, &frac) {
        (Some(sub), Some(f)) => Some(round_cluster(sub, f, r, None)?.solution),
        (None, None) => None,
        _ => return Err(internal!("residual instance and its solution disagree")),
    };
    let solution = setup.assemble(&s0, &res, part.as_ref());
    let weight = setup.weight(&solution.open);
    if weight > (1.0 + 2.0 * eps) * w * (1.0 + 1e-12) {
        return Err(internal!("opened weight {weight} exceeds (1 + 2eps)·W"));
    }
    let value = finish(inst, norm, solution.clone(), bound, 1.0 + 2.0 * eps)?;
    Ok(ClusterOutcome { solution, value, certificate: KnapsackCertificate { preselected: s0, r, b, bound, weight } })
}
