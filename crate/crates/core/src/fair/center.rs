use crate::cluster::{build_fair_cluster_lp, round_cluster};
use crate::error::{internal, Result};
use crate::lp::{Cmp, DualPoint, OracleAnswer, Sense};
use crate::model::{check_cluster_solution, ClusterSolution, FairClusterInstance, Norm};
use crate::search::candidates_up_to;
use crate::sparsify::cluster_threshold_candidates;

use super::{ct_connections, inflated, separate, top_params, FairProblem};

impl FairProblem for FairClusterInstance {
    type Solution = ClusterSolution;

    fn inflation(q: f64) -> f64 {
        3.0 * 4f64.powf(1.0 / q)
    }

    fn marginal(&self) -> Cmp {
        Cmp::Ge
    }

    fn demands(&self) -> &[f64] {
        &self.e
    }

    fn candidate(&self, ell: usize, q: f64, b: f64, alpha: &[f64]) -> Result<Option<ClusterSolution>> {
        let inst = &self.base;
        let cands = cluster_threshold_candidates(inst);
        let (Some(&r), Some(&t)) =
            (candidates_up_to(&cands, b).last(), candidates_up_to(&cands, b / (ell as f64).powf(1.0 / q)).last())
        else {
            return Ok(None);
        };
        let mut lp = build_fair_cluster_lp(inst, ell, q, r, b, t);
        lp.set_client_objective(Sense::Maximize, alpha);
        let Some(frac) = lp.solve()? else { return Ok(None) };
        let rounded = round_cluster(inst, &frac, r, Some(alpha))?;
        let mut open = rounded.solution.open;
        open.dedup();
        let norm = Norm::top(ell, q)?;
        let bound = inflated::<Self>(q, b);
        let connections = (0..inst.clients()).map(|j| ct_connections(inst, &norm, bound, j, &open)).collect();
        let sol = ClusterSolution::new(open, connections);
        for (j, c) in rounded.solution.connections.iter().enumerate() {
            if sol.connections[j].len() < c.len() {
                return Err(internal!("client {j}: greedy count below the rounded connection count"));
            }
        }
        Ok(Some(sol))
    }

    fn counts(&self, sol: &ClusterSolution) -> Vec<usize> {
        sol.connections.iter().map(Vec::len).collect()
    }

    fn certify(&self, norm: &Norm, bound: f64, sol: &ClusterSolution) -> Result<()> {
        let inst = &self.base;
        check_cluster_solution(inst, sol, 1.0)?;
        for j in 0..inst.clients() {
            let v = norm.eval(&sol.client_vector(inst, j))?;
            if v > bound {
                return Err(internal!("client {j} has connection cost {v} above {bound}"));
            }
            if ct_connections(inst, norm, bound, j, &sol.open).len() != sol.connections[j].len() {
                return Err(internal!("client {j} is not connected greedily"));
            }
        }
        Ok(())
    }

    fn grid_range(&self, norm: &Norm) -> (Vec<f64>, f64) {
        let inst = &self.base;
        let mut cands = vec![0.0];
        let pos = inst.metric().iter().copied().filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
        if pos.is_finite() {
            cands.push(pos);
        }
        let hi = (0..inst.clients())
            .map(|j| {
                let mut d: Vec<f64> = (0..inst.facilities()).map(|i| inst.d(i, j)).collect();
                d.sort_by(|a, b| b.total_cmp(a));
                d.truncate(inst.upper()[j]);
                norm.eval_unchecked(&d)
            })
            .fold(0.0, f64::max);
        (cands, hi)
    }

    fn solution_space(&self) -> usize {
        1usize.checked_shl(self.base.facilities() as u32).unwrap_or(usize::MAX)
    }
}

/// `Member` if the point lies in `Q_c(B)`, else an opening whose greedy
/// counts violate the point's constraint by at least `η`.
pub fn separation_center(
    point: &DualPoint,
    b: f64,
    inst: &FairClusterInstance,
    norm: &Norm,
) -> Result<OracleAnswer<ClusterSolution>> {
    top_params(norm)?;
    separate(inst, norm, b, point)
}
