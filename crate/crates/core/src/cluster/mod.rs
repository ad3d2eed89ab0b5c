//! Max-norm k-center: LP builders, facility splitting, bundling and drivers.

mod bundle;
mod knapsack;
mod lp;
mod solve;
mod split;

pub use bundle::{alg_bundle, check_bundle_invariants, check_bundle_radii, BundleRef, BundleStructure};
pub use knapsack::{solve_knapsack_center, KnapsackCertificate};
pub use lp::{
    build_cluster_lp, build_cluster_model, build_fair_cluster_lp, build_ordered_cluster_lp, ClusterLp, ClusterRows,
    FractionalCluster,
};
pub use solve::{
    ordered_cluster_bound, ordered_cluster_ratio_bound, solve_matroid_center, solve_ordered_kcenter, solve_topl_kcenter,
    topl_cluster_bound, ClusterCertificate, ClusterOutcome, OrderedClusterCertificate,
};
pub use split::{check_split, split_and_normalize, SplitSolution};

use crate::error::{internal, Result};
use crate::lp::{solve_knapsack_basic, solve_partition_matroid_integral, solve_two_laminar_integral};
use crate::model::{ClusterInstance, ClusterSolution, FacilityConstraint};

/// `Ŝ = {g(i) : z_i = 1}` and `Ŝ_j` = opened copies found in `queue_j`.
pub fn assemble_solution(inst: &ClusterInstance, z: &[u8], bundles: &BundleStructure, g: &[usize]) -> ClusterSolution {
    let open = (0..z.len()).filter(|&i| z[i] == 1).map(|i| g[i]).collect();
    let connections = bundles
        .queues
        .iter()
        .take(inst.clients())
        .map(|q| q.iter().flat_map(|&b| bundles.copies(b)).filter(|&&i| z[i] == 1).map(|&i| g[i]).collect())
        .collect();
    ClusterSolution::new(open, connections)
}

/// Opens every copy with `z_i > 0` (locations may repeat); each client
/// takes the nearest opened copy of every bundle in its queue.
pub fn assemble_multiset(inst: &ClusterInstance, z: &[f64], bundles: &BundleStructure, split: &SplitSolution) -> ClusterSolution {
    let open = (0..z.len()).filter(|&i| z[i] > 0.0).map(|i| split.g[i]).collect();
    let connections = bundles
        .queues
        .iter()
        .enumerate()
        .map(|(j, q)| {
            q.iter()
                .filter_map(|&b| {
                    bundles
                        .copies(b)
                        .iter()
                        .filter(|&&i| z[i] > 0.0)
                        .min_by(|&&a, &&c| split.dist(inst, a, j).total_cmp(&split.dist(inst, c, j)).then(a.cmp(&c)))
                        .map(|&i| split.g[i])
                })
                .collect()
        })
        .collect();
    ClusterSolution::new(open, connections)
}

/// A rounded fractional solution with the intermediate structures.
#[derive(Debug, Clone)]
pub struct Rounded {
    pub solution: ClusterSolution,
    pub split: SplitSolution,
    pub bundles: BundleStructure,
}

/// Split, bundle, solve the auxiliary problem and assemble.
///
/// `client_weights` turns the auxiliary objective into `Σ_j α_j |Ŝ_j|`
/// (unit weights by default). Bundle invariants, bundle radii and
/// `Σ_j α_j |Ŝ_j| ≥ Σ_j α_j u_j` are asserted.
pub fn round_cluster(
    inst: &ClusterInstance,
    frac: &FractionalCluster,
    r: f64,
    client_weights: Option<&[f64]>,
) -> Result<Rounded> {
    let mut split = split_and_normalize(inst, frac, r);
    check_split(inst, frac, &split, r)?;
    let bundles = alg_bundle(inst, &mut split)?;
    check_bundle_invariants(&split, &bundles)?;
    check_bundle_radii(inst, &split, &bundles, r)?;
    let alpha: Vec<f64> = client_weights.map_or_else(|| vec![1.0; inst.clients()], <[f64]>::to_vec);
    let mut profits = vec![0.0; bundles.partial.len()];
    for (j, q) in bundles.queues.iter().enumerate() {
        for b in q {
            if let BundleRef::Partial(k) = b {
                profits[*k] += alpha[j];
            }
        }
    }
    let solution = match inst.constraint() {
        FacilityConstraint::Cardinality(k) => {
            let z = solve_two_laminar_integral(&bundles, &profits, *k, &split.g, inst.facilities())?;
            assemble_solution(inst, &z, &bundles, &split.g)
        }
        FacilityConstraint::Partition(pm) => {
            let z = solve_partition_matroid_integral(&bundles, &profits, pm, &split.g, inst.facilities())?;
            assemble_solution(inst, &z, &bundles, &split.g)
        }
        FacilityConstraint::Knapsack(ks) => {
            let v = solve_knapsack_basic(&bundles, &profits, &ks.weights, ks.budget, &split.g)?;
            assemble_multiset(inst, &v.z, &bundles, &split)
        }
    };
    let got: f64 = solution.connections.iter().zip(&alpha).map(|(c, a)| c.len() as f64 * a).sum();
    let want: f64 = split.u.iter().zip(&alpha).map(|(u, a)| u * a).sum();
    if got < want - 1e-6 * want.max(1.0) {
        return Err(internal!("auxiliary optimum {got} below the fractional value {want}"));
    }
    Ok(Rounded { solution, split, bundles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Sense;

    fn grid_instance(k: usize, m: usize, l: usize, r: usize) -> ClusterInstance {
        let clients: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 0.3 * i as f64)).collect();
        let facilities: Vec<(f64, f64)> = (0..4).map(|i| (i as f64 + 0.5, 1.0)).collect();
        ClusterInstance::from_points(&clients, &facilities, FacilityConstraint::Cardinality(k), m, vec![l; 4], vec![r; 4])
            .unwrap()
    }

    #[test]
    fn singleton_full_bundles_open_once_each() {
        let inst = grid_instance(4, 4, 1, 1);
        let b = BundleStructure {
            full: vec![vec![0], vec![1]],
            partial: vec![],
            partial_count: vec![],
            queues: vec![vec![BundleRef::Full(0)], vec![BundleRef::Full(1)], vec![], vec![]],
        };
        let z = solve_two_laminar_integral(&b, &[], 2, &[0, 1], 4).unwrap();
        let s = assemble_solution(&inst, &z, &b, &[0, 1]);
        assert_eq!(s.open, vec![0, 1]);
        assert_eq!(s.connections[0], vec![0]);
    }

    #[test]
    fn closed_partials_leave_full_connections() {
        let inst = grid_instance(4, 0, 0, 2);
        let b = BundleStructure {
            full: vec![vec![0]],
            partial: vec![vec![1]],
            partial_count: vec![1],
            queues: vec![vec![BundleRef::Full(0), BundleRef::Partial(0)], vec![], vec![], vec![]],
        };
        let s = assemble_solution(&inst, &[1, 0], &b, &[0, 1]);
        assert_eq!(s.connections[0].len(), 1);
    }

    #[test]
    fn rounding_meets_coverage() {
        for (k, m, l, r) in [(2, 4, 1, 2), (3, 6, 1, 2), (4, 8, 2, 2), (1, 2, 0, 1)] {
            let inst = grid_instance(k, m, l, r);
            let mut lp = build_cluster_model(&inst, 10.0, ClusterRows::Basic, true);
            lp.set_client_objective(Sense::Maximize, &[1.0, 0.5, 0.25, 0.125]);
            let frac = lp.solve().unwrap().unwrap();
            let out = round_cluster(&inst, &frac, 10.0, None).unwrap();
            crate::model::check_cluster_solution(&inst, &out.solution, 1.0).unwrap();
        }
    }
}
