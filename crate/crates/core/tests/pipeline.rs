use maxnorm::cluster::{
    alg_bundle, build_cluster_model, check_bundle_invariants, check_bundle_radii, check_split, round_cluster,
    solve_topl_kcenter, split_and_normalize, ClusterRows,
};
use maxnorm::gen::{random_cluster, random_load, rng, ClusterParams, MetricKind};
use maxnorm::load::{build_topl_load_lp, shmoys_tardos_round, solve_topl_makespan};
use maxnorm::lp::Sense;
use maxnorm::oracle::assignment_profile;
use maxnorm::sparsify::{cluster_threshold_candidates, load_threshold_candidates};
use maxnorm::{check_cluster_solution, eval_cluster_objective, eval_load_objective, Norm};
use proptest::prelude::*;
use rand::Rng;

fn params(clients: usize, facilities: usize, k: usize, graph: bool) -> ClusterParams {
    let metric = if graph { MetricKind::RandomGraph } else { MetricKind::Euclidean };
    ClusterParams { clients, facilities, k, max_r: 3, metric }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_and_bundle_invariants(
        clients in 1usize..5, facilities in 1usize..6, k in 1usize..4, graph: bool, seed: u64,
    ) {
        let inst = random_cluster(&params(clients, facilities, k, graph), seed).unwrap();
        let mut g = rng(seed);
        let alpha: Vec<f64> = (0..clients).map(|_| g.gen::<f64>()).collect();
        for r in cluster_threshold_candidates(&inst) {
            let mut lp = build_cluster_model(&inst, r, ClusterRows::Basic, true);
            lp.set_client_objective(Sense::Maximize, &alpha);
            let Some(frac) = lp.solve().unwrap() else { continue };
            let mut split = split_and_normalize(&inst, &frac, r);
            check_split(&inst, &frac, &split, r).unwrap();
            prop_assert!(split.copies() <= facilities * (clients + 1));
            let b = alg_bundle(&inst, &mut split).unwrap();
            check_bundle_invariants(&split, &b).unwrap();
            check_bundle_radii(&inst, &split, &b, r).unwrap();
            let rounded = round_cluster(&inst, &frac, r, None).unwrap();
            check_cluster_solution(&inst, &rounded.solution, 1.0).unwrap();
            for j in 0..clients {
                for &i in &rounded.solution.connections[j] {
                    prop_assert!(inst.d(i, j) <= 3.0 * r * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn rounding_respects_the_guess(machines in 1usize..4, jobs in 1usize..7, seed: u64) {
        let inst = random_load(machines, jobs, 10, 0.2, seed).unwrap();
        let cands = load_threshold_candidates(&inst);
        let mut g = rng(seed);
        for _ in 0..4 {
            let r = cands[g.gen_range(0..cands.len())];
            let t = cands[g.gen_range(0..cands.len())].min(r);
            let b = r * g.gen_range(1..=jobs) as f64;
            let lp = build_topl_load_lp(&inst, 2, 1.0, r, b, t);
            let Some(x) = lp.solve().unwrap() else { continue };
            let a = shmoys_tardos_round(&inst, &x, None).unwrap();
            let (rmax, _) = assignment_profile(&inst, &a);
            prop_assert!(rmax <= r);
            let v = eval_load_objective(&inst, &Norm::top(2, 1.0).unwrap(), &a).unwrap();
            // (2R^q + B^q + ℓT^q)^{1/q} with q = 1
            prop_assert!(v <= (2.0 * r + b + 2.0 * t) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn solvers_meet_their_certificates(n in 1usize..5, m in 1usize..4, ell in 1usize..4, q in 1u8..4, seed: u64) {
        let q = q as f64;
        let norm = Norm::top(ell, q).unwrap();
        let load = random_load(m, n + 1, 10, 0.0, seed).unwrap();
        let out = solve_topl_makespan(&load, ell, q, 0.1).unwrap();
        prop_assert_eq!(eval_load_objective(&load, &norm, &out.assignment).unwrap(), out.value);
        prop_assert!(out.value <= out.certificate.bound);
        let inst = random_cluster(&params(n, m + 1, m, seed % 2 == 0), seed).unwrap();
        if let Ok(out) = solve_topl_kcenter(&inst, ell, q, 0.1) {
            check_cluster_solution(&inst, &out.solution, 1.0).unwrap();
            prop_assert!(eval_cluster_objective(&inst, &norm, &out.solution).unwrap() <= out.certificate.bound);
        }
    }
}
