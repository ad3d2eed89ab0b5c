//! Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::time::Instant;

use maxnorm::cluster::{
    alg_bundle, build_cluster_model, ordered_cluster_ratio_bound, FractionalCluster, solve_knapsack_center, solve_matroid_center, solve_ordered_kcenter,
    solve_topl_kcenter, split_and_normalize, BundleRef, BundleStructure, ClusterRows, SplitSolution,
};
use maxnorm::fair::{ct, solve_fair, FairProblem, SolutionDistribution};
use maxnorm::gen::{
    random_cluster, random_fair_cluster, random_fair_load, random_knapsack, random_load, random_ordered_weights,
    random_partition, rng, tightness_family, ClusterParams, MetricKind,
};
use maxnorm::load::{ordered_load_ratio_bound, solve_ordered_makespan, solve_topl_makespan};
use maxnorm::lp::{solve_lp, solve_partition_matroid_integral, solve_two_laminar_integral, Cmp, LpModel, LpStatus, Sense};
use maxnorm::oracle::{brute_force_kcenter, brute_force_makespan, fair_opt_center, fair_opt_load, DEFAULT_CAP};
use maxnorm::sparsify::{
    cluster_threshold_candidates, pos_set, sparsified_gap_bound, sparsify_weights, ThresholdSequence,
};
use maxnorm::{
    check_cluster_solution, eval_cluster_objective, eval_load_objective, ClusterInstance, Error, FacilityConstraint,
    FairClusterInstance, FairLoadInstance, LoadInstance, Norm,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

const EPS: f64 = 0.1;
const TOP_NORMS: [(usize, f64); 4] = [(1, 1.0), (2, 1.0), (2, 2.0), (3, 2.0)];
/// Round-off allowance when comparing float objective values against factor·OPT.
const FLOAT_TOL: f64 = 1e-9;

fn within(value: f64, factor: f64, opt: f64) -> bool {
    value <= factor * opt * (1.0 + FLOAT_TOL) + FLOAT_TOL * f64::EPSILON
}

fn ratio(value: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        if value == 0.0 { 1.0 } else { f64::INFINITY }
    } else {
        value / opt
    }
}

fn top(ell: usize, q: f64) -> Norm {
    Norm::top(ell, q).unwrap()
}

fn fold_max(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

fn collect<T>(results: Vec<Result<T, String>>) -> Result<Vec<T>, String> {
    results.into_iter().collect()
}

fn load_pool() -> Vec<LoadInstance> {
    (0..200u64)
        .map(|s| {
            let (m, j) = (1 + (s % 3) as usize, 1 + ((s / 3) % 6) as usize);
            random_load(m, j, 10, if s % 4 == 3 { 0.3 } else { 0.0 }, s).unwrap()
        })
        .collect()
}

fn cluster_params(s: u64) -> ClusterParams {
    let clients = 1 + (s % 4) as usize;
    let facilities = 1 + ((s / 4) % 5) as usize;
    let k = (1 + ((s / 20) % 3) as usize).min(facilities);
    let metric = if s % 2 == 0 { MetricKind::Euclidean } else { MetricKind::RandomGraph };
    ClusterParams { clients, facilities, k, max_r: 2, metric }
}

/// The first 200 seeds whose instance is feasible, plus the number of infeasible seeds
/// on which the solver agreed.
fn cluster_pool() -> (Vec<ClusterInstance>, usize) {
    let mut pool = Vec::new();
    let mut infeasible = 0;
    let mut s = 0u64;
    while pool.len() < 200 {
        let inst = random_cluster(&cluster_params(s), 1000 + s).unwrap();
        match brute_force_kcenter(&inst, &top(1, 1.0), DEFAULT_CAP) {
            Ok(_) => pool.push(inst),
            Err(Error::Infeasible(_)) => {
                assert!(matches!(solve_topl_kcenter(&inst, 1, 1.0, EPS), Err(Error::Infeasible(_))));
                infeasible += 1;
            }
            Err(e) => panic!("oracle failed: {e}"),
        }
        s += 1;
    }
    (pool, infeasible)
}

fn criterion_1() -> Outcome {
    let pool = load_pool();
    let worst = collect(
        pool.par_iter()
            .enumerate()
            .map(|(s, inst)| {
                let mut worst: f64 = 0.0;
                for (ell, q) in TOP_NORMS {
                    let norm = top(ell, q);
                    let opt = brute_force_makespan(inst, &norm, DEFAULT_CAP).map_err(|e| e.to_string())?.value;
                    let out = solve_topl_makespan(inst, ell, q, EPS).map_err(|e| format!("seed {s}: {e}"))?;
                    let value = eval_load_objective(inst, &norm, &out.assignment).map_err(|e| e.to_string())?;
                    let factor = 4f64.powf(1.0 / q) + EPS;
                    if value != out.value || !within(value, factor, opt) || value > out.certificate.bound {
                        return Err(format!("seed {s} Top({ell},{q}): value {value}, opt {opt}, bound {}", out.certificate.bound));
                    }
                    worst = worst.max(ratio(value, opt) / factor);
                }
                Ok(worst)
            })
            .collect(),
    )?;
    Ok(format!("{} instances x 4 norms, worst ratio/factor {:.3}", pool.len(), fold_max(worst.into_iter())))
}

fn criterion_2() -> Outcome {
    let (pool, infeasible) = cluster_pool();
    let worst = collect(
        pool.par_iter()
            .enumerate()
            .map(|(s, inst)| {
                let mut worst: f64 = 0.0;
                for (ell, q) in TOP_NORMS {
                    let norm = top(ell, q);
                    let opt = brute_force_kcenter(inst, &norm, DEFAULT_CAP).map_err(|e| e.to_string())?.value;
                    let out = solve_topl_kcenter(inst, ell, q, EPS).map_err(|e| format!("instance {s}: {e}"))?;
                    check_cluster_solution(inst, &out.solution, 1.0).map_err(|e| e.to_string())?;
                    let value = eval_cluster_objective(inst, &norm, &out.solution).map_err(|e| e.to_string())?;
                    let factor = 3.0 * 4f64.powf(1.0 / q) + EPS;
                    if !within(value, factor, opt) || value > out.certificate.bound {
                        return Err(format!("instance {s} Top({ell},{q}): value {value}, opt {opt}"));
                    }
                    worst = worst.max(ratio(value, opt) / factor);
                }
                Ok(worst)
            })
            .collect(),
    )?;
    Ok(format!(
        "{} feasible instances x 4 norms ({infeasible} infeasible seeds agreed), worst ratio/factor {:.3}",
        pool.len(),
        fold_max(worst.into_iter())
    ))
}

fn ceiling(n: usize) -> f64 {
    10.0 * (1.0 + (n as f64).log2())
}

fn criterion_3() -> Outcome {
    let loads = load_pool();
    let load_worst = collect(
        loads
            .par_iter()
            .enumerate()
            .map(|(s, inst)| {
                let weights = random_ordered_weights(1 + s % 3, 1 + (s / 3) % 6, 77 + s as u64);
                let norm = Norm::max_ordered(weights.clone()).unwrap();
                let opt = brute_force_makespan(inst, &norm, DEFAULT_CAP).map_err(|e| e.to_string())?.value;
                let out = solve_ordered_makespan(inst, &weights, EPS).map_err(|e| format!("load seed {s}: {e}"))?;
                let value = eval_load_objective(inst, &norm, &out.assignment).map_err(|e| e.to_string())?;
                let cert = out.certificate.bound;
                let n = inst.jobs();
                if value > cert || !within(cert, ordered_load_ratio_bound(n, EPS), opt) || !within(value, ceiling(n), opt) {
                    return Err(format!("load seed {s}: value {value}, certificate {cert}, opt {opt}"));
                }
                Ok(ratio(cert, opt) / ordered_load_ratio_bound(n, EPS))
            })
            .collect(),
    )?;
    let (clusters, _) = cluster_pool();
    let cluster_worst = collect(
        clusters
            .par_iter()
            .enumerate()
            .map(|(s, inst)| {
                let weights = random_ordered_weights(1 + s % 3, 1 + (s / 3) % 6, 99 + s as u64);
                let norm = Norm::max_ordered(weights.clone()).unwrap();
                let opt = brute_force_kcenter(inst, &norm, DEFAULT_CAP).map_err(|e| e.to_string())?.value;
                let out = solve_ordered_kcenter(inst, &weights, EPS).map_err(|e| format!("cluster {s}: {e}"))?;
                check_cluster_solution(inst, &out.solution, 1.0).map_err(|e| e.to_string())?;
                let value = eval_cluster_objective(inst, &norm, &out.solution).map_err(|e| e.to_string())?;
                let cert = out.certificate.bound;
                let n = inst.max_upper().max(1);
                if value > cert || !within(cert, ordered_cluster_ratio_bound(n, EPS), opt) || !within(value, ceiling(n), opt) {
                    return Err(format!("cluster {s}: value {value}, certificate {cert}, opt {opt}"));
                }
                Ok(ratio(cert, opt) / ordered_cluster_ratio_bound(n, EPS))
            })
            .collect(),
    )?;
    Ok(format!(
        "{} load + {} cluster instances, worst certificate/(chain bound x opt) {:.3} / {:.3}",
        loads.len(),
        clusters.len(),
        fold_max(load_worst.into_iter()),
        fold_max(cluster_worst.into_iter())
    ))
}

fn criterion_4() -> Outcome {
    let mut g = rng(4);
    let mut tight: f64 = 0.0;
    for k in 0..10_000 {
        let dim = g.gen_range(1..=16usize);
        let count = g.gen_range(1..=3usize);
        let weights: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let mut w: Vec<f64> = (0..dim).map(|_| g.gen::<f64>() * 5.0).collect();
                w.sort_by(|a, b| b.total_cmp(a));
                w
            })
            .collect();
        let v: Vec<f64> = (0..dim).map(|_| if g.gen_bool(0.2) { 0.0 } else { g.gen::<f64>() * 10.0 }).collect();
        let sparse = sparsify_weights(&weights, dim).map_err(|e| e.to_string())?;
        let f = Norm::max_ordered(weights).unwrap().eval(&v).unwrap();
        let ft = Norm::max_ordered(sparse).unwrap().eval(&v).unwrap();
        if !(ft <= f && f <= 2.0 * ft) {
            return Err(format!("pair {k}: f~ = {ft}, f = {f}"));
        }
        if ft > 0.0 {
            tight = tight.max(f / ft);
        }
    }
    Ok(format!("10000 pairs, largest f/f~ {tight:.4}"))
}

fn criterion_5() -> Outcome {
    let (mut prev, mut prev_exact) = (0.0, 0.0);
    let mut rows = Vec::new();
    for t in 2..=10u32 {
        let fam = tightness_family(t).map_err(|e| e.to_string())?;
        let n = fam.weights.len();
        let norm = Norm::max_ordered(vec![fam.weights.clone()]).unwrap();
        let opt = fold_max(fam.vectors.iter().map(|v| norm.eval(v).unwrap()));
        let sparse = sparsify_weights(&[fam.weights.clone()], n).map_err(|e| e.to_string())?;
        let pos = pos_set(n).map_err(|e| e.to_string())?;
        // T*_ℓ = 1/√ℓ is the ℓ-th entry of v^(ℓ)
        let targets: Vec<f64> = pos.members().iter().map(|&l| 1.0 / (l as f64).sqrt()).collect();
        let seq = ThresholdSequence::rounding_up(1.0, n, &targets).map_err(|e| e.to_string())?;
        let r = sparsified_gap_bound(&sparse, &seq) / opt;
        // the same sum at the unrounded thresholds 1/√ℓ
        let exact: f64 = pos
            .members()
            .iter()
            .map(|&l| {
                let next = if l == n { 0.0 } else { sparse[0][pos.next(l) - 1] };
                (sparse[0][l - 1] - next) * (l as f64).sqrt()
            })
            .sum::<f64>()
            / opt;
        // equal mathematical values may differ in the last bits
        if r < prev * (1.0 - FLOAT_TOL) || exact <= prev_exact || r < 0.14 * t as f64 {
            return Err(format!("t = {t}: gap/opt = {r} (previous {prev}), unrounded {exact} (previous {prev_exact})"));
        }
        rows.push(format!("{r:.2}/{exact:.2}"));
        prev = r;
        prev_exact = exact;
    }
    Ok(format!("gap/opt (rounded/unrounded thresholds) for t=2..10: {}", rows.join(" ")))
}

fn basic_vertex(inst: &ClusterInstance, r: f64, alpha: &[f64]) -> Option<FractionalCluster> {
    let mut lp = build_cluster_model(inst, r, ClusterRows::Basic, true);
    lp.set_client_objective(Sense::Maximize, alpha);
    lp.solve().unwrap()
}

/// Random convex combinations of two basic-LP vertices at the same radius,
/// kept only when some opening is fractional.
fn fractional_pool(count: usize, constraint: fn(&ClusterInstance, u64) -> ClusterInstance) -> Vec<(ClusterInstance, f64, SplitSolution)> {
    (0..)
        .map(|s: u64| {
            let p = ClusterParams {
                clients: 2 + (s % 4) as usize,
                facilities: 2 + ((s / 4) % 5) as usize,
                k: 1 + ((s / 3) % 3) as usize,
                max_r: 3,
                metric: if s % 3 == 0 { MetricKind::RandomGraph } else { MetricKind::Euclidean },
            };
            let inst = constraint(&random_cluster(&p, 5000 + s).unwrap(), s);
            let mut g = rng(s);
            let mut alpha = || (0..inst.clients()).map(|_| g.gen::<f64>() - 0.3).collect::<Vec<f64>>();
            let (a1, a2) = (alpha(), alpha());
            let feasible: Vec<f64> =
                cluster_threshold_candidates(&inst).into_iter().filter(|&r| basic_vertex(&inst, r, &a1).is_some()).collect();
            if feasible.is_empty() {
                return None;
            }
            let r = feasible[g.gen_range(0..feasible.len())];
            let (v, w) = (basic_vertex(&inst, r, &a1)?, basic_vertex(&inst, r, &a2)?);
            let lam = g.gen_range(1..=7) as f64 / 8.0;
            let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect::<Vec<f64>>();
            let frac = FractionalCluster { clients: v.clients, facilities: v.facilities, x: mix(&v.x, &w.x), u: mix(&v.u, &w.u), y: mix(&v.y, &w.y) };
            if frac.y.iter().all(|&y| y == 0.0 || y == 1.0) {
                return None;
            }
            let split = split_and_normalize(&inst, &frac, r);
            Some((inst, r, split))
        })
        .flatten()
        .take(count)
        .collect()
}

fn cardinality(inst: &ClusterInstance, _: u64) -> ClusterInstance {
    inst.clone()
}

fn partition(inst: &ClusterInstance, s: u64) -> ClusterInstance {
    random_partition(inst, 2, s).unwrap()
}

const UNIT_TOL: f64 = 1e-7;

/// `d_max` of the `t`-th unit volume of the nearest-first support.
fn unit_radius(inst: &ClusterInstance, split: &SplitSolution, j: usize, t: usize) -> Option<f64> {
    let mut acc = 0.0;
    for &c in &split.support[j] {
        acc += split.y[c];
        if acc >= t as f64 - UNIT_TOL {
            return Some(inst.d(split.g[c], j));
        }
    }
    None
}

fn criterion_6() -> Outcome {
    let pool = fractional_pool(520, cardinality);
    let mut checked = 0usize;
    for (n, (inst, r, split)) in pool.iter().enumerate() {
        let before = split.clone();
        let mut split = split.clone();
        let b = alg_bundle(inst, &mut split).map_err(|e| format!("solution {n}: {e}"))?;
        for j in 0..inst.clients() {
            let u = split.u[j];
            let lo = (u + UNIT_TOL).floor() as usize;
            let hi = (u - UNIT_TOL).ceil() as usize;
            if b.queues[j].len() != hi {
                return Err(format!("solution {n} client {j}: queue {} for u = {u}", b.queues[j].len()));
            }
            for (t, &bref) in b.queues[j].iter().enumerate() {
                let du = fold_max(b.copies(bref).iter().map(|&c| inst.d(split.g[c], j)));
                let limit = if t < lo {
                    3.0 * unit_radius(inst, &before, j, t + 1).ok_or("missing unit volume")?
                } else {
                    3.0 * r
                };
                if du > limit {
                    return Err(format!("solution {n} client {j} bundle {}: {du} > {limit}", t + 1));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{} fractional LP solutions, {checked} bundle radii", pool.len()))
}

fn ones(bundles: &BundleStructure, z: &[u8], queue: &[BundleRef]) -> usize {
    queue.iter().filter(|&&b| bundles.copies(b).iter().any(|&c| z[c] == 1)).count()
}

/// Exhaustive 0/1 optimum of the auxiliary system.
fn exhaustive_aux(inst: &ClusterInstance, split: &SplitSolution, b: &BundleStructure, profits: &[f64]) -> Option<f64> {
    let n = split.copies();
    let mut best: Option<f64> = None;
    'mask: for mask in 0u32..(1 << n) {
        let z: Vec<u8> = (0..n).map(|c| (mask >> c & 1) as u8).collect();
        let mut per_orig = vec![0usize; inst.facilities()];
        for c in 0..n {
            per_orig[split.g[c]] += z[c] as usize;
        }
        if per_orig.iter().any(|&v| v > 1) {
            continue;
        }
        let open: Vec<usize> = (0..inst.facilities()).filter(|&i| per_orig[i] == 1).collect();
        if !inst.constraint_satisfied(&open, 1.0) {
            continue;
        }
        let sum = |u: &[usize]| u.iter().map(|&c| z[c] as usize).sum::<usize>();
        for u in &b.full {
            if sum(u) != 1 {
                continue 'mask;
            }
        }
        let mut obj = 0.0;
        for (u, p) in b.partial.iter().zip(profits) {
            match sum(u) {
                0 => {}
                1 => obj += p,
                _ => continue 'mask,
            }
        }
        // copies outside every bundle stay closed
        let owned: usize = b.full.iter().chain(&b.partial).map(|u| sum(u)).sum();
        if owned != z.iter().map(|&v| v as usize).sum::<usize>() {
            continue;
        }
        best = Some(best.map_or(obj, |x: f64| x.max(obj)));
    }
    best
}

/// LP relaxation optimum of the auxiliary system.
fn relaxed_aux(inst: &ClusterInstance, split: &SplitSolution, b: &BundleStructure, profits: &[f64]) -> Option<f64> {
    let mut lp = LpModel::new();
    let z: Vec<usize> = (0..split.copies()).map(|c| lp.add_var(format!("z{c}"), Some(0.0), Some(1.0))).collect();
    let owned: std::collections::HashSet<usize> = b.full.iter().chain(&b.partial).flatten().copied().collect();
    for c in 0..split.copies() {
        if !owned.contains(&c) {
            lp.add_row(format!("closed{c}"), vec![(z[c], 1.0)], Cmp::Eq, 0.0);
        }
    }
    for (k, u) in b.full.iter().enumerate() {
        lp.add_row(format!("full{k}"), u.iter().map(|&c| (z[c], 1.0)).collect(), Cmp::Eq, 1.0);
    }
    for (k, u) in b.partial.iter().enumerate() {
        lp.add_row(format!("part{k}"), u.iter().map(|&c| (z[c], 1.0)).collect(), Cmp::Le, 1.0);
    }
    for i in 0..inst.facilities() {
        let coefs: Vec<_> = (0..split.copies()).filter(|&c| split.g[c] == i).map(|c| (z[c], 1.0)).collect();
        if !coefs.is_empty() {
            lp.add_row(format!("fac{i}"), coefs, Cmp::Le, 1.0);
        }
    }
    match inst.constraint() {
        FacilityConstraint::Cardinality(k) => lp.add_row("card", z.iter().map(|&v| (v, 1.0)).collect(), Cmp::Le, *k as f64),
        FacilityConstraint::Partition(pm) => {
            for (p, (part, cap)) in pm.parts().iter().zip(pm.capacities()).enumerate() {
                let coefs: Vec<_> = (0..split.copies()).filter(|&c| part.contains(&split.g[c])).map(|c| (z[c], 1.0)).collect();
                lp.add_row(format!("matroid{p}"), coefs, Cmp::Le, *cap as f64);
            }
        }
        FacilityConstraint::Knapsack(_) => unreachable!(),
    }
    let zr = &z;
    let obj = b.partial.iter().zip(profits).flat_map(|(u, &p)| u.iter().map(move |&c| (zr[c], p))).collect();
    lp.set_objective(Sense::Maximize, obj);
    let sol = solve_lp(&lp).unwrap();
    (sol.status == LpStatus::Optimal).then(|| b.partial.iter().zip(profits).map(|(u, p)| p * u.iter().map(|&c| sol.values[z[c]]).sum::<f64>()).sum())
}

fn criterion_7() -> Outcome {
    let mut solves = 0;
    let mut exhaustive = 0;
    for (kind, pool) in [("cardinality", fractional_pool(300, cardinality)), ("partition", fractional_pool(200, partition))] {
        for (n, (inst, _, split)) in pool.into_iter().enumerate() {
            let mut split = split;
            let b = alg_bundle(&inst, &mut split).map_err(|e| e.to_string())?;
            let mut profits = vec![0.0; b.partial.len()];
            for q in &b.queues {
                for bref in q {
                    if let BundleRef::Partial(k) = bref {
                        profits[*k] += 1.0;
                    }
                }
            }
            let z = match inst.constraint() {
                FacilityConstraint::Cardinality(k) => solve_two_laminar_integral(&b, &profits, *k, &split.g, inst.facilities()),
                FacilityConstraint::Partition(pm) => solve_partition_matroid_integral(&b, &profits, pm, &split.g, inst.facilities()),
                FacilityConstraint::Knapsack(_) => unreachable!(),
            }
            .map_err(|e| format!("{kind} {n}: {e}"))?;
            solves += 1;
            if z.iter().any(|&v| v > 1) {
                return Err(format!("{kind} {n}: non-binary z"));
            }
            let covered: usize = b.queues.iter().map(|q| ones(&b, &z, q)).sum();
            if covered < inst.coverage() {
                return Err(format!("{kind} {n}: objective {covered} below m = {}", inst.coverage()));
            }
            let got: f64 = b.partial.iter().zip(&profits).filter(|(u, _)| u.iter().any(|&c| z[c] == 1)).map(|(_, p)| p).sum();
            let relaxed = relaxed_aux(&inst, &split, &b, &profits).ok_or(format!("{kind} {n}: relaxation infeasible"))?;
            if (relaxed - got).abs() > 1e-6 {
                return Err(format!("{kind} {n}: flow {got} vs LP relaxation {relaxed}"));
            }
            if split.copies() <= 12 {
                let best = exhaustive_aux(&inst, &split, &b, &profits).ok_or(format!("{kind} {n}: no 0/1 point"))?;
                if best != got {
                    return Err(format!("{kind} {n}: flow {got} vs exhaustive {best}"));
                }
                exhaustive += 1;
            }
        }
    }
    Ok(format!("{solves} integral solves match their LP relaxations, {exhaustive} also checked exhaustively"))
}

fn criterion_8() -> Outcome {
    let pool: Vec<(u64, ClusterInstance)> =
        (0..60u64).map(|s| (s, random_knapsack(&random_cluster(&cluster_params(s), 7000 + s).unwrap(), s).unwrap())).collect();
    let stats = collect(
        pool.par_iter()
            .map(|(s, inst)| {
                let FacilityConstraint::Knapsack(ks) = inst.constraint() else { unreachable!() };
                let mut worst: f64 = 0.0;
                let mut runs = 0;
                for eps in [0.25, 0.5] {
                    for (ell, q) in TOP_NORMS {
                        let norm = top(ell, q);
                        let opt = match brute_force_kcenter(inst, &norm, DEFAULT_CAP) {
                            Ok(o) => Some(o.value),
                            Err(Error::Infeasible(_)) => None,
                            Err(e) => return Err(e.to_string()),
                        };
                        let out = match solve_knapsack_center(inst, &norm, eps) {
                            Ok(o) => o,
                            Err(Error::Infeasible(_)) if opt.is_none() => continue,
                            Err(e) => return Err(format!("seed {s} eps {eps}: {e}")),
                        };
                        runs += 1;
                        let weight: f64 = out.solution.open.iter().map(|&i| ks.weights[i]).sum();
                        if weight > (1.0 + 2.0 * eps) * ks.budget {
                            return Err(format!("seed {s} eps {eps}: weight {weight} > (1+2eps)W, W = {}", ks.budget));
                        }
                        check_cluster_solution(inst, &out.solution, 1.0 + 2.0 * eps).map_err(|e| e.to_string())?;
                        if let Some(opt) = opt {
                            let value = eval_cluster_objective(inst, &norm, &out.solution).map_err(|e| e.to_string())?;
                            let factor = 1.0 + 3.0 * 4f64.powf(1.0 / q) + EPS;
                            if !within(value, factor, opt) {
                                return Err(format!("seed {s} eps {eps} Top({ell},{q}): value {value}, opt {opt}"));
                            }
                            worst = worst.max(ratio(value, opt) / factor);
                        }
                    }
                }
                Ok((runs, worst))
            })
            .collect(),
    )?;
    let runs: usize = stats.iter().map(|s| s.0).sum();
    Ok(format!("{runs} runs, worst ratio/factor {:.3}", fold_max(stats.into_iter().map(|s| s.1))))
}

fn criterion_9() -> Outcome {
    let pool: Vec<(u64, ClusterInstance)> = (0..400u64)
        .filter_map(|s| {
            let p = cluster_params(s);
            let inst = random_partition(&random_cluster(&p, 9000 + s).unwrap(), 1 + (s % 3) as usize, s).unwrap();
            brute_force_kcenter(&inst, &top(1, 1.0), DEFAULT_CAP).is_ok().then_some((s, inst))
        })
        .take(120)
        .collect();
    let worst = collect(
        pool.par_iter()
            .map(|(s, inst)| {
                let FacilityConstraint::Partition(pm) = inst.constraint() else { unreachable!() };
                let mut worst: f64 = 0.0;
                let weights = random_ordered_weights(1 + (*s as usize) % 3, 3, *s);
                let mut norms: Vec<(Norm, f64)> = TOP_NORMS.iter().map(|&(l, q)| (top(l, q), 3.0 * 4f64.powf(1.0 / q) + EPS)).collect();
                norms.push((Norm::max_ordered(weights).unwrap(), ordered_cluster_ratio_bound(inst.max_upper().max(1), EPS)));
                for (norm, factor) in norms {
                    let opt = brute_force_kcenter(inst, &norm, DEFAULT_CAP).map_err(|e| e.to_string())?.value;
                    let out = solve_matroid_center(inst, &norm, EPS).map_err(|e| format!("seed {s}: {e}"))?;
                    if !pm.is_independent(&out.solution.open) {
                        return Err(format!("seed {s}: dependent opening {:?}", out.solution.open));
                    }
                    check_cluster_solution(inst, &out.solution, 1.0).map_err(|e| e.to_string())?;
                    let value = eval_cluster_objective(inst, &norm, &out.solution).map_err(|e| e.to_string())?;
                    // ordered norms: the certificate carries the chain bound, the value is below it
                    let bounded = if norm.is_top() { value } else { out.certificate };
                    if value > out.certificate || !within(bounded, factor, opt) {
                        return Err(format!("seed {s}: value {value}, certificate {}, opt {opt}", out.certificate));
                    }
                    worst = worst.max(ratio(bounded, opt) / factor);
                }
                Ok(worst)
            })
            .collect(),
    )?;
    Ok(format!("{} partition instances x 5 norms, worst ratio/factor {:.3}", pool.len(), fold_max(worst.into_iter())))
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn criterion_10(dists: &mut Vec<Vec<f64>>) -> Outcome {
    let toy = FairLoadInstance::new(LoadInstance::from_rows(&[vec![1.0], vec![1.0]]).unwrap(), vec![0.5, 0.5]).unwrap();
    let out = solve_fair(&toy, &top(1, 1.0), EPS, None).map_err(|e| e.to_string())?;
    if out.b != 1.0 || out.distribution.lambda() != [half(), half()] {
        return Err(format!("toy: B = {}, lambda = {:?}", out.b, out.distribution.lambda()));
    }
    dists.push(out.distribution.probabilities());
    let pool: Vec<(u64, FairLoadInstance)> = (0..50u64)
        .map(|s| (s, random_fair_load(1 + (s % 3) as usize, 1 + ((s / 3) % 4) as usize, 10, 300 + s).unwrap()))
        .collect();
    let results = collect(
        pool.par_iter()
            .map(|(s, inst)| {
                let (ell, q) = TOP_NORMS[*s as usize % 4];
                let norm = top(ell, q);
                let fopt = fair_opt_load(inst, &norm, DEFAULT_CAP);
                let out = match (solve_fair(inst, &norm, EPS, None), fopt) {
                    (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => return Ok(None),
                    (Ok(o), Ok(f)) => (o, f.b),
                    (a, b) => return Err(format!("seed {s}: solver {:?} vs oracle {:?}", a.map(|o| o.b), b.map(|o| o.b))),
                };
                let (o, fair_opt) = out;
                let bound = FairLoadInstance::inflation(q) * o.b;
                for sigma in o.distribution.support() {
                    let v = eval_load_objective(&inst.base, &norm, sigma).map_err(|e| e.to_string())?;
                    if !within(v, FairLoadInstance::inflation(q), o.b) {
                        return Err(format!("seed {s}: support value {v} above {bound}"));
                    }
                }
                let marg = o.distribution.expectation(|a| a.counts(inst.base.machines()));
                for (i, m) in marg.iter().enumerate() {
                    if *m > rat(inst.e[i]) {
                        return Err(format!("seed {s}: machine {i} expects {m} > {}", inst.e[i]));
                    }
                }
                let factor = FairLoadInstance::inflation(q) + EPS;
                if !within(o.b, factor, fair_opt) {
                    return Err(format!("seed {s}: B = {} vs fair optimum {fair_opt}", o.b));
                }
                Ok(Some((ratio(o.b, fair_opt) / factor, o.distribution.probabilities())))
            })
            .collect(),
    )?;
    let solved: Vec<_> = results.into_iter().flatten().collect();
    let feasible = solved.len();
    let worst = fold_max(solved.iter().map(|r| r.0));
    dists.extend(solved.into_iter().map(|r| r.1).filter(|p| p.len() > 1).take(2));
    Ok(format!("toy exact; {feasible} of {} instances fair-feasible, worst B/(factor x fair-OPT) {worst:.3}", pool.len()))
}

fn criterion_11(dists: &mut Vec<Vec<f64>>) -> Outcome {
    let pool: Vec<(u64, FairClusterInstance)> = (0..50u64)
        .map(|s| {
            let mut p = cluster_params(s);
            p.clients = p.clients.min(3);
            (s, random_fair_cluster(&p, 400 + s).unwrap())
        })
        .collect();
    let results = collect(
        pool.par_iter()
            .map(|(s, inst)| {
                let (ell, q) = TOP_NORMS[*s as usize % 4];
                let norm = top(ell, q);
                let (o, fair_opt) = match (solve_fair(inst, &norm, EPS, None), fair_opt_center(inst, &norm, DEFAULT_CAP)) {
                    (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => return Ok(None),
                    (Ok(o), Ok(f)) => (o, f.b),
                    (a, b) => return Err(format!("seed {s}: solver {:?} vs oracle {:?}", a.map(|o| o.b), b.map(|o| o.b))),
                };
                let base = &inst.base;
                let bound = FairClusterInstance::inflation(q) * o.b * (1.0 + FLOAT_TOL);
                for sol in o.distribution.support() {
                    if sol.open.len() > inst.k() {
                        return Err(format!("seed {s}: {} facilities open, k = {}", sol.open.len(), inst.k()));
                    }
                    for j in 0..base.clients() {
                        let c = ct(base, &norm, bound, j, &sol.open);
                        if c != sol.connections[j].len() || c < base.lower()[j] || c > base.upper()[j] {
                            return Err(format!("seed {s} client {j}: ct {c}, |S_j| {}", sol.connections[j].len()));
                        }
                    }
                }
                let marg = o.distribution.expectation(|sol| (0..base.clients()).map(|j| ct(base, &norm, bound, j, &sol.open)).collect());
                for (j, m) in marg.iter().enumerate() {
                    if *m < rat(inst.e[j]) {
                        return Err(format!("seed {s}: client {j} expects {m} < {}", inst.e[j]));
                    }
                }
                let factor = FairClusterInstance::inflation(q) + EPS;
                if !within(o.b, factor, fair_opt) {
                    return Err(format!("seed {s}: B = {} vs fair optimum {fair_opt}", o.b));
                }
                Ok(Some((ratio(o.b, fair_opt) / factor, o.distribution.probabilities())))
            })
            .collect(),
    )?;
    let solved: Vec<_> = results.into_iter().flatten().collect();
    let feasible = solved.len();
    let worst = fold_max(solved.iter().map(|r| r.0));
    dists.extend(solved.into_iter().map(|r| r.1).filter(|p| p.len() > 1).take(2));
    Ok(format!("{feasible} of {} instances fair-feasible, worst B/(factor x fair-OPT) {worst:.3}", pool.len()))
}

fn criterion_12(dists: &[Vec<f64>]) -> Outcome {
    const N: usize = 10_000;
    let mut checked = 0;
    for (k, p) in dists.iter().enumerate() {
        let lambda: Vec<BigRational> = p.iter().map(|&x| rat(x)).collect();
        let total: BigRational = lambda.iter().sum();
        let lambda: Vec<BigRational> = lambda.into_iter().map(|l| l / &total).collect();
        let d = SolutionDistribution::new((0..p.len()).collect::<Vec<_>>(), lambda).map_err(|e| e.to_string())?;
        let draws = d.sample_indices(1234 + k as u64, N);
        if draws != d.sample_indices(1234 + k as u64, N) {
            return Err(format!("distribution {k}: draws differ under a fixed seed"));
        }
        for (i, &pi) in d.probabilities().iter().enumerate() {
            let hits = draws.iter().filter(|&&x| x == i).count() as f64;
            let sigma = (N as f64 * pi * (1.0 - pi)).sqrt();
            if (hits - N as f64 * pi).abs() > 3.0 * sigma {
                return Err(format!("distribution {k} element {i}: {hits} hits, expected {}", N as f64 * pi));
            }
            checked += 1;
        }
    }
    Ok(format!("{} distributions, {checked} support elements within 3 sigma, draws reproducible", dists.len()))
}

fn main() {
    let mut dists: Vec<Vec<f64>> = Vec::new();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} [{name}]: {tag}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
    };
    report(1, "load approximation", &mut criterion_1);
    report(2, "cluster approximation", &mut criterion_2);
    report(3, "ordered certificates", &mut criterion_3);
    report(4, "sparsification sandwich", &mut criterion_4);
    report(5, "tightness family", &mut criterion_5);
    report(6, "bundle radii", &mut criterion_6);
    report(7, "auxiliary integrality", &mut criterion_7);
    report(8, "knapsack variant", &mut criterion_8);
    report(9, "matroid variant", &mut criterion_9);
    report(10, "fair load", &mut || criterion_10(&mut dists));
    report(11, "fair center", &mut || criterion_11(&mut dists));
    report(12, "sampling", &mut || criterion_12(&dists));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
