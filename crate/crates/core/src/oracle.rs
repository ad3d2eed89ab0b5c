//! Exhaustive exact solvers used as ground truth.

use crate::error::{invalid, Error, Result};
use crate::fair::{ct, ct_connections, solve_support_primal, SolutionDistribution};
use crate::lp::Cmp;
use crate::model::{
    eval_load_objective, Assignment, ClusterInstance, ClusterSolution, FairClusterInstance,
    FairLoadInstance, LoadInstance, Norm,
};

/// Default bound on the number of enumerated solutions.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MakespanOptimum {
    pub assignment: Assignment,
    pub value: f64,
    /// Largest job size in the optimum.
    pub r: f64,
    /// `t_star[ℓ-1]` = max over machines of the `ℓ`-th largest job size (0 if absent).
    pub t_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KCenterOptimum {
    pub solution: ClusterSolution,
    pub value: f64,
}

fn check_cap(count: Option<usize>, cap: usize, what: &str) -> Result<()> {
    match count {
        Some(c) if c <= cap => Ok(()),
        _ => Err(Error::ResourceLimit(format!("{what} exceeds the enumeration cap {cap}"))),
    }
}

/// Calls `visit` on every assignment of jobs to allowed machines.
fn for_each_assignment(inst: &LoadInstance, cap: usize, mut visit: impl FnMut(&Assignment)) -> Result<()> {
    let (m, n) = (inst.machines(), inst.jobs());
    check_cap(m.checked_pow(n as u32), cap, "assignment space")?;
    let allowed: Vec<Vec<usize>> = (0..n).map(|j| (0..m).filter(|&i| inst.allowed(i, j)).collect()).collect();
    let mut idx = vec![0usize; n];
    loop {
        let a = Assignment::new((0..n).map(|j| allowed[j][idx[j]]).collect());
        visit(&a);
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < allowed[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            return Ok(());
        }
    }
}

/// `T*_ℓ` and the largest job size of an assignment.
pub fn assignment_profile(inst: &LoadInstance, a: &Assignment) -> (f64, Vec<f64>) {
    let mut t_star = vec![0.0; inst.jobs()];
    for i in 0..inst.machines() {
        let mut v = inst.machine_vector(a, i);
        v.sort_by(|x, y| y.total_cmp(x));
        for (l, x) in v.into_iter().enumerate() {
            t_star[l] = f64::max(t_star[l], x);
        }
    }
    (t_star[0], t_star)
}

/// Exact optimum by enumerating all `M^|J|` assignments (first optimum in
/// lexicographic order on job 0 fastest).
pub fn brute_force_makespan(inst: &LoadInstance, norm: &Norm, cap: usize) -> Result<MakespanOptimum> {
    norm.validate()?;
    let mut best: Option<(f64, Assignment)> = None;
    for_each_assignment(inst, cap, |a| {
        let v = (0..inst.machines()).map(|i| norm.eval_unchecked(&inst.machine_vector(a, i))).fold(0.0, f64::max);
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, a.clone()));
        }
    })?;
    let (value, assignment) = best.ok_or_else(|| invalid!("instance has no assignment"))?;
    let (r, t_star) = assignment_profile(inst, &assignment);
    Ok(MakespanOptimum { assignment, value, r, t_star })
}

/// Opened sets allowed by the facility constraint (distinct facilities).
pub fn feasible_openings(inst: &ClusterInstance, cap: usize) -> Result<Vec<Vec<usize>>> {
    let f = inst.facilities();
    check_cap(1usize.checked_shl(f as u32), cap, "facility subset space")?;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << f) {
        let set: Vec<usize> = (0..f).filter(|&i| mask >> i & 1 == 1).collect();
        if inst.constraint_satisfied(&set, 1.0) {
            out.push(set);
        }
    }
    Ok(out)
}

/// Best connections for a fixed opening: the smallest achievable max client
/// norm subject to `|S_j| ∈ [l_j, r_j]` and `Σ|S_j| ≥ m`.
pub fn best_connections(inst: &ClusterInstance, norm: &Norm, open: &[usize]) -> Option<(f64, ClusterSolution)> {
    let nc = inst.clients();
    // prefix[j][c] = norm of the c nearest open facilities
    let mut order = Vec::with_capacity(nc);
    let mut prefix = Vec::with_capacity(nc);
    for j in 0..nc {
        let mut o = open.to_vec();
        o.sort_by(|&a, &b| inst.d(a, j).total_cmp(&inst.d(b, j)).then(a.cmp(&b)));
        let top = inst.upper()[j].min(o.len());
        if inst.lower()[j] > top {
            return None;
        }
        let p: Vec<f64> = (0..=top).map(|c| norm.eval_unchecked(&o[..c].iter().map(|&i| inst.d(i, j)).collect::<Vec<_>>())).collect();
        order.push(o);
        prefix.push(p);
    }
    let mut values: Vec<f64> = (0..nc).flat_map(|j| prefix[j][inst.lower()[j]..].to_vec()).collect();
    values.push(0.0);
    values.sort_by(f64::total_cmp);
    values.dedup();
    for v in values {
        let mut counts = Vec::with_capacity(nc);
        for j in 0..nc {
            let c = prefix[j].iter().rposition(|&x| x <= v).filter(|&c| c >= inst.lower()[j]);
            match c {
                Some(c) => counts.push(c),
                None => break,
            }
        }
        if counts.len() == nc && counts.iter().sum::<usize>() >= inst.coverage() {
            let conns = (0..nc).map(|j| order[j][..counts[j]].to_vec()).collect();
            let sol = ClusterSolution::new(open.to_vec(), conns);
            let value = (0..nc).map(|j| prefix[j][counts[j]]).fold(0.0, f64::max);
            return Some((value, sol));
        }
    }
    None
}

/// Exact optimum over every facility set the constraint allows.
pub fn brute_force_kcenter(inst: &ClusterInstance, norm: &Norm, cap: usize) -> Result<KCenterOptimum> {
    norm.validate()?;
    let mut best: Option<KCenterOptimum> = None;
    for open in feasible_openings(inst, cap)? {
        if let Some((value, solution)) = best_connections(inst, norm, &open) {
            if best.as_ref().map_or(true, |b| value < b.value) {
                best = Some(KCenterOptimum { solution, value });
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no facility set admits valid connections".into()))
}

fn distribution_over<T: Clone>(support: &[T], counts: &[Vec<usize>], e: &[f64], cmp: Cmp) -> Result<Option<SolutionDistribution<T>>> {
    if support.is_empty() {
        return Ok(None);
    }
    let Some(lambda) = solve_support_primal(counts, e, cmp)? else { return Ok(None) };
    let (s, l): (Vec<T>, Vec<_>) =
        support.iter().cloned().zip(lambda).filter(|(_, l)| !num_traits::Zero::is_zero(l)).unzip();
    SolutionDistribution::new(s, l).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairOptimum<T> {
    pub b: f64,
    pub distribution: SolutionDistribution<T>,
}

/// Distribution over `E_l(B)` meeting the caps, if one exists.
pub fn brute_force_fair_load(
    inst: &FairLoadInstance,
    norm: &Norm,
    b: f64,
    cap: usize,
) -> Result<Option<SolutionDistribution<Assignment>>> {
    let mut support = Vec::new();
    for_each_assignment(&inst.base, cap, |a| {
        if eval_load_objective(&inst.base, norm, a).is_ok_and(|v| v <= b) {
            support.push(a.clone());
        }
    })?;
    let counts: Vec<Vec<usize>> = support.iter().map(|a| a.counts(inst.base.machines())).collect();
    distribution_over(&support, &counts, &inst.e, Cmp::Le)
}

/// Smallest achievable `B` admitting a fair distribution.
pub fn fair_opt_load(inst: &FairLoadInstance, norm: &Norm, cap: usize) -> Result<FairOptimum<Assignment>> {
    let mut values = Vec::new();
    for_each_assignment(&inst.base, cap, |a| values.push(eval_load_objective(&inst.base, norm, a).unwrap_or(f64::INFINITY)))?;
    fair_opt_scan(values, |b| brute_force_fair_load(inst, norm, b, cap))
}

/// Openings with `|S| ≤ k` and `ct_B(j, S) ≥ l_j`, connected greedily.
pub fn fair_center_family(inst: &FairClusterInstance, norm: &Norm, b: f64, cap: usize) -> Result<Vec<ClusterSolution>> {
    let base = &inst.base;
    let mut out = Vec::new();
    for open in feasible_openings(base, cap)? {
        let conns: Vec<Vec<usize>> = (0..base.clients()).map(|j| ct_connections(base, norm, b, j, &open)).collect();
        if conns.iter().zip(base.lower()).all(|(c, &l)| c.len() >= l) {
            out.push(ClusterSolution::new(open, conns));
        }
    }
    Ok(out)
}

/// Distribution over `E_c(B)` meeting the demands, if one exists.
pub fn brute_force_fair_center(
    inst: &FairClusterInstance,
    norm: &Norm,
    b: f64,
    cap: usize,
) -> Result<Option<SolutionDistribution<ClusterSolution>>> {
    let support = fair_center_family(inst, norm, b, cap)?;
    let counts: Vec<Vec<usize>> = support.iter().map(|s| s.connections.iter().map(Vec::len).collect()).collect();
    distribution_over(&support, &counts, &inst.e, Cmp::Ge)
}

/// Smallest `B` among the greedy prefix norms admitting a fair distribution.
pub fn fair_opt_center(inst: &FairClusterInstance, norm: &Norm, cap: usize) -> Result<FairOptimum<ClusterSolution>> {
    let base = &inst.base;
    let mut values = vec![0.0];
    for open in feasible_openings(base, cap)? {
        for j in 0..base.clients() {
            let full = ct(base, norm, f64::INFINITY, j, &open);
            let conns = ct_connections(base, norm, f64::INFINITY, j, &open);
            for c in 1..=full {
                values.push(norm.eval_unchecked(&conns[..c].iter().map(|&i| base.d(i, j)).collect::<Vec<_>>()));
            }
        }
    }
    fair_opt_scan(values, |b| brute_force_fair_center(inst, norm, b, cap))
}

/// Binary search over sorted candidate values; feasibility is monotone in `B`.
fn fair_opt_scan<T>(
    mut values: Vec<f64>,
    mut feasible: impl FnMut(f64) -> Result<Option<SolutionDistribution<T>>>,
) -> Result<FairOptimum<T>> {
    values.retain(|v| v.is_finite());
    values.sort_by(f64::total_cmp);
    values.dedup();
    let (mut lo, mut hi) = (0usize, values.len());
    let mut found = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match feasible(values[mid])? {
            Some(d) => {
                found = Some(FairOptimum { b: values[mid], distribution: d });
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    found.ok_or_else(|| Error::Infeasible("no distribution meets the fairness requirements".into()))
}
