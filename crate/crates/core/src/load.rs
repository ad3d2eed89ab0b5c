//! Max-norm makespan: LP builders, Shmoys–Tardos rounding and drivers.
//!
//! The count and mass rows range over pairs with `p(i, j) > T`. With
//! `T ≥ T*_ℓ` at most `ℓ − 1` jobs of the optimum exceed `T` on each
//! machine, so the optimum's indicator stays feasible even when many jobs
//! tie at the threshold.

use crate::error::{internal, invalid, Result};
use crate::lp::{solve_lp, Cmp, FlowNetwork, LpModel, LpStatus, Sense};
use crate::model::{load_objective_unchecked, Assignment, LoadInstance, Norm};
use crate::search::{check_eps, driver_grid, first_true, ordered_search, top_guess_search};
use crate::sparsify::{
    load_threshold_candidates, max_first_weight, pos_set, sparsify_weights, telescoped_coefficients, ThresholdSequence,
};

/// Entries below this are treated as zero when reading LP solutions.
const SUPPORT_TOL: f64 = 1e-9;

/// `x` over machines × jobs, row-major by machine.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    pub machines: usize,
    pub jobs: usize,
    pub x: Vec<f64>,
}

impl FractionalAssignment {
    pub fn get(&self, machine: usize, job: usize) -> f64 {
        self.x[machine * self.jobs + job]
    }

    pub fn from_assignment(inst: &LoadInstance, a: &Assignment) -> Self {
        let mut x = vec![0.0; inst.machines() * inst.jobs()];
        for (j, &i) in a.sigma.iter().enumerate() {
            x[i * inst.jobs() + j] = 1.0;
        }
        FractionalAssignment { machines: inst.machines(), jobs: inst.jobs(), x }
    }

    /// `Σ_j x_ij` for machine `i`.
    pub fn machine_mass(&self, machine: usize) -> f64 {
        (0..self.jobs).map(|j| self.get(machine, j)).sum()
    }
}

/// An LP over the assignment variables, with the variable of each allowed pair.
#[derive(Debug, Clone)]
pub struct LoadLp {
    pub model: LpModel,
    /// `var[i * J + j]`; `None` where `p(i, j) > R` fixes `x_ij = 0`.
    pub var: Vec<Option<usize>>,
    machines: usize,
    jobs: usize,
}

impl LoadLp {
    pub fn extract(&self, values: &[f64]) -> FractionalAssignment {
        let x = self
            .var
            .iter()
            .map(|v| v.map_or(0.0, |k| values[k].clamp(0.0, 1.0)))
            .map(|x| if x < SUPPORT_TOL { 0.0 } else { x })
            .collect();
        FractionalAssignment { machines: self.machines, jobs: self.jobs, x }
    }

    /// Terms `(var, c(j))` of machine `i` for the jobs where `c` is defined.
    fn machine_terms(&self, inst: &LoadInstance, i: usize, mut coef: impl FnMut(usize) -> Option<f64>) -> Vec<(usize, f64)> {
        (0..inst.jobs())
            .filter_map(|j| {
                let v = self.var[i * inst.jobs() + j]?;
                coef(j).map(|c| (v, c))
            })
            .collect()
    }

    /// Solves and returns a vertex, or `None` when infeasible.
    pub fn solve(&self) -> Result<Option<FractionalAssignment>> {
        let sol = solve_lp(&self.model)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(self.extract(&sol.values))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(internal!("assignment LP reported unbounded")),
        }
    }

    /// Adds `Σ_i w_i Σ_j x_ij` as the objective.
    pub fn set_machine_objective(&mut self, sense: Sense, weights: &[f64]) {
        let coefs = self
            .var
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|v| (v, weights[k / self.jobs])))
            .filter(|(_, w)| *w != 0.0)
            .collect();
        self.model.set_objective(sense, coefs);
    }
}

/// `P_l(R)`: every job fully assigned, pairs with `p > R` forbidden.
pub fn build_basic_load_lp(inst: &LoadInstance, r: f64) -> LoadLp {
    let (m, n) = (inst.machines(), inst.jobs());
    let mut model = LpModel::new();
    let mut var = vec![None; m * n];
    for i in 0..m {
        for j in 0..n {
            if inst.p(i, j) <= r {
                var[i * n + j] = Some(model.add_var(format!("x_{i}_{j}"), Some(0.0), Some(1.0)));
            }
        }
    }
    for j in 0..n {
        let coefs = (0..m).filter_map(|i| var[i * n + j].map(|v| (v, 1.0))).collect();
        model.add_row(format!("assign_{j}"), coefs, Cmp::Eq, 1.0);
    }
    LoadLp { model, var, machines: m, jobs: n }
}

/// `LB(R, B, T)`: per machine, at most `ℓ` mass and at most `B^q` of
/// `q`-th power size over the jobs with `p > T`.
pub fn build_topl_load_lp(inst: &LoadInstance, ell: usize, q: f64, r: f64, b: f64, t: f64) -> LoadLp {
    let mut lp = build_basic_load_lp(inst, r);
    for i in 0..inst.machines() {
        let count = lp.machine_terms(inst, i, |j| (inst.p(i, j) > t).then_some(1.0));
        let mass = lp.machine_terms(inst, i, |j| (inst.p(i, j) > t).then(|| inst.p(i, j).powf(q)));
        if !count.is_empty() {
            lp.model.add_row(format!("count_{i}"), count, Cmp::Le, ell as f64);
            lp.model.add_row(format!("mass_{i}"), mass, Cmp::Le, b.powf(q));
        }
    }
    lp
}

/// `OLB(R, B, T)` for sparsified weights over dimension `|J|`.
pub fn build_ordered_load_lp(
    inst: &LoadInstance,
    sparse: &[Vec<f64>],
    r: f64,
    b: f64,
    seq: &ThresholdSequence,
) -> LoadLp {
    let mut lp = build_basic_load_lp(inst, r);
    let pos = seq.pos();
    let coefs = telescoped_coefficients(sparse, pos);
    for i in 0..inst.machines() {
        for (k, &ell) in pos.members().iter().enumerate() {
            let t = seq.value_at(k);
            let count = lp.machine_terms(inst, i, |j| (inst.p(i, j) > t).then_some(1.0));
            if !count.is_empty() {
                lp.model.add_row(format!("count_{i}_{ell}"), count, Cmp::Le, ell as f64);
            }
        }
        for (nidx, c) in coefs.iter().enumerate() {
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for (k, ck) in c.iter().enumerate() {
                if *ck == 0.0 {
                    continue;
                }
                let t = seq.value_at(k);
                for (v, w) in lp.machine_terms(inst, i, |j| (inst.p(i, j) > t).then(|| ck * inst.p(i, j))) {
                    match acc.iter_mut().find(|(u, _)| *u == v) {
                        Some(e) => e.1 += w,
                        None => acc.push((v, w)),
                    }
                }
            }
            if !acc.is_empty() {
                lp.model.add_row(format!("mass_{i}_{nidx}"), acc, Cmp::Le, b);
            }
        }
    }
    lp
}

/// One edge of the copy graph: `amount` of `job` on copy `copy` of `machine`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyEdge {
    pub job: usize,
    pub machine: usize,
    pub copy: usize,
    pub amount: f64,
}

/// Machine copies with the fractional job mass they carry.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineCopyGraph {
    /// `n_i` per machine.
    pub copies: Vec<usize>,
    pub edges: Vec<CopyEdge>,
}

impl MachineCopyGraph {
    /// Mass carried by each copy of `machine`.
    pub fn copy_loads(&self, machine: usize) -> Vec<f64> {
        let mut load = vec![0.0; self.copies[machine]];
        for e in self.edges.iter().filter(|e| e.machine == machine) {
            load[e.copy] += e.amount;
        }
        load
    }
}

fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// Fills `⌈Σ_j x_ij⌉` copies of each machine in non-decreasing `p(i, j)`
/// order (ties by job index), overflowing to the next copy at unit mass.
pub fn build_copy_graph(inst: &LoadInstance, x: &FractionalAssignment) -> MachineCopyGraph {
    let mut copies = Vec::with_capacity(inst.machines());
    let mut edges = Vec::new();
    for i in 0..inst.machines() {
        let n_i = ceil_tol(x.machine_mass(i));
        copies.push(n_i);
        let mut jobs: Vec<usize> = (0..inst.jobs()).filter(|&j| x.get(i, j) > SUPPORT_TOL).collect();
        jobs.sort_by(|&a, &b| inst.p(i, a).total_cmp(&inst.p(i, b)).then(a.cmp(&b)));
        let (mut copy, mut room) = (0usize, 1.0f64);
        for j in jobs {
            let mut left = x.get(i, j);
            while left > SUPPORT_TOL {
                let put = left.min(room);
                edges.push(CopyEdge { job: j, machine: i, copy: copy.min(n_i.saturating_sub(1)), amount: put });
                left -= put;
                room -= put;
                if room <= SUPPORT_TOL {
                    copy += 1;
                    room = 1.0;
                }
            }
        }
    }
    MachineCopyGraph { copies, edges }
}

/// Minimum-weight job-covering matching in the support of the copy graph.
/// Edges into machine `i` cost `weights[i]` (default 0).
pub fn shmoys_tardos_round(
    inst: &LoadInstance,
    x: &FractionalAssignment,
    weights: Option<&[f64]>,
) -> Result<Assignment> {
    if let Some(w) = weights {
        if w.len() != inst.machines() || w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid!("need one finite non-negative weight per machine"));
        }
    }
    let graph = build_copy_graph(inst, x);
    let jobs = inst.jobs();
    let mut offset = Vec::with_capacity(inst.machines());
    let mut total_copies = 0;
    for &c in &graph.copies {
        offset.push(total_copies);
        total_copies += c;
    }
    // s, t, jobs, copies
    let mut net = FlowNetwork::new(2 + jobs + total_copies);
    let (s, t) = (0, 1);
    for j in 0..jobs {
        net.add_arc(s, 2 + j, 1, 1, 0.0);
    }
    let mut edge_arcs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for e in &graph.edges {
        if !seen.insert((e.job, e.machine, e.copy)) {
            continue;
        }
        let cost = weights.map_or(0.0, |w| w[e.machine]);
        let node = 2 + jobs + offset[e.machine] + e.copy;
        edge_arcs.push((net.add_arc(2 + e.job, node, 0, 1, cost), e.job, e.machine));
    }
    for c in 0..total_copies {
        net.add_arc(2 + jobs + c, t, 0, 1, 0.0);
    }
    net.add_arc(t, s, 0, jobs as i64, 0.0);
    let flow = net.min_cost_circulation()?.ok_or_else(|| internal!("copy graph admits no job-covering matching"))?;
    let mut sigma = vec![usize::MAX; jobs];
    for (arc, j, i) in edge_arcs {
        if flow[arc] == 1 {
            sigma[j] = i;
        }
    }
    if sigma.iter().any(|&i| i == usize::MAX) {
        return Err(internal!("matching left a job unassigned"));
    }
    Ok(Assignment::new(sigma))
}

/// Accepted guess and the per-machine bound `(2R^q + B^q + ℓT^q)^{1/q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopLoadCertificate {
    pub r: f64,
    pub b: f64,
    pub t: f64,
    pub bound: f64,
}

/// Accepted guess and the bound `max_n 4Rw̃₁ + 2B + 2·gap`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedLoadCertificate {
    pub r: f64,
    pub b: f64,
    pub pos: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOutcome<C> {
    pub assignment: Assignment,
    pub value: f64,
    pub certificate: C,
}

/// Top(ℓ,q) makespan within factor `4^{1/q} + eps`.
pub fn solve_topl_makespan(inst: &LoadInstance, ell: usize, q: f64, eps: f64) -> Result<LoadOutcome<TopLoadCertificate>> {
    Norm::top(ell, q)?;
    check_eps(eps)?;
    let cands = load_threshold_candidates(inst);
    let pmax = *cands.last().unwrap();
    let hi = (inst.jobs() as f64).powf(1.0 / q) * pmax;
    let four = 4f64.powf(1.0 / q);
    let grid = driver_grid(&cands, hi, eps / four)?;
    let (r, b, t, x) = top_guess_search(&cands, &grid, (ell as f64).powf(1.0 / q), |r, b, t| {
        build_topl_load_lp(inst, ell, q, r, b, t).solve()
    })?
    .ok_or_else(|| internal!("no feasible guess on a covering grid"))?;
    let assignment = shmoys_tardos_round(inst, &x, None)?;
    let norm = Norm::TopLq { ell, q };
    let value = load_objective_unchecked(inst, &norm, &assignment);
    let bound = (2.0 * r.powf(q) + b.powf(q) + ell as f64 * t.powf(q)).powf(1.0 / q);
    Ok(LoadOutcome { assignment, value, certificate: TopLoadCertificate { r, b, t, bound } })
}

/// Certificate of an ordered load guess: `max_n (4R w̃₁ⁿ + 2B + 2 gapₙ)`.
pub(crate) fn ordered_load_bound(sparse: &[Vec<f64>], r: f64, b: f64, seq: &ThresholdSequence) -> f64 {
    let pos = seq.pos();
    let coefs = telescoped_coefficients(sparse, pos);
    coefs
        .iter()
        .zip(sparse)
        .map(|(c, w)| {
            let gap: f64 = pos.members().iter().zip(c).enumerate().map(|(k, (&ell, ck))| ck * ell as f64 * seq.value_at(k)).sum();
            4.0 * r * w.first().copied().unwrap_or(0.0) + 2.0 * b + 2.0 * gap
        })
        .fold(0.0, f64::max)
}

/// Max-ordered makespan with the logarithmic guarantee.
///
/// Every `(R, T)` guess gets its smallest feasible `B` on a `(1+eps)` grid;
/// the guess with the smallest certificate is rounded.
pub fn solve_ordered_makespan(
    inst: &LoadInstance,
    weights: &[Vec<f64>],
    eps: f64,
) -> Result<LoadOutcome<OrderedLoadCertificate>> {
    let norm = Norm::max_ordered(weights.to_vec())?;
    check_eps(eps)?;
    let n = inst.jobs();
    let sparse = sparsify_weights(weights, n)?;
    let wmax = max_first_weight(&sparse);
    let cands = load_threshold_candidates(inst);
    let pos = pos_set(n)?;

    let finish = |x: FractionalAssignment, r: f64, b: f64, thresholds: Vec<f64>, bound: f64| -> Result<_> {
        let assignment = shmoys_tardos_round(inst, &x, None)?;
        let value = load_objective_unchecked(inst, &norm, &assignment);
        Ok(LoadOutcome {
            assignment,
            value,
            certificate: OrderedLoadCertificate { r, b, pos: pos.members().to_vec(), thresholds, bound },
        })
    };

    // smallest R admitting any assignment
    let ridx = first_true(cands.len(), |k| Ok(build_basic_load_lp(inst, cands[k]).solve()?.is_some()))?
        .ok_or_else(|| internal!("no R admits an assignment"))?;
    let rmin = cands[ridx];
    if rmin == 0.0 || wmax == 0.0 {
        // the norm vanishes on every assignment using only these pairs
        let x = build_basic_load_lp(inst, rmin).solve()?.unwrap();
        return finish(x, rmin, 0.0, vec![0.0; pos.len()], 0.0);
    }

    let best = ordered_search(
        &cands[ridx..],
        n,
        wmax,
        eps,
        6.0,
        |r, b, seq| ordered_load_bound(&sparse, r, b, seq),
        |r, b, seq| build_ordered_load_lp(inst, &sparse, r, b, seq).solve(),
    )?
    .ok_or_else(|| internal!("no feasible ordered guess although an assignment exists"))?;
    finish(best.item, best.r, best.b, best.seq.values(), best.bound)
}

/// Gap factor bound used to audit ordered certificates: `8 + 2eps + 4|POS|`.
pub fn ordered_load_ratio_bound(n: usize, eps: f64) -> f64 {
    let pos = pos_set(n.max(1)).map(|p| p.len()).unwrap_or(1);
    8.0 + 2.0 * eps + 4.0 * pos as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_load_objective;
    use crate::sparsify::enumerate_threshold_sequences;

    fn toy() -> LoadInstance {
        LoadInstance::from_rows(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]).unwrap()
    }

    #[test]
    fn basic_lp_examples() {
        let one = LoadInstance::from_rows(&[vec![5.0]]).unwrap();
        let x = build_basic_load_lp(&one, 5.0).solve().unwrap().unwrap();
        assert_eq!(x.get(0, 0), 1.0);
        assert!(build_basic_load_lp(&one, 4.0).solve().unwrap().is_none());
    }

    #[test]
    fn topl_lp_examples() {
        let inst = toy();
        // relaxed rows reduce to the basic LP
        assert!(build_topl_load_lp(&inst, 3, 1.0, 3.0, 1e9, 0.0).solve().unwrap().is_some());
        assert!(build_topl_load_lp(&inst, 3, 1.0, 3.0, 0.0, 0.0).solve().unwrap().is_none());
    }

    #[test]
    fn ordered_lp_examples() {
        let inst = toy();
        let sparse = sparsify_weights(&[vec![1.0]], 3).unwrap();
        let seq = enumerate_threshold_sequences(3.0, 3).unwrap().next().unwrap();
        // T = (3, ...) leaves no pair above the thresholds
        assert_eq!(seq.value_at(0), 3.0);
        assert!(build_ordered_load_lp(&inst, &sparse, 3.0, 0.0, &seq).solve().unwrap().is_some());
        // w̃ = (1, 1, 0): only pairs above T₂ = 1 count, and splitting job 1 evens them out
        let sparse = sparsify_weights(&[vec![1.0, 1.0]], 3).unwrap();
        let low = ThresholdSequence::rounding_up(3.0, 3, &[3.0, 1.0, 1.0]).unwrap();
        assert!(build_ordered_load_lp(&inst, &sparse, 3.0, 0.9, &low).solve().unwrap().is_none());
        assert!(build_ordered_load_lp(&inst, &sparse, 3.0, 1.0, &low).solve().unwrap().is_some());
    }

    #[test]
    fn integral_rounding_is_identity() {
        let inst = toy();
        let a = Assignment::new(vec![0, 1, 1]);
        let x = FractionalAssignment::from_assignment(&inst, &a);
        assert_eq!(shmoys_tardos_round(&inst, &x, None).unwrap(), a);
    }

    #[test]
    fn copy_construction_trace() {
        let inst = LoadInstance::from_rows(&[vec![1.0, 2.0, 3.0, 4.0], vec![1.0; 4]]).unwrap();
        let mut x = vec![0.5; 8];
        x[4..].iter_mut().for_each(|v| *v = 0.5);
        let fx = FractionalAssignment { machines: 2, jobs: 4, x };
        let g = build_copy_graph(&inst, &fx);
        assert_eq!(g.copies[0], 2);
        let on = |copy: usize| -> Vec<usize> {
            g.edges.iter().filter(|e| e.machine == 0 && e.copy == copy).map(|e| e.job).collect()
        };
        assert_eq!(on(0), vec![0, 1]);
        assert_eq!(on(1), vec![2, 3]);
        assert_eq!(g.copy_loads(0), vec![1.0, 1.0]);
    }

    #[test]
    fn topl_driver_toy() {
        let inst = toy();
        let out = solve_topl_makespan(&inst, 2, 1.0, 0.1).unwrap();
        let norm = Norm::top(2, 1.0).unwrap();
        assert_eq!(eval_load_objective(&inst, &norm, &out.assignment).unwrap(), out.value);
        assert!(out.value >= 3.0 && out.value <= 4.1 * 3.0);
        assert!(out.value <= out.certificate.bound * (1.0 + 1e-9));
    }

    #[test]
    fn single_job_is_exact() {
        let inst = LoadInstance::from_rows(&[vec![5.0], vec![3.0], vec![f64::INFINITY]]).unwrap();
        let out = solve_topl_makespan(&inst, 1, 2.0, 0.1).unwrap();
        assert_eq!(out.value, 3.0);
    }

    #[test]
    fn identical_jobs_top1() {
        let inst = LoadInstance::from_rows(&[vec![2.0; 4], vec![2.0; 4]]).unwrap();
        assert_eq!(solve_topl_makespan(&inst, 1, 1.0, 0.1).unwrap().value, 2.0);
    }

    #[test]
    fn zero_optimum() {
        let inst = LoadInstance::from_rows(&[vec![0.0, 3.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(solve_topl_makespan(&inst, 2, 1.0, 0.1).unwrap().value, 0.0);
        assert_eq!(solve_ordered_makespan(&inst, &[vec![1.0, 1.0]], 0.1).unwrap().value, 0.0);
    }

    #[test]
    fn ordered_single_machine_exact() {
        let inst = LoadInstance::from_rows(&[vec![3.0, 1.0, 2.0]]).unwrap();
        let w = vec![vec![2.0, 1.0, 0.5]];
        let out = solve_ordered_makespan(&inst, &w, 0.1).unwrap();
        let f = Norm::max_ordered(w).unwrap();
        assert_eq!(out.value, f.eval(&[3.0, 1.0, 2.0]).unwrap());
        assert!(out.value <= out.certificate.bound);
    }

    #[test]
    fn ordered_top1_collapse_within_sandwich() {
        let inst = toy();
        let ordered = solve_ordered_makespan(&inst, &[vec![1.0]], 0.1).unwrap();
        let top = solve_topl_makespan(&inst, 1, 1.0, 0.1).unwrap();
        assert!(ordered.value <= 2.0 * top.value && top.value <= 2.0 * ordered.value);
    }

    #[test]
    fn weighted_rounding_respects_fractional_weight() {
        let inst = LoadInstance::from_rows(&[vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        let x = FractionalAssignment { machines: 2, jobs: 3, x: vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5] };
        let w = [3.0, 1.0];
        let a = shmoys_tardos_round(&inst, &x, Some(&w)).unwrap();
        let counts = a.counts(2);
        let integral: f64 = counts.iter().zip(&w).map(|(c, w)| *c as f64 * w).sum();
        assert!(integral <= 0.5 * 3.0 * 3.0 + 0.5 * 3.0 * 1.0 + 1e-9);
        assert!(counts[0] <= 2 && counts[1] <= 2);
    }
}
