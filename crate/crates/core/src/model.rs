//! Instances, norms, solutions and objective evaluation.
//!
//! Cost vectors are always treated as zero-padded: a norm defined on a
//! longer dimension evaluates a shorter vector as if trailing zeros were
//! appended, and weight vectors shorter than the cost vector are
//! zero-extended.

use std::cmp::Ordering;

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when validating the triangle inequality.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// A symmetric monotone norm on non-negative cost vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Norm {
    /// The L_q norm of the `ell` largest entries.
    TopLq { ell: usize, q: f64 },
    /// Maximum over a finite set of ordered norms `w · v↓`.
    MaxOrdered { weights: Vec<Vec<f64>> },
}

impl Norm {
    pub fn top(ell: usize, q: f64) -> Result<Self> {
        let norm = Norm::TopLq { ell, q };
        norm.validate()?;
        Ok(norm)
    }

    pub fn max_ordered(weights: Vec<Vec<f64>>) -> Result<Self> {
        let norm = Norm::MaxOrdered { weights };
        norm.validate()?;
        Ok(norm)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Norm::TopLq { ell, q } => {
                if *ell == 0 {
                    return Err(invalid!("Top norm needs ell >= 1"));
                }
                if !q.is_finite() || *q < 1.0 {
                    return Err(invalid!("Top norm needs finite q >= 1, got {q}"));
                }
            }
            Norm::MaxOrdered { weights } => {
                if weights.is_empty() {
                    return Err(invalid!("max-ordered norm needs at least one weight vector"));
                }
                for (n, w) in weights.iter().enumerate() {
                    check_weight_vector(w).map_err(|e| invalid!("weight vector {n}: {e}"))?;
                }
            }
        }
        Ok(())
    }

    /// Evaluates the norm, rejecting negative or non-finite entries.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(invalid!("cost vector entry {x} is not a finite non-negative real"));
        }
        Ok(self.eval_unchecked(v))
    }

    pub(crate) fn eval_unchecked(&self, v: &[f64]) -> f64 {
        let sorted = sorted_desc(v);
        self.eval_sorted(&sorted)
    }

    /// Evaluates on a vector already sorted in non-increasing order.
    pub(crate) fn eval_sorted(&self, sorted: &[f64]) -> f64 {
        match self {
            Norm::TopLq { ell, q } => {
                let top = &sorted[..sorted.len().min(*ell)];
                if *q == 1.0 {
                    top.iter().sum()
                } else {
                    top.iter().map(|x| x.powf(*q)).sum::<f64>().powf(1.0 / q)
                }
            }
            Norm::MaxOrdered { weights } => weights
                .iter()
                .map(|w| ordered_value(w, sorted))
                .fold(0.0, f64::max),
        }
    }

    /// Value of the norm on the first unit vector.
    pub fn unit_value(&self) -> f64 {
        self.eval_sorted(&[1.0])
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Norm::TopLq { .. })
    }
}

/// `w · v↓` with both vectors implicitly zero-padded.
pub(crate) fn ordered_value(w: &[f64], sorted: &[f64]) -> f64 {
    w.iter().zip(sorted).map(|(a, b)| a * b).sum()
}

pub(crate) fn check_weight_vector(w: &[f64]) -> std::result::Result<(), String> {
    for (t, x) in w.iter().enumerate() {
        if !x.is_finite() || *x < 0.0 {
            return Err(format!("entry {t} = {x} is not finite non-negative"));
        }
        if t > 0 && *x > w[t - 1] {
            return Err(format!("entry {t} = {x} exceeds its predecessor {}", w[t - 1]));
        }
    }
    Ok(())
}

/// Stable non-increasing sort; equal entries keep their original order.
pub(crate) fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s
}

/// Free-function form of [`Norm::eval`].
pub fn eval_norm(norm: &Norm, v: &[f64]) -> Result<f64> {
    norm.eval(v)
}

/// Unrelated-machines load instance. `p(i, j) = +inf` forbids the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadInstance {
    machines: usize,
    jobs: usize,
    p: Vec<f64>,
}

impl LoadInstance {
    /// `p` is row-major, one row per machine.
    pub fn new(machines: usize, jobs: usize, p: Vec<f64>) -> Result<Self> {
        if machines == 0 || jobs == 0 {
            return Err(invalid!("need at least one machine and one job"));
        }
        if p.len() != machines * jobs {
            return Err(invalid!("p has {} entries, expected {}", p.len(), machines * jobs));
        }
        if let Some(x) = p.iter().find(|x| x.is_nan() || **x < 0.0 || **x == f64::NEG_INFINITY) {
            return Err(invalid!("processing time {x} must be non-negative or +inf"));
        }
        for j in 0..jobs {
            if (0..machines).all(|i| !p[i * jobs + j].is_finite()) {
                return Err(invalid!("job {j} has no allowed machine"));
            }
        }
        Ok(LoadInstance { machines, jobs, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let jobs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != jobs) {
            return Err(invalid!("ragged processing-time matrix"));
        }
        LoadInstance::new(rows.len(), jobs, rows.iter().flatten().copied().collect())
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    #[inline]
    pub fn p(&self, machine: usize, job: usize) -> f64 {
        self.p[machine * self.jobs + job]
    }

    pub fn allowed(&self, machine: usize, job: usize) -> bool {
        self.p(machine, job).is_finite()
    }

    pub fn processing_times(&self) -> &[f64] {
        &self.p
    }

    /// Job sizes on `machine` under `a`, in job order.
    pub fn machine_vector(&self, a: &Assignment, machine: usize) -> Vec<f64> {
        a.jobs_on(machine).map(|j| self.p(machine, j)).collect()
    }

    /// Per-job minimum processing time, a lower bound on any objective.
    pub fn min_job_sizes(&self) -> Vec<f64> {
        (0..self.jobs)
            .map(|j| (0..self.machines).map(|i| self.p(i, j)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// Largest finite processing time of each job.
    pub fn max_job_sizes(&self) -> Vec<f64> {
        (0..self.jobs)
            .map(|j| {
                (0..self.machines)
                    .map(|i| self.p(i, j))
                    .filter(|x| x.is_finite())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Job → machine map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub sigma: Vec<usize>,
}

impl Assignment {
    pub fn new(sigma: Vec<usize>) -> Self {
        Assignment { sigma }
    }

    pub fn jobs_on(&self, machine: usize) -> impl Iterator<Item = usize> + '_ {
        self.sigma
            .iter()
            .enumerate()
            .filter(move |(_, &i)| i == machine)
            .map(|(j, _)| j)
    }

    /// `|σ⁻¹(i)|` for every machine.
    pub fn counts(&self, machines: usize) -> Vec<usize> {
        let mut c = vec![0; machines];
        for &i in &self.sigma {
            if i < machines {
                c[i] += 1;
            }
        }
        c
    }
}

pub(crate) fn check_assignment(inst: &LoadInstance, a: &Assignment) -> Result<()> {
    if a.sigma.len() != inst.jobs() {
        return Err(Error::InvalidSolution(format!(
            "assignment covers {} jobs, instance has {}",
            a.sigma.len(),
            inst.jobs()
        )));
    }
    for (j, &i) in a.sigma.iter().enumerate() {
        if i >= inst.machines() {
            return Err(Error::InvalidSolution(format!("job {j} sent to unknown machine {i}")));
        }
        if !inst.allowed(i, j) {
            return Err(Error::InvalidSolution(format!("job {j} uses forbidden machine {i}")));
        }
    }
    Ok(())
}

/// `max_i f(p⃗(i, σ))`; empty machines contribute 0.
pub fn eval_load_objective(inst: &LoadInstance, norm: &Norm, a: &Assignment) -> Result<f64> {
    check_assignment(inst, a)?;
    Ok(load_objective_unchecked(inst, norm, a))
}

pub(crate) fn load_objective_unchecked(inst: &LoadInstance, norm: &Norm, a: &Assignment) -> f64 {
    (0..inst.machines())
        .map(|i| norm.eval_unchecked(&inst.machine_vector(a, i)))
        .fold(0.0, f64::max)
}

/// Partition matroid on the facilities: at most `capacities[k]` from part `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatroid {
    parts: Vec<Vec<usize>>,
    capacities: Vec<usize>,
    part_of: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(facilities: usize, parts: Vec<Vec<usize>>, capacities: Vec<usize>) -> Result<Self> {
        if parts.len() != capacities.len() {
            return Err(invalid!("{} parts but {} capacities", parts.len(), capacities.len()));
        }
        let mut part_of = vec![usize::MAX; facilities];
        for (k, part) in parts.iter().enumerate() {
            for &i in part {
                if i >= facilities {
                    return Err(invalid!("part {k} names unknown facility {i}"));
                }
                if part_of[i] != usize::MAX {
                    return Err(invalid!("facility {i} appears in two parts"));
                }
                part_of[i] = k;
            }
        }
        if let Some(i) = part_of.iter().position(|&k| k == usize::MAX) {
            return Err(invalid!("facility {i} belongs to no part"));
        }
        Ok(PartitionMatroid { parts, capacities, part_of })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn part_of(&self, facility: usize) -> usize {
        self.part_of[facility]
    }

    /// Independence of a set of distinct facilities.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut used = vec![0usize; self.parts.len()];
        for &i in set {
            used[self.part_of[i]] += 1;
        }
        used.iter().zip(&self.capacities).all(|(u, c)| u <= c)
    }

    pub fn rank(&self) -> usize {
        self.parts.iter().zip(&self.capacities).map(|(p, &c)| p.len().min(c)).sum()
    }
}

/// Knapsack constraint `Σ wt_i ≤ W` over the opened facilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Knapsack {
    pub weights: Vec<f64>,
    pub budget: f64,
}

/// Constraint on the set of opened facilities.
#[derive(Debug, Clone, PartialEq)]
pub enum FacilityConstraint {
    Cardinality(usize),
    Partition(PartitionMatroid),
    Knapsack(Knapsack),
}

/// Clients and facilities in a metric space, with per-client connection bounds.
///
/// Points are indexed clients first: point `j` is client `j`, point
/// `clients + i` is facility `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterInstance {
    clients: usize,
    facilities: usize,
    dist: Vec<f64>,
    /// facility-major `d(i, j)` cache
    fc: Vec<f64>,
    coverage: usize,
    lower: Vec<usize>,
    upper: Vec<usize>,
    constraint: FacilityConstraint,
}

impl ClusterInstance {
    /// `dist` is the row-major `(C+F)²` metric.
    pub fn new(
        clients: usize,
        facilities: usize,
        dist: Vec<f64>,
        k: usize,
        coverage: usize,
        lower: Vec<usize>,
        upper: Vec<usize>,
    ) -> Result<Self> {
        Self::with_constraint(
            clients,
            facilities,
            dist,
            FacilityConstraint::Cardinality(k),
            coverage,
            lower,
            upper,
        )
    }

    pub fn with_constraint(
        clients: usize,
        facilities: usize,
        dist: Vec<f64>,
        constraint: FacilityConstraint,
        coverage: usize,
        lower: Vec<usize>,
        upper: Vec<usize>,
    ) -> Result<Self> {
        if clients == 0 || facilities == 0 {
            return Err(invalid!("need at least one client and one facility"));
        }
        let n = clients + facilities;
        if dist.len() != n * n {
            return Err(invalid!("metric has {} entries, expected {}", dist.len(), n * n));
        }
        validate_metric(n, &dist)?;
        if lower.len() != clients || upper.len() != clients {
            return Err(invalid!("connection bounds must have one entry per client"));
        }
        for j in 0..clients {
            if lower[j] > upper[j] || upper[j] > facilities {
                return Err(invalid!(
                    "client {j}: need 0 <= l <= r <= |F|, got l={} r={}",
                    lower[j],
                    upper[j]
                ));
            }
        }
        if coverage > upper.iter().sum::<usize>() {
            return Err(invalid!("coverage m={coverage} exceeds the sum of r_j"));
        }
        match &constraint {
            FacilityConstraint::Cardinality(_) => {}
            FacilityConstraint::Partition(pm) => {
                if pm.part_of.len() != facilities {
                    return Err(invalid!("partition matroid ground set size mismatch"));
                }
            }
            FacilityConstraint::Knapsack(ks) => {
                if ks.weights.len() != facilities {
                    return Err(invalid!("need one knapsack weight per facility"));
                }
                if ks.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(invalid!("knapsack weights must be finite and non-negative"));
                }
                if !ks.budget.is_finite() || ks.budget < 0.0 {
                    return Err(invalid!("knapsack budget must be finite and non-negative"));
                }
            }
        }
        let mut fc = vec![0.0; facilities * clients];
        for i in 0..facilities {
            for j in 0..clients {
                fc[i * clients + j] = dist[(clients + i) * n + j];
            }
        }
        Ok(ClusterInstance { clients, facilities, dist, fc, coverage, lower, upper, constraint })
    }

    /// Euclidean instance on planar points.
    pub fn from_points(
        clients: &[(f64, f64)],
        facilities: &[(f64, f64)],
        constraint: FacilityConstraint,
        coverage: usize,
        lower: Vec<usize>,
        upper: Vec<usize>,
    ) -> Result<Self> {
        let pts: Vec<(f64, f64)> = clients.iter().chain(facilities).copied().collect();
        let n = pts.len();
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                dist[a * n + b] = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
            }
        }
        Self::with_constraint(clients.len(), facilities.len(), dist, constraint, coverage, lower, upper)
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    pub fn facilities(&self) -> usize {
        self.facilities
    }

    /// Distance between facility `i` and client `j`.
    #[inline]
    pub fn d(&self, facility: usize, client: usize) -> f64 {
        self.fc[facility * self.clients + client]
    }

    pub fn metric(&self) -> &[f64] {
        &self.dist
    }

    pub fn coverage(&self) -> usize {
        self.coverage
    }

    pub fn lower(&self) -> &[usize] {
        &self.lower
    }

    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    /// `r₀ = max_j r_j`.
    pub fn max_upper(&self) -> usize {
        self.upper.iter().copied().max().unwrap_or(0)
    }

    pub fn constraint(&self) -> &FacilityConstraint {
        &self.constraint
    }

    pub fn k(&self) -> Option<usize> {
        match self.constraint {
            FacilityConstraint::Cardinality(k) => Some(k),
            _ => None,
        }
    }

    /// Copy of this instance with a different facility constraint.
    pub fn replace_constraint(&self, constraint: FacilityConstraint) -> Result<Self> {
        Self::with_constraint(
            self.clients,
            self.facilities,
            self.dist.clone(),
            constraint,
            self.coverage,
            self.lower.clone(),
            self.upper.clone(),
        )
    }

    /// Copy with new coverage and per-client bounds (same metric and constraint).
    pub fn with_requirements(&self, coverage: usize, lower: Vec<usize>, upper: Vec<usize>) -> Result<Self> {
        Self::with_constraint(
            self.clients,
            self.facilities,
            self.dist.clone(),
            self.constraint.clone(),
            coverage,
            lower,
            upper,
        )
    }

    /// Facilities sorted by distance from `client` (ties by index).
    pub fn facilities_by_distance(&self, client: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.facilities).collect();
        order.sort_by(|&a, &b| {
            self.d(a, client).partial_cmp(&self.d(b, client)).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        order
    }

    /// Whether `open` satisfies the facility constraint; knapsack budgets are
    /// scaled by `knapsack_slack` (1.0 for the hard constraint).
    pub fn constraint_satisfied(&self, open: &[usize], knapsack_slack: f64) -> bool {
        let distinct = {
            let mut s = open.to_vec();
            s.sort_unstable();
            s.dedup();
            s.len() == open.len()
        };
        match &self.constraint {
            FacilityConstraint::Cardinality(k) => distinct && open.len() <= *k,
            FacilityConstraint::Partition(pm) => distinct && pm.is_independent(open),
            FacilityConstraint::Knapsack(ks) => {
                let w: f64 = open.iter().map(|&i| ks.weights[i]).sum();
                w <= ks.budget * knapsack_slack * (1.0 + 1e-12)
            }
        }
    }
}

fn validate_metric(n: usize, d: &[f64]) -> Result<()> {
    for a in 0..n {
        if d[a * n + a] != 0.0 {
            return Err(invalid!("metric has non-zero diagonal at point {a}"));
        }
        for b in 0..n {
            let x = d[a * n + b];
            if !x.is_finite() || x < 0.0 {
                return Err(invalid!("distance d({a},{b}) = {x} is not finite non-negative"));
            }
            if x != d[b * n + a] {
                return Err(invalid!("metric is not symmetric at ({a},{b})"));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let direct = d[a * n + c];
                let via = d[a * n + b] + d[b * n + c];
                if direct > via + METRIC_TOLERANCE * direct.max(via).max(1.0) {
                    return Err(invalid!("triangle inequality fails for ({a},{b},{c})"));
                }
            }
        }
    }
    Ok(())
}

/// Opened facilities and per-client connections.
///
/// `open` is sorted and may repeat a location only for knapsack instances;
/// `connections[j]` lists facility locations, with multiplicity bounded by
/// their multiplicity in `open`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterSolution {
    pub open: Vec<usize>,
    pub connections: Vec<Vec<usize>>,
}

impl ClusterSolution {
    pub fn new(mut open: Vec<usize>, mut connections: Vec<Vec<usize>>) -> Self {
        open.sort_unstable();
        for c in &mut connections {
            c.sort_unstable();
        }
        ClusterSolution { open, connections }
    }

    pub fn total_connections(&self) -> usize {
        self.connections.iter().map(Vec::len).sum()
    }

    pub fn client_vector(&self, inst: &ClusterInstance, client: usize) -> Vec<f64> {
        self.connections[client].iter().map(|&i| inst.d(i, client)).collect()
    }
}

/// Structural check: indices in range and `S_j ⊆ S` with multiplicity.
pub(crate) fn check_cluster_structure(inst: &ClusterInstance, sol: &ClusterSolution) -> Result<()> {
    if sol.connections.len() != inst.clients() {
        return Err(Error::InvalidSolution(format!(
            "solution lists {} clients, instance has {}",
            sol.connections.len(),
            inst.clients()
        )));
    }
    let mut mult = vec![0usize; inst.facilities()];
    for &i in &sol.open {
        if i >= inst.facilities() {
            return Err(Error::InvalidSolution(format!("unknown facility {i}")));
        }
        mult[i] += 1;
    }
    for (j, conn) in sol.connections.iter().enumerate() {
        let mut used = vec![0usize; inst.facilities()];
        for &i in conn {
            if i >= inst.facilities() || mult[i] == used[i] {
                return Err(Error::InvalidSolution(format!(
                    "client {j} connects to facility {i} which is not open (often enough)"
                )));
            }
            used[i] += 1;
        }
    }
    Ok(())
}

/// Full feasibility check: structure, `|S_j| ∈ [l_j, r_j]`, coverage and the
/// facility constraint (knapsack budget scaled by `knapsack_slack`).
pub fn check_cluster_solution(inst: &ClusterInstance, sol: &ClusterSolution, knapsack_slack: f64) -> Result<()> {
    check_cluster_structure(inst, sol)?;
    for (j, conn) in sol.connections.iter().enumerate() {
        if conn.len() < inst.lower()[j] || conn.len() > inst.upper()[j] {
            return Err(Error::InvalidSolution(format!(
                "client {j} has {} connections, needs [{}, {}]",
                conn.len(),
                inst.lower()[j],
                inst.upper()[j]
            )));
        }
    }
    if sol.total_connections() < inst.coverage() {
        return Err(Error::InvalidSolution(format!(
            "{} connections, coverage requires {}",
            sol.total_connections(),
            inst.coverage()
        )));
    }
    if !inst.constraint_satisfied(&sol.open, knapsack_slack) {
        return Err(Error::InvalidSolution("opened facilities violate the facility constraint".into()));
    }
    Ok(())
}

/// `max_j f(d⃗(j, S_j))`; clients without connections contribute 0.
pub fn eval_cluster_objective(inst: &ClusterInstance, norm: &Norm, sol: &ClusterSolution) -> Result<f64> {
    check_cluster_structure(inst, sol)?;
    Ok(cluster_objective_unchecked(inst, norm, sol))
}

pub(crate) fn cluster_objective_unchecked(inst: &ClusterInstance, norm: &Norm, sol: &ClusterSolution) -> f64 {
    (0..inst.clients())
        .map(|j| norm.eval_unchecked(&sol.client_vector(inst, j)))
        .fold(0.0, f64::max)
}

/// Load instance with per-machine expected-load caps `e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FairLoadInstance {
    pub base: LoadInstance,
    pub e: Vec<f64>,
}

impl FairLoadInstance {
    pub fn new(base: LoadInstance, e: Vec<f64>) -> Result<Self> {
        if e.len() != base.machines() {
            return Err(invalid!("need one fairness cap per machine"));
        }
        if e.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(invalid!("fairness caps must be finite and non-negative"));
        }
        Ok(FairLoadInstance { base, e })
    }
}

/// Cardinality-constrained cluster instance with per-client expected
/// connection demands `e_j ∈ [l_j, r_j]`. The coverage requirement is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FairClusterInstance {
    pub base: ClusterInstance,
    pub e: Vec<f64>,
}

impl FairClusterInstance {
    pub fn new(base: ClusterInstance, e: Vec<f64>) -> Result<Self> {
        if base.k().is_none() {
            return Err(invalid!("fair clustering is defined for cardinality constraints only"));
        }
        if e.len() != base.clients() {
            return Err(invalid!("need one fairness demand per client"));
        }
        for (j, &x) in e.iter().enumerate() {
            if !x.is_finite() || x < base.lower()[j] as f64 || x > base.upper()[j] as f64 {
                return Err(invalid!("client {j}: e_j = {x} outside [l_j, r_j]"));
            }
        }
        let base = base.with_requirements(0, base.lower().to_vec(), base.upper().to_vec())?;
        Ok(FairClusterInstance { base, e })
    }

    pub fn k(&self) -> usize {
        self.base.k().unwrap_or(0)
    }
}
