//! Seeded random instances and the sparsification tightness family.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::model::{
    ClusterInstance, FacilityConstraint, FairClusterInstance, FairLoadInstance, Knapsack, LoadInstance, Norm,
    PartitionMatroid,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer processing times in `[1, pmax]`; each entry is forbidden (`+inf`)
/// with probability `forbidden`, keeping one allowed machine per job.
pub fn random_load(machines: usize, jobs: usize, pmax: u32, forbidden: f64, seed: u64) -> Result<LoadInstance> {
    if pmax == 0 || !(0.0..1.0).contains(&forbidden) {
        return Err(invalid!("need pmax >= 1 and forbidden density in [0, 1)"));
    }
    let mut g = rng(seed);
    let mut p: Vec<f64> = (0..machines * jobs).map(|_| g.gen_range(1..=pmax) as f64).collect();
    for j in 0..jobs {
        let keep = g.gen_range(0..machines.max(1));
        for i in 0..machines {
            if i != keep && g.gen_bool(forbidden) {
                p[i * jobs + j] = f64::INFINITY;
            }
        }
    }
    LoadInstance::new(machines, jobs, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Points on a 1/1000 grid in the unit square.
    Euclidean,
    /// Shortest-path closure of random integer edge lengths in `[1, 10]`.
    RandomGraph,
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterParams {
    pub clients: usize,
    pub facilities: usize,
    pub k: usize,
    /// Upper end for `r_j`.
    pub max_r: usize,
    pub metric: MetricKind,
}

pub fn random_metric(n: usize, kind: MetricKind, g: &mut ChaCha8Rng) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    match kind {
        MetricKind::Euclidean => {
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (g.gen_range(0..=1000) as f64 / 1000.0, g.gen_range(0..=1000) as f64 / 1000.0)).collect();
            for a in 0..n {
                for b in 0..n {
                    d[a * n + b] = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
                }
            }
        }
        MetricKind::RandomGraph => {
            for a in 0..n {
                for b in a + 1..n {
                    let w = g.gen_range(1..=10) as f64;
                    d[a * n + b] = w;
                    d[b * n + a] = w;
                }
            }
            for m in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let via = d[a * n + m] + d[m * n + b];
                        if via < d[a * n + b] {
                            d[a * n + b] = via;
                        }
                    }
                }
            }
        }
    }
    d
}

/// Random requirements `l_j ≤ 1`, `r_j ≤ max_r`, coverage between
/// `Σl_j` and the midpoint of `Σl_j` and `Σr_j`.
fn requirements(p: &ClusterParams, g: &mut ChaCha8Rng) -> (usize, Vec<usize>, Vec<usize>) {
    let top = p.max_r.min(p.facilities).max(1);
    let upper: Vec<usize> = (0..p.clients).map(|_| g.gen_range(1..=top)).collect();
    let lower: Vec<usize> = upper.iter().map(|&r| g.gen_range(0..=r.min(1))).collect();
    let (sl, sr) = (lower.iter().sum::<usize>(), upper.iter().sum::<usize>());
    let coverage = g.gen_range(sl..=(sl + sr) / 2);
    (coverage, lower, upper)
}

pub fn random_cluster(p: &ClusterParams, seed: u64) -> Result<ClusterInstance> {
    let mut g = rng(seed);
    let dist = random_metric(p.clients + p.facilities, p.metric, &mut g);
    let (m, l, r) = requirements(p, &mut g);
    ClusterInstance::new(p.clients, p.facilities, dist, p.k, m, l, r)
}

/// Random partition of the facilities into `parts` groups with capacities in `[1, |part|]`.
pub fn random_partition(base: &ClusterInstance, parts: usize, seed: u64) -> Result<ClusterInstance> {
    let mut g = rng(seed);
    let f = base.facilities();
    let parts = parts.clamp(1, f);
    let mut ids: Vec<usize> = (0..f).collect();
    ids.shuffle(&mut g);
    let mut groups = vec![Vec::new(); parts];
    for (k, i) in ids.into_iter().enumerate() {
        groups[if k < parts { k } else { g.gen_range(0..parts) }].push(i);
    }
    let caps = groups.iter().map(|p| g.gen_range(1..=p.len())).collect();
    base.replace_constraint(FacilityConstraint::Partition(PartitionMatroid::new(f, groups, caps)?))
}

/// Weights on a 1/100 grid in `(0, 1]` and a budget between 30% and 70% of the total.
pub fn random_knapsack(base: &ClusterInstance, seed: u64) -> Result<ClusterInstance> {
    let mut g = rng(seed);
    let weights: Vec<f64> = (0..base.facilities()).map(|_| g.gen_range(1..=100) as f64 / 100.0).collect();
    let total: f64 = weights.iter().sum();
    let budget = (total * g.gen_range(30..=70) as f64 / 100.0 * 100.0).round() / 100.0;
    base.replace_constraint(FacilityConstraint::Knapsack(Knapsack { weights, budget }))
}

/// Caps `e_i` on a 1/4 grid in `[|J|/M, |J|]`.
pub fn random_fair_load(machines: usize, jobs: usize, pmax: u32, seed: u64) -> Result<FairLoadInstance> {
    let base = random_load(machines, jobs, pmax, 0.0, seed)?;
    let mut g = rng(seed ^ 0x5eed);
    let lo = (4 * jobs).div_ceil(machines);
    let e = (0..machines).map(|_| g.gen_range(lo..=4 * jobs) as f64 / 4.0).collect();
    FairLoadInstance::new(base, e)
}

/// Demands `e_j` on a 1/4 grid in `[l_j, r_j]`.
pub fn random_fair_cluster(p: &ClusterParams, seed: u64) -> Result<FairClusterInstance> {
    let base = random_cluster(p, seed)?;
    let mut g = rng(seed ^ 0x5eed);
    let e = (0..base.clients())
        .map(|j| g.gen_range(4 * base.lower()[j]..=4 * base.upper()[j]) as f64 / 4.0)
        .collect();
    FairClusterInstance::new(base, e)
}

/// `count` non-increasing weight vectors of length `dim` with entries on a 1/10 grid in `[0, 1]`.
pub fn random_ordered_weights(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            let mut w: Vec<f64> = (0..dim).map(|_| g.gen_range(0..=10) as f64 / 10.0).collect();
            w.sort_by(|a, b| b.total_cmp(a));
            if w[0] == 0.0 {
                w[0] = 1.0;
            }
            w
        })
        .collect()
}

pub fn random_ordered_norm(count: usize, dim: usize, seed: u64) -> Result<Norm> {
    Norm::max_ordered(random_ordered_weights(count, dim, seed))
}

/// `w_ℓ = √ℓ − √(ℓ−1)` for `ℓ ≤ 2^t` and the vectors `v^(ℓ) = (1/√ℓ, …, 1/√ℓ, 0, …)`,
/// each of which has norm 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessFamily {
    pub t: u32,
    pub weights: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn tightness_family(t: u32) -> Result<TightnessFamily> {
    if t > 20 {
        return Err(invalid!("t = {t} is too large"));
    }
    let r = 1usize << t;
    let weights = (1..=r).map(|l| (l as f64).sqrt() - ((l - 1) as f64).sqrt()).collect();
    let vectors = (1..=r)
        .map(|l| (0..r).map(|i| if i < l { 1.0 / (l as f64).sqrt() } else { 0.0 }).collect())
        .collect();
    Ok(TightnessFamily { t, weights, vectors })
}
