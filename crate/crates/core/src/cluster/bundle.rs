//! Bundle construction from a split fractional solution.

use crate::error::{internal, Result};
use crate::model::ClusterInstance;

use super::split::{SplitSolution, MASS_TOL};

/// Reference to a bundle in a [`BundleStructure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BundleRef {
    Full(usize),
    Partial(usize),
}

/// Output of the bundling pass: full bundles (mass 1), partial bundles
/// (mass < 1) with their reuse counters, and each client's queue.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BundleStructure {
    pub full: Vec<Vec<usize>>,
    pub partial: Vec<Vec<usize>>,
    /// `n_U` for each partial bundle.
    pub partial_count: Vec<usize>,
    pub queues: Vec<Vec<BundleRef>>,
}

impl BundleStructure {
    pub fn copies(&self, b: BundleRef) -> &[usize] {
        match b {
            BundleRef::Full(k) => &self.full[k],
            BundleRef::Partial(k) => &self.partial[k],
        }
    }

    /// Number of full bundles across all queues (the fixed part of the auxiliary objective).
    pub fn full_queue_entries(&self) -> usize {
        self.queues.iter().flatten().filter(|b| matches!(b, BundleRef::Full(_))).count()
    }

    /// Bundle owning each copy, if any.
    pub fn owner_map(&self, copies: usize) -> Vec<Option<BundleRef>> {
        let mut owner = vec![None; copies];
        for (k, u) in self.full.iter().enumerate() {
            for &i in u {
                owner[i] = Some(BundleRef::Full(k));
            }
        }
        for (k, u) in self.partial.iter().enumerate() {
            for &i in u {
                owner[i] = Some(BundleRef::Partial(k));
            }
        }
        owner
    }
}

/// Nearest prefix of `residual` with mass `min(1, total)`, the mass it
/// reaches, and how much of the last copy it needs.
fn nearest_unit(split: &SplitSolution, residual: &[usize]) -> (usize, f64, f64) {
    let mut acc = 0.0;
    for (k, &i) in residual.iter().enumerate() {
        if acc + split.y[i] >= 1.0 - MASS_TOL {
            return (k + 1, 1.0, 1.0 - acc);
        }
        acc += split.y[i];
    }
    (residual.len(), acc, residual.last().map_or(0.0, |&i| split.y[i]))
}

fn first_owned(owner: &[Option<BundleRef>], prefix: &[usize], full: bool) -> Option<BundleRef> {
    prefix
        .iter()
        .filter_map(|&i| owner[i])
        .filter(|b| matches!(b, BundleRef::Full(_)) == full)
        .min()
}

/// Cuts the last copy of a new bundle's prefix at `need`, updating residuals.
fn cut_last(split: &mut SplitSolution, residual: &mut [Vec<usize>], owner: &mut Vec<Option<BundleRef>>, last: usize, need: f64) {
    if split.y[last] - need > MASS_TOL {
        let fresh = split.split_copy(last, need);
        owner.push(None);
        for r in residual.iter_mut() {
            if let Some(p) = r.iter().position(|&i| i == last) {
                r.insert(p + 1, fresh);
            }
        }
    }
}

fn floor_ceil(u: f64) -> (usize, usize) {
    let f = (u + MASS_TOL).floor().max(0.0) as usize;
    let c = (u - MASS_TOL).ceil().max(0.0) as usize;
    (f, c.max(f))
}

/// Bundles the split solution; may split further copies of `split`.
///
/// Loop 1 fills `queue_j` up to `⌊u_j⌋` with full bundles, always serving the
/// client whose nearest residual unit mass is closest. Loop 2 adds the last
/// bundle for fractional `u_j`, serving the largest residual mass first.
pub fn alg_bundle(inst: &ClusterInstance, split: &mut SplitSolution) -> Result<BundleStructure> {
    let nc = inst.clients();
    let mut out = BundleStructure { queues: vec![Vec::new(); nc], ..Default::default() };
    let mut residual = split.support.clone();
    let mut owner: Vec<Option<BundleRef>> = vec![None; split.copies()];
    let bounds: Vec<(usize, usize)> = split.u.iter().map(|&u| floor_ceil(u)).collect();

    loop {
        let mut pick: Option<(f64, usize)> = None;
        for j in (0..nc).filter(|&j| out.queues[j].len() < bounds[j].0) {
            let (len, mass, _) = nearest_unit(split, &residual[j]);
            if mass < 1.0 - MASS_TOL {
                return Err(internal!("client {j} ran out of residual mass before its full bundles"));
            }
            let r = split.d_max(inst, &residual[j][..len], j);
            if pick.map_or(true, |(best, _)| r < best) {
                pick = Some((r, j));
            }
        }
        let Some((_, j)) = pick else { break };
        let (len, _, need) = nearest_unit(split, &residual[j]);
        if let Some(b) = first_owned(&owner, &residual[j][..len], true) {
            let members = out.copies(b).to_vec();
            residual[j].retain(|i| !members.contains(i));
            out.queues[j].push(b);
        } else {
            let last = residual[j][len - 1];
            cut_last(split, &mut residual, &mut owner, last, need);
            let bundle: Vec<usize> = residual[j][..len].to_vec();
            let b = BundleRef::Full(out.full.len());
            for &i in &bundle {
                owner[i] = Some(b);
            }
            residual[j].drain(..len);
            out.full.push(bundle);
            out.queues[j].push(b);
        }
    }

    loop {
        let mut pick: Option<(f64, usize)> = None;
        for j in (0..nc).filter(|&j| out.queues[j].len() < bounds[j].1) {
            let (_, mass, _) = nearest_unit(split, &residual[j]);
            if mass <= MASS_TOL {
                return Err(internal!("client {j} has an empty residual support for its last bundle"));
            }
            if pick.map_or(true, |(best, _)| mass > best) {
                pick = Some((mass, j));
            }
        }
        let Some((mass, j)) = pick else { break };
        let (len, _, need) = nearest_unit(split, &residual[j]);
        let prefix = &residual[j][..len];
        if let Some(b) = first_owned(&owner, prefix, true).or_else(|| first_owned(&owner, prefix, false)) {
            if let BundleRef::Partial(k) = b {
                out.partial_count[k] += 1;
            }
            out.queues[j].push(b);
        } else if mass >= 1.0 - MASS_TOL {
            let last = prefix[len - 1];
            cut_last(split, &mut residual, &mut owner, last, need);
            let bundle: Vec<usize> = residual[j][..len].to_vec();
            let b = BundleRef::Full(out.full.len());
            for &i in &bundle {
                owner[i] = Some(b);
            }
            out.full.push(bundle);
            out.queues[j].push(b);
        } else {
            let bundle = prefix.to_vec();
            let b = BundleRef::Partial(out.partial.len());
            for &i in &bundle {
                owner[i] = Some(b);
            }
            out.partial.push(bundle);
            out.partial_count.push(1);
            out.queues[j].push(b);
        }
        residual[j].clear();
    }
    Ok(out)
}

/// Disjointness, bundle masses, queue lengths and reuse counters.
pub fn check_bundle_invariants(split: &SplitSolution, b: &BundleStructure) -> Result<()> {
    let mut seen = vec![false; split.copies()];
    for u in b.full.iter().chain(&b.partial) {
        for &i in u {
            if std::mem::replace(&mut seen[i], true) {
                return Err(internal!("copy {i} lies in two bundles"));
            }
        }
    }
    for (k, u) in b.full.iter().enumerate() {
        if (split.mass(u) - 1.0).abs() > 1e-6 {
            return Err(internal!("full bundle {k} has mass {}", split.mass(u)));
        }
    }
    for (k, u) in b.partial.iter().enumerate() {
        if split.mass(u) >= 1.0 - MASS_TOL || u.is_empty() {
            return Err(internal!("partial bundle {k} has mass {}", split.mass(u)));
        }
    }
    let mut count = vec![0usize; b.partial.len()];
    for (j, q) in b.queues.iter().enumerate() {
        if q.len() != floor_ceil(split.u[j]).1 {
            return Err(internal!("queue of client {j} has {} bundles for u = {}", q.len(), split.u[j]));
        }
        for r in q {
            if let BundleRef::Partial(k) = r {
                count[*k] += 1;
            }
        }
    }
    if count != b.partial_count {
        return Err(internal!("reuse counters do not match the queues"));
    }
    Ok(())
}

/// `d_max(j, U_{j,t}) ≤ 3·d_max(j, V_{j,t})` for `t ≤ ⌊u_j⌋`, and `≤ 3R` for the last bundle.
pub fn check_bundle_radii(inst: &ClusterInstance, split: &SplitSolution, b: &BundleStructure, r: f64) -> Result<()> {
    let slack = |v: f64| v * (1.0 + 1e-9) + 1e-12;
    for (j, q) in b.queues.iter().enumerate() {
        let (fl, _) = floor_ceil(split.u[j]);
        for (t, &bundle) in q.iter().enumerate() {
            let got = split.d_max(inst, b.copies(bundle), j);
            let limit = if t < fl {
                let v = split
                    .unit_mass_radius(inst, j, t + 1)
                    .ok_or_else(|| internal!("client {j} has fewer than {} unit masses", t + 1))?;
                3.0 * v
            } else {
                3.0 * r
            };
            if got > slack(limit) {
                return Err(internal!("bundle {t} of client {j} reaches {got} > {limit}"));
            }
        }
    }
    Ok(())
}
