//! Nearest-first normalisation and facility splitting.

use crate::error::{internal, Result};
use crate::model::ClusterInstance;

use super::lp::FractionalCluster;

/// Masses closer than this are considered equal.
pub(crate) const MASS_TOL: f64 = 1e-7;

/// Copies `F′` of the facilities, each with its own opening `y`, and each
/// client's support `F_j` listed nearest first. `x_ij = y_i` on the support
/// and 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSolution {
    /// Original facility of each copy.
    pub g: Vec<usize>,
    pub y: Vec<f64>,
    pub support: Vec<Vec<usize>>,
    pub u: Vec<f64>,
}

impl SplitSolution {
    pub fn copies(&self) -> usize {
        self.g.len()
    }

    pub fn x(&self, copy: usize, client: usize) -> f64 {
        if self.support[client].contains(&copy) {
            self.y[copy]
        } else {
            0.0
        }
    }

    pub fn mass(&self, copies: &[usize]) -> f64 {
        copies.iter().map(|&i| self.y[i]).sum()
    }

    pub fn dist(&self, inst: &ClusterInstance, copy: usize, client: usize) -> f64 {
        inst.d(self.g[copy], client)
    }

    /// `max_{i∈U} d(g(i), j)`, 0 for the empty set.
    pub fn d_max(&self, inst: &ClusterInstance, copies: &[usize], client: usize) -> f64 {
        copies.iter().map(|&i| self.dist(inst, i, client)).fold(0.0, f64::max)
    }

    /// `d_max` of the `t`-th closest unit mass (1-based) of `F_j`.
    pub fn unit_mass_radius(&self, inst: &ClusterInstance, client: usize, t: usize) -> Option<f64> {
        let mut acc = 0.0;
        for &i in &self.support[client] {
            acc += self.y[i];
            if acc >= t as f64 - MASS_TOL {
                return Some(self.dist(inst, i, client));
            }
        }
        None
    }

    /// Splits `copy` so that it keeps `keep`; the remainder gets a fresh id
    /// placed right after it in every support.
    pub(crate) fn split_copy(&mut self, copy: usize, keep: f64) -> usize {
        let fresh = self.g.len();
        self.g.push(self.g[copy]);
        self.y.push(self.y[copy] - keep);
        self.y[copy] = keep;
        for s in &mut self.support {
            if let Some(p) = s.iter().position(|&i| i == copy) {
                s.insert(p + 1, fresh);
            }
        }
        fresh
    }
}

/// Rounds values within [`MASS_TOL`] of an integer to it.
pub(crate) fn snap_integer(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= MASS_TOL {
        r
    } else {
        v
    }
}

/// Reassigns each client nearest first given `u, y`, then splits every
/// facility at the distinct connection levels so each support uses whole copies.
pub fn split_and_normalize(inst: &ClusterInstance, frac: &FractionalCluster, r: f64) -> SplitSolution {
    let (nc, nf) = (inst.clients(), inst.facilities());
    // nearest-first x
    let mut x = vec![0.0; nc * nf];
    let mut u = vec![0.0; nc];
    for j in 0..nc {
        let mut left = snap_integer(frac.u[j]);
        for i in inst.facilities_by_distance(j) {
            if left <= MASS_TOL {
                break;
            }
            if inst.d(i, j) > r || frac.y[i] <= 0.0 {
                continue;
            }
            let take = left.min(frac.y[i]);
            x[j * nf + i] = if (frac.y[i] - take).abs() <= MASS_TOL { frac.y[i] } else { take };
            left -= take;
        }
        u[j] = snap_integer((0..nf).map(|i| x[j * nf + i]).sum());
    }
    // cut points per facility
    let mut g = Vec::new();
    let mut y = Vec::new();
    let mut pieces: Vec<Vec<(f64, usize)>> = Vec::with_capacity(nf);
    for i in 0..nf {
        let yi = frac.y[i];
        let mut levels: Vec<f64> = (0..nc).map(|j| x[j * nf + i]).filter(|&v| v > 0.0).collect();
        levels.push(yi);
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| (*a - *b).abs() <= MASS_TOL);
        // the top level stands for y_i itself
        if let Some(last) = levels.last_mut() {
            *last = yi;
        }
        let mut prev = 0.0;
        let mut ids = Vec::new();
        for lv in levels {
            if yi <= 0.0 {
                break;
            }
            ids.push((lv, g.len()));
            g.push(i);
            y.push(lv - prev);
            prev = lv;
        }
        pieces.push(ids);
    }
    let mut support = vec![Vec::new(); nc];
    for (j, s) in support.iter_mut().enumerate() {
        for i in inst.facilities_by_distance(j) {
            let v = x[j * nf + i];
            if v <= 0.0 {
                continue;
            }
            for &(lv, id) in &pieces[i] {
                s.push(id);
                if lv >= v - MASS_TOL {
                    break;
                }
            }
        }
    }
    SplitSolution { g, y, support, u }
}

/// Checks the split invariants against the LP solution it came from.
pub fn check_split(inst: &ClusterInstance, frac: &FractionalCluster, split: &SplitSolution, r: f64) -> Result<()> {
    let nf = inst.facilities();
    let mut per_orig = vec![0.0; nf];
    for (c, &i) in split.g.iter().enumerate() {
        if split.y[c] <= 0.0 {
            return Err(internal!("copy {c} has non-positive opening"));
        }
        per_orig[i] += split.y[c];
    }
    for i in 0..nf {
        if (per_orig[i] - frac.y[i]).abs() > 1e-6 {
            return Err(internal!("copies of facility {i} carry {} instead of {}", per_orig[i], frac.y[i]));
        }
    }
    if split.copies() > nf * (inst.clients() + 1) {
        return Err(internal!("split produced {} copies", split.copies()));
    }
    for j in 0..inst.clients() {
        let s = &split.support[j];
        let mass = split.mass(s);
        if (mass - split.u[j]).abs() > 1e-6 || (split.u[j] - frac.u[j]).abs() > 1e-6 {
            return Err(internal!("client {j} carries {mass}, u = {}, lp u = {}", split.u[j], frac.u[j]));
        }
        let far = split.d_max(inst, s, j);
        if far > r {
            return Err(internal!("client {j} uses a copy beyond R"));
        }
        for w in s.windows(2) {
            if split.dist(inst, w[0], j) > split.dist(inst, w[1], j) {
                return Err(internal!("support of client {j} is not nearest first"));
            }
        }
        // every strictly nearer facility is used in full
        for i in 0..nf {
            if inst.d(i, j) < far && frac.y[i] > 0.0 {
                let used: f64 = s.iter().filter(|&&c| split.g[c] == i).map(|&c| split.y[c]).sum();
                if (used - frac.y[i]).abs() > 1e-6 {
                    return Err(internal!("client {j} skips part of nearer facility {i}"));
                }
            }
        }
    }
    Ok(())
}
