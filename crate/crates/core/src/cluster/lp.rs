//! Cl, FCl and OCl builders over `(x, u, y)`.

use crate::error::{internal, Result};
use crate::lp::{solve_lp, Cmp, LpModel, LpStatus, Sense};
use crate::model::{ClusterInstance, FacilityConstraint};
use crate::sparsify::{telescoped_coefficients, ThresholdSequence};

const SUPPORT_TOL: f64 = 1e-9;

/// `(x, u, y)` with `x` client-major: `x[j * F + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalCluster {
    pub clients: usize,
    pub facilities: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl FractionalCluster {
    pub fn x(&self, facility: usize, client: usize) -> f64 {
        self.x[client * self.facilities + facility]
    }
}

/// Rows beyond `P_c(R)`.
#[derive(Debug, Clone, Copy)]
pub enum ClusterRows<'a> {
    /// Plain `P_c(R)` with the facility constraint.
    Basic,
    Top { ell: usize, q: f64, b: f64, t: f64 },
    Ordered { sparse: &'a [Vec<f64>], b: f64, seq: &'a ThresholdSequence },
}

#[derive(Debug, Clone)]
pub struct ClusterLp {
    pub model: LpModel,
    /// `x_var[j * F + i]`, `None` where `d(i, j) > R`.
    pub x_var: Vec<Option<usize>>,
    pub u_var: Vec<usize>,
    pub y_var: Vec<usize>,
    clients: usize,
    facilities: usize,
}

impl ClusterLp {
    pub fn extract(&self, values: &[f64]) -> FractionalCluster {
        let snap = |v: f64, hi: f64| {
            let v = v.clamp(0.0, hi);
            if v < SUPPORT_TOL {
                0.0
            } else if (hi - v).abs() < SUPPORT_TOL {
                hi
            } else {
                v
            }
        };
        let y: Vec<f64> = self.y_var.iter().map(|&v| snap(values[v], 1.0)).collect();
        let x = self
            .x_var
            .iter()
            .enumerate()
            .map(|(k, v)| v.map_or(0.0, |v| snap(values[v], 1.0).min(y[k % self.facilities])))
            .collect();
        let u = self.u_var.iter().map(|&v| snap(values[v], f64::INFINITY).max(0.0)).collect();
        FractionalCluster { clients: self.clients, facilities: self.facilities, x, u, y }
    }

    pub fn solve(&self) -> Result<Option<FractionalCluster>> {
        let sol = solve_lp(&self.model)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(self.extract(&sol.values))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(internal!("cluster LP reported unbounded")),
        }
    }

    /// Sets `Σ_j α_j u_j` as the objective.
    pub fn set_client_objective(&mut self, sense: Sense, alpha: &[f64]) {
        let coefs = self.u_var.iter().zip(alpha).filter(|(_, a)| **a != 0.0).map(|(&v, &a)| (v, a)).collect();
        self.model.set_objective(sense, coefs);
    }

    fn client_terms(&self, inst: &ClusterInstance, j: usize, mut coef: impl FnMut(usize) -> Option<f64>) -> Vec<(usize, f64)> {
        (0..inst.facilities())
            .filter_map(|i| {
                let v = self.x_var[j * inst.facilities() + i]?;
                coef(i).map(|c| (v, c))
            })
            .collect()
    }
}

/// `P_c(R)` plus the facility constraint, the requested rows, and the
/// coverage row when `coverage` is set.
pub fn build_cluster_model(inst: &ClusterInstance, r: f64, rows: ClusterRows<'_>, coverage: bool) -> ClusterLp {
    let (nc, nf) = (inst.clients(), inst.facilities());
    let mut model = LpModel::new();
    let y_var: Vec<usize> = (0..nf).map(|i| model.add_var(format!("y_{i}"), Some(0.0), Some(1.0))).collect();
    let u_var: Vec<usize> = (0..nc)
        .map(|j| model.add_var(format!("u_{j}"), Some(inst.lower()[j] as f64), Some(inst.upper()[j] as f64)))
        .collect();
    let mut x_var = vec![None; nc * nf];
    for j in 0..nc {
        for i in 0..nf {
            if inst.d(i, j) <= r {
                let v = model.add_var(format!("x_{i}_{j}"), Some(0.0), Some(1.0));
                x_var[j * nf + i] = Some(v);
                model.add_row(format!("open_{i}_{j}"), vec![(v, 1.0), (y_var[i], -1.0)], Cmp::Le, 0.0);
            }
        }
        let mut coefs: Vec<(usize, f64)> = (0..nf).filter_map(|i| x_var[j * nf + i].map(|v| (v, 1.0))).collect();
        coefs.push((u_var[j], -1.0));
        model.add_row(format!("connect_{j}"), coefs, Cmp::Eq, 0.0);
    }
    if coverage {
        model.add_row("coverage", u_var.iter().map(|&v| (v, 1.0)).collect(), Cmp::Ge, inst.coverage() as f64);
    }
    match inst.constraint() {
        FacilityConstraint::Cardinality(k) => {
            model.add_row("cardinality", y_var.iter().map(|&v| (v, 1.0)).collect(), Cmp::Le, *k as f64);
        }
        FacilityConstraint::Partition(pm) => {
            for (p, (part, cap)) in pm.parts().iter().zip(pm.capacities()).enumerate() {
                if !part.is_empty() {
                    model.add_row(format!("part_{p}"), part.iter().map(|&i| (y_var[i], 1.0)).collect(), Cmp::Le, *cap as f64);
                }
            }
        }
        FacilityConstraint::Knapsack(ks) => {
            let coefs = y_var.iter().zip(&ks.weights).filter(|(_, w)| **w != 0.0).map(|(&v, &w)| (v, w)).collect();
            model.add_row("budget", coefs, Cmp::Le, ks.budget);
        }
    }
    let mut lp = ClusterLp { model, x_var, u_var, y_var, clients: nc, facilities: nf };
    match rows {
        ClusterRows::Basic => {}
        ClusterRows::Top { ell, q, b, t } => {
            for j in 0..nc {
                let count = lp.client_terms(inst, j, |i| (inst.d(i, j) > t).then_some(1.0));
                if count.is_empty() {
                    continue;
                }
                let mass = lp.client_terms(inst, j, |i| (inst.d(i, j) > t).then(|| inst.d(i, j).powf(q)));
                lp.model.add_row(format!("count_{j}"), count, Cmp::Le, ell as f64);
                lp.model.add_row(format!("mass_{j}"), mass, Cmp::Le, b.powf(q));
            }
        }
        ClusterRows::Ordered { sparse, b, seq } => {
            let pos = seq.pos();
            let coefs = telescoped_coefficients(sparse, pos);
            for j in 0..nc {
                for (k, &ell) in pos.members().iter().enumerate() {
                    let t = seq.value_at(k);
                    let count = lp.client_terms(inst, j, |i| (inst.d(i, j) > t).then_some(1.0));
                    if !count.is_empty() {
                        lp.model.add_row(format!("count_{j}_{ell}"), count, Cmp::Le, ell as f64);
                    }
                }
                for (n, c) in coefs.iter().enumerate() {
                    let mut acc = vec![0.0; nf];
                    for (k, ck) in c.iter().enumerate().filter(|(_, ck)| **ck != 0.0) {
                        let t = seq.value_at(k);
                        for i in (0..nf).filter(|&i| inst.d(i, j) > t) {
                            acc[i] += ck * inst.d(i, j);
                        }
                    }
                    let row = lp.client_terms(inst, j, |i| (acc[i] != 0.0).then_some(acc[i]));
                    if !row.is_empty() {
                        lp.model.add_row(format!("mass_{j}_{n}"), row, Cmp::Le, b);
                    }
                }
            }
        }
    }
    lp
}

/// `Cl(R, B, T)`.
pub fn build_cluster_lp(inst: &ClusterInstance, ell: usize, q: f64, r: f64, b: f64, t: f64) -> ClusterLp {
    build_cluster_model(inst, r, ClusterRows::Top { ell, q, b, t }, true)
}

/// `OCl(R, B, T)` for sparsified weights of dimension `max(r₀, 1)`.
pub fn build_ordered_cluster_lp(
    inst: &ClusterInstance,
    sparse: &[Vec<f64>],
    r: f64,
    b: f64,
    seq: &ThresholdSequence,
) -> ClusterLp {
    build_cluster_model(inst, r, ClusterRows::Ordered { sparse, b, seq }, true)
}

/// `FCl(R, B, T)`: `Cl` without the coverage row.
pub fn build_fair_cluster_lp(inst: &ClusterInstance, ell: usize, q: f64, r: f64, b: f64, t: f64) -> ClusterLp {
    build_cluster_model(inst, r, ClusterRows::Top { ell, q, b, t }, false)
}
