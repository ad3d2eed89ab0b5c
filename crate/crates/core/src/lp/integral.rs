//! Integral optimisation over bundle systems.
//!
//! Each solver maximises `Σ_{U ∈ U₂} profit_U · z(U)` subject to
//! `z(U) = 1` on full bundles and `z(U) ≤ 1` on partial bundles, plus a
//! facility-side constraint. Copies outside every bundle stay closed.

use crate::cluster::BundleStructure;
use crate::error::{internal, invalid, Error, Result};
use crate::model::PartitionMatroid;

use super::{solve_lp, Cmp, FlowNetwork, LpModel, LpStatus, Sense};

enum Cap<'a> {
    Total(usize),
    Parts(&'a PartitionMatroid),
}

fn check_inputs(bundles: &BundleStructure, profits: &[f64], g: &[usize], originals: usize) -> Result<()> {
    if profits.len() != bundles.partial.len() {
        return Err(invalid!("need one profit per partial bundle"));
    }
    if profits.iter().any(|p| !p.is_finite()) {
        return Err(invalid!("bundle profits must be finite"));
    }
    let mut seen = vec![false; g.len()];
    for u in bundles.full.iter().chain(&bundles.partial) {
        for &i in u {
            if i >= g.len() {
                return Err(invalid!("bundle names unknown copy {i}"));
            }
            if seen[i] {
                return Err(invalid!("copy {i} lies in two bundles"));
            }
            seen[i] = true;
        }
    }
    if let Some(&o) = g.iter().find(|&&o| o >= originals) {
        return Err(invalid!("copy map names unknown facility {o}"));
    }
    Ok(())
}

fn bundle_flow(
    bundles: &BundleStructure,
    profits: &[f64],
    g: &[usize],
    originals: usize,
    cap: Cap<'_>,
) -> Result<Vec<u8>> {
    check_inputs(bundles, profits, g, originals)?;
    let mut net = FlowNetwork::new(2);
    let (s, t) = (0, 1);
    let orig_nodes: Vec<usize> = (0..originals).map(|_| net.add_node()).collect();
    match cap {
        Cap::Total(k) => {
            let hub = net.add_node();
            for &o in &orig_nodes {
                net.add_arc(o, hub, 0, 1, 0.0);
            }
            net.add_arc(hub, t, 0, k as i64, 0.0);
        }
        Cap::Parts(pm) => {
            if pm.parts().iter().flatten().any(|&i| i >= originals) {
                return Err(invalid!("partition matroid larger than the facility set"));
            }
            let part_nodes: Vec<usize> = pm
                .capacities()
                .iter()
                .map(|&c| {
                    let p = net.add_node();
                    net.add_arc(p, t, 0, c as i64, 0.0);
                    p
                })
                .collect();
            for (i, &o) in orig_nodes.iter().enumerate() {
                net.add_arc(o, part_nodes[pm.part_of(i)], 0, 1, 0.0);
            }
        }
    }
    let mut copy_arcs = vec![None; g.len()];
    let mut add_bundle = |net: &mut FlowNetwork, copies: &[usize], lower: i64, cost: f64| {
        let b = net.add_node();
        net.add_arc(s, b, lower, 1, cost);
        for &i in copies {
            copy_arcs[i] = Some(net.add_arc(b, orig_nodes[g[i]], 0, 1, 0.0));
        }
    };
    for u in &bundles.full {
        add_bundle(&mut net, u, 1, 0.0);
    }
    for (u, p) in bundles.partial.iter().zip(profits) {
        add_bundle(&mut net, u, 0, -p);
    }
    let total = bundles.full.len() + bundles.partial.len();
    net.add_arc(t, s, 0, total as i64, 0.0);
    let Some(flow) = net.min_cost_circulation()? else {
        return Err(Error::Infeasible("full bundles cannot all be opened under the facility constraint".into()));
    };
    let z: Vec<u8> = copy_arcs
        .iter()
        .map(|a| match a {
            Some(e) => flow[*e] as u8,
            None => 0,
        })
        .collect();
    if z.iter().any(|&v| v > 1) {
        return Err(internal!("bundle flow produced a non 0/1 value"));
    }
    Ok(z)
}

/// Cardinality version: `z(g⁻¹(i)) ≤ 1` for every facility and `z(F′) ≤ k`.
pub fn solve_two_laminar_integral(
    bundles: &BundleStructure,
    profits: &[f64],
    k: usize,
    g: &[usize],
    originals: usize,
) -> Result<Vec<u8>> {
    bundle_flow(bundles, profits, g, originals, Cap::Total(k))
}

/// Partition-matroid version: at most `c_P` opened facilities per part.
pub fn solve_partition_matroid_integral(
    bundles: &BundleStructure,
    profits: &[f64],
    matroid: &PartitionMatroid,
    g: &[usize],
    originals: usize,
) -> Result<Vec<u8>> {
    bundle_flow(bundles, profits, g, originals, Cap::Parts(matroid))
}

/// Basic optimal solution of the knapsack bundle LP.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackVertex {
    /// Opening value per copy; entries within 1e-9 of 0 or 1 are snapped.
    pub z: Vec<f64>,
    /// Copies with a strictly fractional value (at most two).
    pub fractional: Vec<usize>,
    pub objective: f64,
}

/// Knapsack version: `Σ wt_{g(i)} z_i ≤ W`; the per-facility rows are dropped.
pub fn solve_knapsack_basic(
    bundles: &BundleStructure,
    profits: &[f64],
    weights: &[f64],
    budget: f64,
    g: &[usize],
) -> Result<KnapsackVertex> {
    check_inputs(bundles, profits, g, weights.len())?;
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !budget.is_finite() || budget < 0.0 {
        return Err(invalid!("knapsack weights and budget must be finite and non-negative"));
    }
    let mut lp = LpModel::new();
    let mut var = vec![None; g.len()];
    for u in bundles.full.iter().chain(&bundles.partial) {
        for &i in u {
            var[i] = Some(lp.add_nonneg(format!("z{i}")));
        }
    }
    for (k, u) in bundles.full.iter().enumerate() {
        lp.add_row(format!("full{k}"), u.iter().map(|&i| (var[i].unwrap(), 1.0)).collect(), Cmp::Eq, 1.0);
    }
    let mut objective = Vec::new();
    for (k, (u, p)) in bundles.partial.iter().zip(profits).enumerate() {
        lp.add_row(format!("partial{k}"), u.iter().map(|&i| (var[i].unwrap(), 1.0)).collect(), Cmp::Le, 1.0);
        objective.extend(u.iter().map(|&i| (var[i].unwrap(), *p)));
    }
    let knap: Vec<(usize, f64)> =
        (0..g.len()).filter_map(|i| var[i].map(|v| (v, weights[g[i]]))).filter(|(_, w)| *w != 0.0).collect();
    lp.add_row("budget", knap, Cmp::Le, budget);
    lp.set_objective(Sense::Maximize, objective);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("knapsack bundle LP is infeasible".into())),
        LpStatus::Unbounded => return Err(internal!("knapsack bundle LP is unbounded")),
    }
    let mut z = vec![0.0; g.len()];
    let mut fractional = Vec::new();
    for i in 0..g.len() {
        let Some(v) = var[i] else { continue };
        let x = sol.values[v];
        z[i] = if x.abs() <= 1e-9 {
            0.0
        } else if (x - 1.0).abs() <= 1e-9 {
            1.0
        } else {
            fractional.push(i);
            x
        };
    }
    if fractional.len() > 2 {
        return Err(internal!("knapsack vertex has {} fractional entries", fractional.len()));
    }
    Ok(KnapsackVertex { z, fractional, objective: sol.objective })
}
