//! Constraint generation over `(α, μ) ∈ Q^d_{≥0} × Q`.

use std::collections::HashSet;
use std::hash::Hash;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{internal, Error, Result};

use super::{solve_lp_exact, Cmp, LpModel, LpStatus};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualPoint {
    pub alpha: Vec<BigRational>,
    pub mu: BigRational,
}

/// `alpha·α + mu·μ (cmp) rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub alpha: Vec<BigRational>,
    pub mu: BigRational,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

impl Halfspace {
    pub fn lhs(&self, p: &DualPoint) -> BigRational {
        self.alpha.iter().zip(&p.alpha).fold(&self.mu * &p.mu, |acc, (a, x)| acc + a * x)
    }

    pub fn contains(&self, p: &DualPoint) -> bool {
        let v = self.lhs(p);
        match self.cmp {
            Cmp::Le => v <= self.rhs,
            Cmp::Ge => v >= self.rhs,
            Cmp::Eq => v == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleAnswer<T> {
    /// The point lies in the target polytope.
    Member,
    /// A solution whose constraint the point violates.
    Cut(T, Halfspace),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutOutcome<T> {
    /// The cuts generated so far plus the base constraint are infeasible;
    /// carries the cut-generating solutions in generation order.
    Empty(Vec<T>),
    /// The oracle accepted this point.
    Refuted(DualPoint),
}

fn add_halfspace(lp: &mut LpModel<BigRational>, vars: &[usize], h: &Halfspace, name: String) {
    let d = vars.len() - 1;
    let mut coefs: Vec<(usize, BigRational)> =
        h.alpha.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| (vars[i], a.clone())).collect();
    if !h.mu.is_zero() {
        coefs.push((vars[d], h.mu.clone()));
    }
    lp.add_row(name, coefs, h.cmp, h.rhs.clone());
}

/// Generates cuts until the system is empty or the oracle accepts a point.
pub fn cutting_plane<T, F>(dim: usize, base: &Halfspace, mut oracle: F, limit: usize) -> Result<CutOutcome<T>>
where
    T: Clone + Eq + Hash,
    F: FnMut(&DualPoint) -> Result<OracleAnswer<T>>,
{
    if base.alpha.len() != dim {
        return Err(Error::Contract(format!("base constraint has {} coefficients, expected {dim}", base.alpha.len())));
    }
    let mut lp: LpModel<BigRational> = LpModel::new();
    let mut vars: Vec<usize> = (0..dim).map(|i| lp.add_nonneg(format!("alpha{i}"))).collect();
    vars.push(lp.add_var("mu", None, None));
    add_halfspace(&mut lp, &vars, base, "base".into());

    let mut history: Vec<T> = Vec::new();
    let mut seen: HashSet<T> = HashSet::new();
    for _ in 0..limit {
        let sol = solve_lp_exact(&lp)?;
        match sol.status {
            LpStatus::Infeasible => return Ok(CutOutcome::Empty(history)),
            LpStatus::Unbounded => return Err(internal!("zero-objective feasibility LP reported unbounded")),
            LpStatus::Optimal => {}
        }
        let point = DualPoint { alpha: sol.values[..dim].to_vec(), mu: sol.values[dim].clone() };
        match oracle(&point)? {
            OracleAnswer::Member => return Ok(CutOutcome::Refuted(point)),
            OracleAnswer::Cut(item, h) => {
                if h.alpha.len() != dim {
                    return Err(internal!("oracle cut has the wrong dimension"));
                }
                if h.contains(&point) {
                    return Err(internal!("oracle cut does not separate the query point"));
                }
                if !seen.insert(item.clone()) {
                    return Err(internal!("oracle returned the same cut twice"));
                }
                add_halfspace(&mut lp, &vars, &h, format!("cut{}", history.len()));
                history.push(item);
            }
        }
    }
    Err(Error::ResourceLimit(format!("cutting plane exceeded {limit} iterations")))
}
