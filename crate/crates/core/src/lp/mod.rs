//! Linear programs, min-cost flow, integral bundle solvers and the
//! cutting-plane driver.

mod cutting;
mod dump;
mod flow;
mod integral;
pub(crate) mod scalar;
mod simplex;

use num_rational::BigRational;

use crate::error::{invalid, Result};

pub use cutting::{cutting_plane, CutOutcome, DualPoint, Halfspace, OracleAnswer};
pub use dump::{dump_if_enabled, LP_DUMP_ENV};
pub use flow::{FlowArc, FlowNetwork};
pub use integral::{
    solve_knapsack_basic, solve_partition_matroid_integral, solve_two_laminar_integral, KnapsackVertex,
};
pub use scalar::Scalar;

/// Residual tolerance for floating-point solves.
pub const LP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A variable with optional bounds (`None` is unbounded on that side).
#[derive(Debug, Clone, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub lower: Option<S>,
    pub upper: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub coefs: Vec<(usize, S)>,
    pub cmp: Cmp,
    pub rhs: S,
}

/// Sparse linear program over scalar type `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel<S = f64> {
    pub vars: Vec<Variable<S>>,
    pub rows: Vec<Constraint<S>>,
    pub objective: Vec<(usize, S)>,
    pub sense: Sense,
}

impl<S: Scalar> Default for LpModel<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> LpModel<S> {
    pub fn new() -> Self {
        LpModel { vars: Vec::new(), rows: Vec::new(), objective: Vec::new(), sense: Sense::Minimize }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: Option<S>, upper: Option<S>) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper });
        self.vars.len() - 1
    }

    /// Variable in `[0, +inf)`.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, Some(S::zero()), None)
    }

    pub fn add_row(&mut self, name: impl Into<String>, coefs: Vec<(usize, S)>, cmp: Cmp, rhs: S) {
        self.rows.push(Constraint { name: name.into(), coefs, cmp, rhs });
    }

    pub fn set_objective(&mut self, sense: Sense, coefs: Vec<(usize, S)>) {
        self.sense = sense;
        self.objective = coefs;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars.len();
        for v in &self.vars {
            for b in v.lower.iter().chain(v.upper.iter()) {
                if !b.is_finite_value() {
                    return Err(invalid!("variable {} has a non-finite bound", v.name));
                }
            }
            if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
                if l > u {
                    return Err(invalid!("variable {} has lower bound above upper bound", v.name));
                }
            }
        }
        let check = |coefs: &[(usize, S)], what: &str| -> Result<()> {
            for (k, c) in coefs {
                if *k >= n {
                    return Err(invalid!("{what} references unknown variable {k}"));
                }
                if !c.is_finite_value() {
                    return Err(invalid!("{what} has a non-finite coefficient"));
                }
            }
            Ok(())
        };
        for r in &self.rows {
            check(&r.coefs, &format!("row {}", r.name))?;
            if !r.rhs.is_finite_value() {
                return Err(invalid!("row {} has a non-finite right-hand side", r.name));
            }
        }
        check(&self.objective, "objective")
    }

    /// Largest violation of a row or bound by `values`.
    pub fn max_violation(&self, values: &[S]) -> f64 {
        let mut worst = 0.0f64;
        for (v, x) in self.vars.iter().zip(values) {
            if let Some(l) = &v.lower {
                worst = worst.max((l.clone() - x.clone()).to_f64());
            }
            if let Some(u) = &v.upper {
                worst = worst.max((x.clone() - u.clone()).to_f64());
            }
        }
        for r in &self.rows {
            let act = r.coefs.iter().fold(S::zero(), |acc, (k, c)| acc + c.clone() * values[*k].clone());
            let gap = (act - r.rhs.clone()).to_f64();
            let viol = match r.cmp {
                Cmp::Le => gap,
                Cmp::Ge => -gap,
                Cmp::Eq => gap.abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve; `values` and `basic` are meaningful only when optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S = f64> {
    pub status: LpStatus,
    pub values: Vec<S>,
    pub objective: S,
    pub basic: Vec<bool>,
    pub diagnostic: Option<String>,
}

impl<S> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Floating-point solve; optimal solutions are residual-checked against [`LP_TOLERANCE`].
pub fn solve_lp(model: &LpModel<f64>) -> Result<LpSolution<f64>> {
    model.validate()?;
    dump_if_enabled(model, "lp");
    let sol = simplex::solve(model)?;
    if sol.is_optimal() {
        let scale = model
            .rows
            .iter()
            .map(|r| r.rhs.abs().max(r.coefs.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)))
            .fold(1.0, f64::max);
        let viol = model.max_violation(&sol.values);
        if viol > LP_TOLERANCE * scale {
            return Err(crate::error::Error::Solver(format!(
                "simplex returned a point violating constraints by {viol:e}"
            )));
        }
    }
    Ok(sol)
}

/// Exact rational solve.
pub fn solve_lp_exact(model: &LpModel<BigRational>) -> Result<LpSolution<BigRational>> {
    model.validate()?;
    let sol = simplex::solve(model)?;
    if sol.is_optimal() && model.max_violation(&sol.values) > 0.0 {
        return Err(crate::error::internal!("exact simplex returned an infeasible point"));
    }
    Ok(sol)
}
