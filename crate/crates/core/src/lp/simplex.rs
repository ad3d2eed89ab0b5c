//! Dense two-phase tableau simplex.

use crate::error::{Error, Result};

use super::{Cmp, LpModel, LpSolution, LpStatus, Scalar, Sense};

/// Degenerate pivots tolerated before switching to Bland's rule for good.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone)]
enum ColumnMap<S> {
    /// `x = lo + x'`
    Shift(usize, S),
    /// `x = hi − x'`
    Flip(usize, S),
    /// `x = x⁺ − x⁻`
    Free(usize, usize),
}

struct Tableau<S> {
    a: Vec<Vec<S>>,
    b: Vec<S>,
    basis: Vec<usize>,
    row_names: Vec<String>,
    d: Vec<S>,
    z: S,
    allowed: Vec<bool>,
    bland: bool,
    degenerate: usize,
    iterations: usize,
    max_iterations: usize,
}

enum Run {
    Optimal,
    Unbounded,
}

impl<S: Scalar> Tableau<S> {
    fn cols(&self) -> usize {
        self.d.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            if !v.is_zero() {
                *v = (v.clone() / piv.clone()).clean();
            }
        }
        self.a[r][c] = S::one();
        self.b[r] = (self.b[r].clone() / piv).clean();
        let prow = self.a[r].clone();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (k, pk) in prow.iter().enumerate() {
                if !pk.is_zero() {
                    self.a[i][k] = (self.a[i][k].clone() - f.clone() * pk.clone()).clean();
                }
            }
            self.a[i][c] = S::zero();
            self.b[i] = (self.b[i].clone() - f * pb.clone()).clean();
            if self.b[i] < S::zero() && !self.b[i].is_neg() {
                // numerical noise below the zero tolerance
                self.b[i] = S::zero();
            }
        }
        if !self.d[c].is_zero() {
            let f = self.d[c].clone();
            for (k, pk) in prow.iter().enumerate() {
                if !pk.is_zero() {
                    self.d[k] = (self.d[k].clone() - f.clone() * pk.clone()).clean();
                }
            }
            self.d[c] = S::zero();
            self.z = self.z.clone() + f * pb;
        }
        self.basis[r] = c;
    }

    fn entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.cols() {
            if !self.allowed[j] || !self.d[j].is_neg() {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            match best {
                Some(b) if self.d[j] >= self.d[b] => {}
                _ => best = Some(j),
            }
        }
        best
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let mut min: Option<S> = None;
        for r in 0..self.a.len() {
            if self.a[r][c].is_pos() {
                let ratio = self.b[r].clone() / self.a[r][c].clone();
                if min.as_ref().map_or(true, |m| ratio < *m) {
                    min = Some(ratio);
                }
            }
        }
        let min = min?;
        let slack = if S::EXACT { S::zero() } else { S::from_f64(1e-12).unwrap() * (S::one() + min.abs_value()) };
        let mut pick: Option<usize> = None;
        for r in 0..self.a.len() {
            if !self.a[r][c].is_pos() {
                continue;
            }
            let ratio = self.b[r].clone() / self.a[r][c].clone();
            if ratio > min.clone() + slack.clone() {
                continue;
            }
            pick = match pick {
                None => Some(r),
                Some(p) if self.bland => Some(if self.basis[r] < self.basis[p] { r } else { p }),
                Some(p) => Some(if self.a[r][c].abs_value() > self.a[p][c].abs_value() { r } else { p }),
            };
        }
        pick
    }

    fn run(&mut self) -> Result<Run> {
        loop {
            let Some(c) = self.entering() else { return Ok(Run::Optimal) };
            let Some(r) = self.leaving(c) else { return Ok(Run::Unbounded) };
            if self.b[r].is_negligible() {
                self.degenerate += 1;
                if self.degenerate > DEGENERATE_LIMIT {
                    self.bland = true;
                }
            }
            self.pivot(r, c);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Solver(format!(
                    "simplex exceeded {} pivots ({} rows, {} columns)",
                    self.max_iterations,
                    self.a.len(),
                    self.cols()
                )));
            }
        }
    }

    fn reset_costs(&mut self, cost: &[S]) {
        let n = self.cols();
        self.d = cost.to_vec();
        self.z = S::zero();
        for r in 0..self.a.len() {
            let cb = cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for k in 0..n {
                if !self.a[r][k].is_zero() {
                    self.d[k] = (self.d[k].clone() - cb.clone() * self.a[r][k].clone()).clean();
                }
            }
            self.z = self.z.clone() + cb * self.b[r].clone();
        }
        for r in 0..self.a.len() {
            self.d[self.basis[r]] = S::zero();
        }
    }
}

pub(super) fn solve<S: Scalar>(model: &LpModel<S>) -> Result<LpSolution<S>> {
    let n = model.vars.len();
    let mut maps = Vec::with_capacity(n);
    let mut ns = 0usize;
    let mut bound_rows: Vec<(usize, S, String)> = Vec::new();
    for v in &model.vars {
        match (&v.lower, &v.upper) {
            (Some(l), u) => {
                maps.push(ColumnMap::Shift(ns, l.clone()));
                if let Some(u) = u {
                    bound_rows.push((ns, u.clone() - l.clone(), format!("ub:{}", v.name)));
                }
                ns += 1;
            }
            (None, Some(u)) => {
                maps.push(ColumnMap::Flip(ns, u.clone()));
                ns += 1;
            }
            (None, None) => {
                maps.push(ColumnMap::Free(ns, ns + 1));
                ns += 2;
            }
        }
    }

    // structural rows in terms of the shifted columns
    let mut rows: Vec<(Vec<S>, Cmp, S, String)> = Vec::new();
    for row in &model.rows {
        let mut dense = vec![S::zero(); ns];
        let mut rhs = row.rhs.clone();
        for (k, c) in &row.coefs {
            match &maps[*k] {
                ColumnMap::Shift(col, l) => {
                    dense[*col] = dense[*col].clone() + c.clone();
                    rhs = rhs - c.clone() * l.clone();
                }
                ColumnMap::Flip(col, u) => {
                    dense[*col] = dense[*col].clone() - c.clone();
                    rhs = rhs - c.clone() * u.clone();
                }
                ColumnMap::Free(p, q) => {
                    dense[*p] = dense[*p].clone() + c.clone();
                    dense[*q] = dense[*q].clone() - c.clone();
                }
            }
        }
        rows.push((dense, row.cmp, rhs, row.name.clone()));
    }
    for (col, cap, name) in bound_rows {
        let mut dense = vec![S::zero(); ns];
        dense[col] = S::one();
        rows.push((dense, Cmp::Le, cap, name));
    }
    for row in rows.iter_mut() {
        if row.2 < S::zero() {
            for v in row.0.iter_mut() {
                *v = -v.clone();
            }
            row.2 = -row.2.clone();
            row.1 = match row.1 {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
    let ncols = ns + n_slack + n_art;
    let mut a = vec![vec![S::zero(); ncols]; m];
    let mut b = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut names = Vec::with_capacity(m);
    let mut artificial = vec![false; ncols];
    let (mut next_slack, mut next_art) = (ns, ns + n_slack);
    for (r, (dense, cmp, rhs, name)) in rows.into_iter().enumerate() {
        for (k, v) in dense.into_iter().enumerate() {
            a[r][k] = v;
        }
        match cmp {
            Cmp::Le => {
                a[r][next_slack] = S::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Cmp::Ge => {
                a[r][next_slack] = -S::one();
                next_slack += 1;
                a[r][next_art] = S::one();
                artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
            Cmp::Eq => {
                a[r][next_art] = S::one();
                artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
        }
        b.push(rhs);
        names.push(name);
    }

    let mut tab = Tableau {
        a,
        b,
        basis,
        row_names: names,
        d: vec![S::zero(); ncols],
        z: S::zero(),
        allowed: vec![true; ncols],
        bland: false,
        degenerate: 0,
        iterations: 0,
        max_iterations: 200 * (m + ncols) + 1000,
    };

    if n_art > 0 {
        let cost: Vec<S> = artificial.iter().map(|&art| if art { S::one() } else { S::zero() }).collect();
        tab.reset_costs(&cost);
        if let Run::Unbounded = tab.run()? {
            return Err(crate::error::internal!("phase-1 objective unbounded below"));
        }
        if tab.z.is_pos() {
            let culprits: Vec<&str> = (0..m)
                .filter(|&r| artificial[tab.basis[r]] && tab.b[r].is_pos())
                .map(|r| tab.row_names[r].as_str())
                .collect();
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: vec![S::zero(); n],
                objective: S::zero(),
                basic: vec![false; n],
                diagnostic: Some(format!(
                    "phase-1 residual {:e}; unsatisfied rows: {}",
                    tab.z.to_f64(),
                    culprits.join(", ")
                )),
            });
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < tab.a.len() {
            if artificial[tab.basis[r]] {
                let mut best: Option<usize> = None;
                for k in 0..ncols {
                    if artificial[k] || tab.a[r][k].is_negligible() {
                        continue;
                    }
                    if best.map_or(true, |bk| tab.a[r][k].abs_value() > tab.a[r][bk].abs_value()) {
                        best = Some(k);
                    }
                }
                match best {
                    Some(k) => tab.pivot(r, k),
                    None => {
                        tab.a.remove(r);
                        tab.b.remove(r);
                        tab.basis.remove(r);
                        tab.row_names.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for (k, art) in artificial.iter().enumerate() {
            if *art {
                tab.allowed[k] = false;
            }
        }
        tab.bland = false;
        tab.degenerate = 0;
    }

    let mut cost = vec![S::zero(); ncols];
    for (k, c) in &model.objective {
        let c = match model.sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c.clone(),
        };
        match &maps[*k] {
            ColumnMap::Shift(col, _) => cost[*col] = cost[*col].clone() + c,
            ColumnMap::Flip(col, _) => cost[*col] = cost[*col].clone() - c,
            ColumnMap::Free(p, q) => {
                cost[*p] = cost[*p].clone() + c.clone();
                cost[*q] = cost[*q].clone() - c;
            }
        }
    }
    tab.reset_costs(&cost);
    let outcome = tab.run()?;

    let mut col_val = vec![S::zero(); ncols];
    let mut col_basic = vec![false; ncols];
    for (r, &c) in tab.basis.iter().enumerate() {
        col_val[c] = tab.b[r].clone();
        col_basic[c] = true;
    }
    let mut values = Vec::with_capacity(n);
    let mut basic = Vec::with_capacity(n);
    for map in &maps {
        match map {
            ColumnMap::Shift(c, l) => {
                values.push(l.clone() + col_val[*c].clone());
                basic.push(col_basic[*c]);
            }
            ColumnMap::Flip(c, u) => {
                values.push(u.clone() - col_val[*c].clone());
                basic.push(col_basic[*c]);
            }
            ColumnMap::Free(p, q) => {
                values.push(col_val[*p].clone() - col_val[*q].clone());
                basic.push(col_basic[*p] || col_basic[*q]);
            }
        }
    }
    let objective = model.objective.iter().fold(S::zero(), |acc, (k, c)| acc + c.clone() * values[*k].clone());
    Ok(LpSolution {
        status: match outcome {
            Run::Optimal => LpStatus::Optimal,
            Run::Unbounded => LpStatus::Unbounded,
        },
        values,
        objective,
        basic,
        diagnostic: None,
    })
}
