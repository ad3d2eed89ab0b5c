//! CPLEX-style LP text output for cross-checking with external solvers.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{Cmp, LpModel, Scalar, Sense};

/// Directory to write dumps into; dumping is off when unset.
pub const LP_DUMP_ENV: &str = "MAXNORM_LP_DUMP";

static DUMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn term(out: &mut String, first: &mut bool, coef: f64, var: &str) {
    if *first {
        let _ = write!(out, " {coef} {var}");
    } else if coef < 0.0 {
        let _ = write!(out, " - {} {var}", -coef);
    } else {
        let _ = write!(out, " + {coef} {var}");
    }
    *first = false;
}

impl<S: Scalar> LpModel<S> {
    pub fn to_lp_format(&self) -> String {
        let names: Vec<String> = self.vars.iter().enumerate().map(|(k, v)| format!("v{k}_{}", sanitize(&v.name))).collect();
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n obj:",
            Sense::Maximize => "Maximize\n obj:",
        });
        let mut first = true;
        for (k, c) in &self.objective {
            term(&mut out, &mut first, c.to_f64(), &names[*k]);
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " c{r}_{}:", sanitize(&row.name));
            let mut first = true;
            for (k, c) in &row.coefs {
                term(&mut out, &mut first, c.to_f64(), &names[*k]);
            }
            if first {
                let _ = write!(out, " 0 {}", names.first().map_or("x", |s| s.as_str()));
            }
            let op = match row.cmp {
                Cmp::Le => "<=",
                Cmp::Eq => "=",
                Cmp::Ge => ">=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs.to_f64());
        }
        out.push_str("Bounds\n");
        for (v, name) in self.vars.iter().zip(&names) {
            match (&v.lower, &v.upper) {
                (Some(l), Some(u)) => {
                    let _ = writeln!(out, " {} <= {name} <= {}", l.to_f64(), u.to_f64());
                }
                (Some(l), None) => {
                    let _ = writeln!(out, " {name} >= {}", l.to_f64());
                }
                (None, Some(u)) => {
                    let _ = writeln!(out, " -inf <= {name} <= {}", u.to_f64());
                }
                (None, None) => {
                    let _ = writeln!(out, " {name} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

/// Writes `model` to `$MAXNORM_LP_DUMP/<tag>-<n>.lp` when the variable is set.
pub fn dump_if_enabled<S: Scalar>(model: &LpModel<S>, tag: &str) {
    let Some(dir) = std::env::var_os(LP_DUMP_ENV) else { return };
    let n = DUMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::path::Path::new(&dir).join(format!("{}-{n:06}.lp", sanitize(tag)));
    // best effort: a debugging aid must not fail the solve
    let _ = std::fs::create_dir_all(&dir);
    let _ = std::fs::write(path, model.to_lp_format());
}
