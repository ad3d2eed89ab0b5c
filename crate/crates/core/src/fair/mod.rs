//! Fair makespan and fair k-center by round-and-cut over the dual cone.
//!
//! For a target `B` the cut loop searches `(α, μ)` in `Q(B)`; every
//! separating integral solution becomes a cut and joins the support `H`.
//! An empty cut system certifies that the sampling LP over `H` is feasible.

mod center;
mod load;

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{internal, invalid, Error, Result};
use crate::lp::{cutting_plane, solve_lp_exact, Cmp, CutOutcome, DualPoint, Halfspace, LpModel, LpStatus, OracleAnswer};
use crate::lp::scalar::ratio_to_f64;
use crate::model::{ClusterInstance, Norm};
use crate::search::{check_eps, driver_grid, first_true};

pub use center::separation_center;
pub use load::separation_load;

/// Relative round-off slack on the inflated hard bound of support solutions.
pub const BOUND_SLACK: f64 = 1e-9;

/// Hard cap on cut iterations per `B`.
pub const MAX_CUT_LIMIT: usize = 1_000_000;

/// `η = 1/(2D)` with `D` the lcm of all denominators of `α` and `μ`.
pub fn compute_eta(point: &DualPoint) -> BigRational {
    let d = point.alpha.iter().chain(std::iter::once(&point.mu)).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    BigRational::new(BigInt::one(), d * BigInt::from(2))
}

/// Facilities of `open` reached greedily nearest first while the connection
/// vector has norm at most `b`, capped at `r_j`.
pub fn ct_connections(inst: &ClusterInstance, norm: &Norm, b: f64, client: usize, open: &[usize]) -> Vec<usize> {
    let mut order = open.to_vec();
    order.sort_by(|&x, &y| inst.d(x, client).total_cmp(&inst.d(y, client)).then(x.cmp(&y)));
    let cap = inst.upper()[client];
    let mut dists = Vec::new();
    let mut taken = Vec::new();
    for i in order {
        if taken.len() == cap {
            break;
        }
        dists.push(inst.d(i, client));
        if norm.eval_unchecked(&dists) > b {
            break;
        }
        taken.push(i);
    }
    taken
}

/// `ct_B(j, S)`: the largest number of facilities of `S` that `j` can use within norm `b`.
pub fn ct(inst: &ClusterInstance, norm: &Norm, b: f64, client: usize, open: &[usize]) -> usize {
    ct_connections(inst, norm, b, client, open).len()
}

/// Probability distribution over integral solutions with exact weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionDistribution<T> {
    support: Vec<T>,
    lambda: Vec<BigRational>,
}

impl<T> SolutionDistribution<T> {
    pub fn new(support: Vec<T>, lambda: Vec<BigRational>) -> Result<Self> {
        if support.len() != lambda.len() || support.is_empty() {
            return Err(invalid!("distribution needs one weight per support element"));
        }
        if lambda.iter().any(Signed::is_negative) {
            return Err(invalid!("negative probability"));
        }
        let total: BigRational = lambda.iter().sum();
        if !total.is_one() {
            return Err(invalid!("probabilities sum to {total}, not 1"));
        }
        Ok(SolutionDistribution { support, lambda })
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn lambda(&self) -> &[BigRational] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.lambda.iter().map(ratio_to_f64).collect()
    }

    /// `Σ_s λ_s · counts(s)` in exact arithmetic.
    pub fn expectation(&self, counts: impl Fn(&T) -> Vec<usize>) -> Vec<BigRational> {
        let mut acc: Vec<BigRational> = Vec::new();
        for (s, l) in self.support.iter().zip(&self.lambda) {
            let c = counts(s);
            if acc.is_empty() {
                acc = vec![BigRational::zero(); c.len()];
            }
            for (a, v) in acc.iter_mut().zip(c) {
                *a += l * BigRational::from_integer(BigInt::from(v));
            }
        }
        acc
    }

    /// Index of one draw.
    pub fn draw_index<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (k, p) in self.probabilities().into_iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
        last
    }

    /// `n` draws from a ChaCha stream seeded with `seed`.
    pub fn sample_indices(&self, seed: u64, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw_index(&mut rng)).collect()
    }
}

/// One solution drawn with the given seed.
pub fn sample<T>(dist: &SolutionDistribution<T>, seed: u64) -> &T {
    &dist.support[dist.sample_indices(seed, 1)[0]]
}

/// Outcome of the cut loop at a fixed `B`.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundAndCut<T> {
    /// A point of `Q(B)`: no distribution over `F(B)` meets the fairness rows.
    InfeasibleAtB(DualPoint),
    Distribution(SolutionDistribution<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairOutcome<T> {
    pub b: f64,
    pub distribution: SolutionDistribution<T>,
}

/// Shared shape of the two fair problems.
pub trait FairProblem {
    type Solution: Clone + Eq + Hash + Debug;

    /// Factor by which rounded solutions may exceed `B`.
    fn inflation(q: f64) -> f64;
    /// `Le`: `E[count_i] ≤ e_i`; `Ge`: `E[count_j] ≥ e_j`.
    fn marginal(&self) -> Cmp;
    fn demands(&self) -> &[f64];
    /// Rounded solution of the LP optimizing `Σ α · count` at the dominating guess, if any.
    fn candidate(&self, ell: usize, q: f64, b: f64, alpha: &[f64]) -> Result<Option<Self::Solution>>;
    fn counts(&self, sol: &Self::Solution) -> Vec<usize>;
    /// Hard constraints of a support solution under the bound `bound`.
    fn certify(&self, norm: &Norm, bound: f64, sol: &Self::Solution) -> Result<()>;
    /// Candidates for the B grid (smallest positive is the lower end) and the
    /// value past which `F(B)` stops growing.
    fn grid_range(&self, norm: &Norm) -> (Vec<f64>, f64);
    fn solution_space(&self) -> usize;
}

pub(crate) fn top_params(norm: &Norm) -> Result<(usize, f64)> {
    match norm {
        Norm::TopLq { ell, q } => Ok((*ell, *q)),
        Norm::MaxOrdered { .. } => Err(invalid!("fair variants support Top(l,q) norms only")),
    }
}

pub(crate) fn inflated<P: FairProblem>(q: f64, b: f64) -> f64 {
    P::inflation(q) * b * (1.0 + BOUND_SLACK)
}

fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| invalid!("{x} is not representable as a rational"))
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn base_halfspace<P: FairProblem>(inst: &P) -> Result<Halfspace> {
    let alpha = inst.demands().iter().map(|&e| rational(e)).collect::<Result<Vec<_>>>()?;
    let (cmp, rhs) = match inst.marginal() {
        Cmp::Le => (Cmp::Le, int(-1)),
        _ => (Cmp::Ge, int(1)),
    };
    Ok(Halfspace { alpha, mu: int(-1), cmp, rhs })
}

fn dot(alpha: &[BigRational], counts: &[usize]) -> BigRational {
    alpha.iter().zip(counts).map(|(a, &c)| a * BigRational::from_integer(BigInt::from(c))).sum()
}

/// Separation against `Q(B)`: a support solution violating the point, or `Member`.
pub(crate) fn separate<P: FairProblem>(
    inst: &P,
    norm: &Norm,
    b: f64,
    point: &DualPoint,
) -> Result<OracleAnswer<P::Solution>> {
    let (ell, q) = top_params(norm)?;
    let base = base_halfspace(inst)?;
    if point.alpha.len() != base.alpha.len() || !base.contains(point) || point.alpha.iter().any(Signed::is_negative) {
        return Err(Error::Contract("query point violates the base constraint".into()));
    }
    let alpha: Vec<f64> = point.alpha.iter().map(ratio_to_f64).collect();
    let Some(sol) = inst.candidate(ell, q, b, &alpha)? else { return Ok(OracleAnswer::Member) };
    let counts = inst.counts(&sol);
    let lhs = dot(&point.alpha, &counts);
    let eta = compute_eta(point);
    let (violates, cut_cmp) = match inst.marginal() {
        Cmp::Le => (lhs <= &point.mu - &eta, Cmp::Ge),
        _ => (lhs >= &point.mu + &eta, Cmp::Le),
    };
    if !violates {
        return Ok(OracleAnswer::Member);
    }
    inst.certify(norm, inflated::<P>(q, b), &sol)?;
    let cut = Halfspace {
        alpha: counts.iter().map(|&c| int(c as i64)).collect(),
        mu: int(-1),
        cmp: cut_cmp,
        rhs: BigRational::zero(),
    };
    Ok(OracleAnswer::Cut(sol, cut))
}

/// Exact `λ ≥ 0, Σλ = 1, Σ_s λ_s counts_s (cmp) e`.
pub(crate) fn solve_support_primal(counts: &[Vec<usize>], e: &[f64], cmp: Cmp) -> Result<Option<Vec<BigRational>>> {
    let mut lp: LpModel<BigRational> = LpModel::new();
    let vars: Vec<usize> = (0..counts.len()).map(|s| lp.add_nonneg(format!("lambda{s}"))).collect();
    lp.add_row("total", vars.iter().map(|&v| (v, int(1))).collect(), Cmp::Eq, int(1));
    for (i, &ei) in e.iter().enumerate() {
        let coefs = vars.iter().zip(counts).filter(|(_, c)| c[i] != 0).map(|(&v, c)| (v, int(c[i] as i64))).collect();
        lp.add_row(format!("fair{i}"), coefs, cmp, rational(ei)?);
    }
    let sol = solve_lp_exact(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.values[..vars.len()].to_vec())),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(internal!("sampling LP reported unbounded")),
    }
}

/// Drops zero weights, certifies every support element and re-checks the marginals.
pub(crate) fn build_distribution<P: FairProblem>(
    inst: &P,
    norm: &Norm,
    bound: f64,
    support: Vec<P::Solution>,
    lambda: Vec<BigRational>,
) -> Result<SolutionDistribution<P::Solution>> {
    let (support, lambda): (Vec<_>, Vec<_>) = support.into_iter().zip(lambda).filter(|(_, l)| !l.is_zero()).unzip();
    for s in &support {
        inst.certify(norm, bound, s)?;
    }
    let dist = SolutionDistribution::new(support, lambda)?;
    let exp = dist.expectation(|s| inst.counts(s));
    for (i, (m, &e)) in exp.iter().zip(inst.demands()).enumerate() {
        let e = rational(e)?;
        let ok = match inst.marginal() {
            Cmp::Le => *m <= e,
            _ => *m >= e,
        };
        if !ok {
            return Err(internal!("marginal {i} is {m}, demand {e}"));
        }
    }
    Ok(dist)
}

fn default_cut_limit(space: usize) -> usize {
    space.saturating_mul(10).clamp(100, MAX_CUT_LIMIT)
}

/// The cut loop at a fixed `B`; `cut_limit` defaults to ten times the solution-space size.
pub fn round_and_cut<P: FairProblem>(
    inst: &P,
    norm: &Norm,
    b: f64,
    cut_limit: Option<usize>,
) -> Result<RoundAndCut<P::Solution>> {
    let (_, q) = top_params(norm)?;
    let base = base_halfspace(inst)?;
    let limit = cut_limit.unwrap_or_else(|| default_cut_limit(inst.solution_space()));
    match cutting_plane(base.alpha.len(), &base, |p| separate(inst, norm, b, p), limit)? {
        CutOutcome::Refuted(point) => Ok(RoundAndCut::InfeasibleAtB(point)),
        CutOutcome::Empty(h) => {
            let counts: Vec<Vec<usize>> = h.iter().map(|s| inst.counts(s)).collect();
            let lambda = solve_support_primal(&counts, inst.demands(), inst.marginal())?
                .ok_or_else(|| internal!("cut system is empty but the sampling LP over its support is infeasible"))?;
            let dist = build_distribution(inst, norm, inflated::<P>(q, b), h, lambda)?;
            Ok(RoundAndCut::Distribution(dist))
        }
    }
}

/// Smallest grid `B` (binary search on the cut-loop verdict) with a distribution.
pub fn solve_fair<P: FairProblem>(
    inst: &P,
    norm: &Norm,
    eps: f64,
    cut_limit: Option<usize>,
) -> Result<FairOutcome<P::Solution>> {
    let (_, q) = top_params(norm)?;
    check_eps(eps)?;
    let (cands, hi) = inst.grid_range(norm);
    let grid = driver_grid(&cands, hi, eps / P::inflation(q))?;
    let mut best: Option<(usize, SolutionDistribution<P::Solution>)> = None;
    let found = first_true(grid.len(), |k| match round_and_cut(inst, norm, grid[k], cut_limit)? {
        RoundAndCut::InfeasibleAtB(_) => Ok(false),
        RoundAndCut::Distribution(d) => {
            if best.as_ref().map_or(true, |(i, _)| k < *i) {
                best = Some((k, d));
            }
            Ok(true)
        }
    })?;
    let Some(k) = found else {
        return Err(Error::Infeasible("no distribution meets the fairness requirements at any B".into()));
    };
    let (i, distribution) = best.ok_or_else(|| internal!("grid search lost its distribution"))?;
    if i != k {
        return Err(internal!("grid search returned index {k}, cached {i}"));
    }
    Ok(FairOutcome { b: grid[k], distribution })
}
