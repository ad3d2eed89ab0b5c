use std::io::Write;
use std::path::{Path, PathBuf};

use maxnorm::cluster::{solve_knapsack_center, solve_matroid_center, solve_ordered_kcenter, solve_topl_kcenter};
use maxnorm::fair::{solve_fair, FairProblem, SolutionDistribution};
use maxnorm::gen::{
    random_cluster, random_fair_cluster, random_fair_load, random_knapsack, random_load, random_partition,
    tightness_family, ClusterParams, MetricKind,
};
use maxnorm::load::{solve_ordered_makespan, solve_topl_makespan};
use maxnorm::oracle::{brute_force_kcenter, brute_force_makespan, fair_opt_center, fair_opt_load};
use maxnorm::{
    check_cluster_solution, eval_cluster_objective, eval_load_objective, ClusterInstance, Error, FacilityConstraint,
    LoadInstance, Norm, Result,
};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::format::{
    decimal, read_json, reals, to_json, DistributionFile, Fraction, Instance, InstanceFile, Real, SolutionFile,
    TightnessFile, WeightsFile,
};
use crate::{CompareArgs, CompareKind, FairSolveArgs, GenArgs, GenKind, InstanceParams, Metric, OracleArgs, SampleArgs, SolveArgs};

/// Relative slack on certified support values, matching the solver's own check.
const SUPPORT_SLACK: f64 = 1e-9;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Internal(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

/// `topl:<ell>:<q>` or `maxordered:<file>`.
pub fn parse_norm(spec: &str) -> Result<Norm> {
    let bad = || Error::InvalidInput(format!("norm must be topl:<ell>:<q> or maxordered:<file>, got {spec:?}"));
    if let Some(rest) = spec.strip_prefix("topl:") {
        let (ell, q) = rest.split_once(':').ok_or_else(bad)?;
        return Norm::top(ell.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
    }
    if let Some(path) = spec.strip_prefix("maxordered:") {
        return read_json::<WeightsFile>(Path::new(path))?.norm();
    }
    Err(bad())
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    read_json::<InstanceFile>(path)?.parse()
}

fn cluster_params(p: &InstanceParams) -> ClusterParams {
    let metric = match p.metric {
        Metric::Euclidean => MetricKind::Euclidean,
        Metric::Graph => MetricKind::RandomGraph,
    };
    ClusterParams { clients: p.clients, facilities: p.facilities, k: p.k, max_r: p.max_r, metric }
}

fn with_constraint(base: ClusterInstance, spec: &str, seed: u64) -> Result<ClusterInstance> {
    match spec {
        "cardinality" => Ok(base),
        "knapsack" => random_knapsack(&base, seed),
        _ => {
            let parts = spec
                .strip_prefix("partition:")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("unknown constraint {spec:?}")))?;
            random_partition(&base, parts, seed)
        }
    }
}

pub fn generate(kind: GenKind, p: &InstanceParams, seed: u64) -> Result<Instance> {
    Ok(match kind {
        GenKind::Load => Instance::Load(random_load(p.machines, p.jobs, p.pmax, p.forbidden, seed)?),
        GenKind::FairLoad => Instance::FairLoad(random_fair_load(p.machines, p.jobs, p.pmax, seed)?),
        GenKind::Cluster => {
            Instance::Cluster(with_constraint(random_cluster(&cluster_params(p), seed)?, &p.constraint, seed)?)
        }
        GenKind::FairCluster => {
            if p.constraint != "cardinality" {
                return Err(Error::InvalidInput("fair clustering needs a cardinality constraint".into()));
            }
            Instance::FairCluster(random_fair_cluster(&cluster_params(p), seed)?)
        }
        GenKind::Tightness => return Err(Error::InvalidInput("the tightness family is not an instance".into())),
    })
}

pub fn gen(a: &GenArgs) -> Result<()> {
    if a.kind == GenKind::Tightness {
        let fam = tightness_family(a.t)?;
        let file = TightnessFile { kind: "tightness".into(), t: a.t, weights: vec![reals(&fam.weights)] };
        let text = to_json(&file);
        let back: WeightsFile = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
        if back.norm()? != Norm::max_ordered(vec![fam.weights])? {
            return Err(Error::Internal("tightness file does not round-trip".into()));
        }
        return emit(a.out.as_deref(), &text);
    }
    let inst = generate(a.kind, &a.params, a.seed)?;
    let text = to_json(&InstanceFile::from(&inst));
    let back: InstanceFile = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
    if back.parse()? != inst {
        return Err(Error::Internal("generated instance does not round-trip".into()));
    }
    emit(a.out.as_deref(), &text)
}

/// Solver output with the accepted guess, for `solve` and `compare`.
struct Solved {
    solution: SolutionFile,
    value: f64,
    bound: f64,
    certificate: Value,
    guess: [String; 3],
}

fn thresholds(t: &[f64]) -> String {
    t.iter().map(|&x| decimal(x)).collect::<Vec<_>>().join(";")
}

fn solve_load(inst: &LoadInstance, norm: &Norm, eps: f64) -> Result<Solved> {
    Ok(match norm {
        Norm::TopLq { ell, q } => {
            let out = solve_topl_makespan(inst, *ell, *q, eps)?;
            let c = &out.certificate;
            Solved {
                solution: (&out.assignment).into(),
                value: out.value,
                bound: c.bound,
                certificate: json!({"r": decimal(c.r), "b": decimal(c.b), "t": decimal(c.t), "bound": decimal(c.bound)}),
                guess: [decimal(c.r), decimal(c.b), decimal(c.t)],
            }
        }
        Norm::MaxOrdered { weights } => {
            let out = solve_ordered_makespan(inst, weights, eps)?;
            let c = &out.certificate;
            Solved {
                solution: (&out.assignment).into(),
                value: out.value,
                bound: c.bound,
                certificate: json!({
                    "r": decimal(c.r), "b": decimal(c.b), "pos": c.pos,
                    "thresholds": reals(&c.thresholds), "bound": decimal(c.bound),
                }),
                guess: [decimal(c.r), decimal(c.b), thresholds(&c.thresholds)],
            }
        }
    })
}

fn solve_cluster(inst: &ClusterInstance, norm: &Norm, eps: f64) -> Result<Solved> {
    Ok(match (inst.constraint(), norm) {
        (FacilityConstraint::Cardinality(_), Norm::TopLq { ell, q }) => {
            let out = solve_topl_kcenter(inst, *ell, *q, eps)?;
            let c = &out.certificate;
            Solved {
                solution: (&out.solution).into(),
                value: out.value,
                bound: c.bound,
                certificate: json!({"r": decimal(c.r), "b": decimal(c.b), "t": decimal(c.t), "bound": decimal(c.bound)}),
                guess: [decimal(c.r), decimal(c.b), decimal(c.t)],
            }
        }
        (FacilityConstraint::Cardinality(_), Norm::MaxOrdered { weights }) => {
            let out = solve_ordered_kcenter(inst, weights, eps)?;
            let c = &out.certificate;
            Solved {
                solution: (&out.solution).into(),
                value: out.value,
                bound: c.bound,
                certificate: json!({
                    "r": decimal(c.r), "b": decimal(c.b), "pos": c.pos,
                    "thresholds": reals(&c.thresholds), "bound": decimal(c.bound),
                }),
                guess: [decimal(c.r), decimal(c.b), thresholds(&c.thresholds)],
            }
        }
        (FacilityConstraint::Partition(_), _) => {
            let out = solve_matroid_center(inst, norm, eps)?;
            Solved {
                solution: (&out.solution).into(),
                value: out.value,
                bound: out.certificate,
                certificate: json!({"bound": decimal(out.certificate)}),
                guess: [String::new(), String::new(), String::new()],
            }
        }
        (FacilityConstraint::Knapsack(_), _) => {
            let out = solve_knapsack_center(inst, norm, eps)?;
            let c = &out.certificate;
            Solved {
                solution: (&out.solution).into(),
                value: out.value,
                bound: c.bound,
                certificate: json!({
                    "preselected": c.preselected, "r": decimal(c.r), "b": decimal(c.b),
                    "bound": decimal(c.bound), "weight": decimal(c.weight),
                }),
                guess: [decimal(c.r), decimal(c.b), String::new()],
            }
        }
    })
}

fn knapsack_slack(inst: &ClusterInstance, eps: f64) -> f64 {
    match inst.constraint() {
        FacilityConstraint::Knapsack(_) => 1.0 + 2.0 * eps,
        _ => 1.0,
    }
}

/// Objective value of a solution file after validating it against the instance.
fn validate(inst: &Instance, norm: &Norm, sol: &SolutionFile, slack: f64) -> Result<f64> {
    match inst {
        Instance::Load(i) => eval_load_objective(i, norm, &sol.assignment()?),
        Instance::Cluster(i) => {
            let s = sol.cluster()?;
            check_cluster_solution(i, &s, slack)?;
            eval_cluster_objective(i, norm, &s)
        }
        _ => Err(Error::InvalidInput("fair instances are solved with fair-solve".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct SolveReport {
    norm: String,
    eps: Real,
    solution: SolutionFile,
    value: Real,
    certificate: Value,
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let norm = parse_norm(&a.norm)?;
    let (solved, slack) = match &inst {
        Instance::Load(i) => (solve_load(i, &norm, a.eps)?, 1.0),
        Instance::Cluster(i) => (solve_cluster(i, &norm, a.eps)?, knapsack_slack(i, a.eps)),
        _ => return Err(Error::InvalidInput("fair instances are solved with fair-solve".into())),
    };
    let report = SolveReport {
        norm: a.norm.clone(),
        eps: a.eps.into(),
        solution: solved.solution,
        value: solved.value.into(),
        certificate: solved.certificate,
    };
    let text = to_json(&report);
    let back: SolveReport = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
    let value = validate(&inst, &norm, &back.solution, slack)?;
    if value != back.value.value()? || value > solved.bound {
        return Err(Error::Internal(format!("emitted solution re-evaluates to {value}, bound {}", solved.bound)));
    }
    emit(a.out.as_deref(), &text)
}

fn check_fair<P: FairProblem>(inst: &P, norm: &Norm, q: f64, file: &DistributionFile, dist: &SolutionDistribution<P::Solution>) -> Result<()> {
    let bound = P::inflation(q) * file.b.value()? * (1.0 + SUPPORT_SLACK);
    for s in dist.support() {
        inst.certify(norm, bound, s)?;
    }
    let marg = dist.expectation(|s| inst.counts(s));
    for (k, (m, &e)) in marg.iter().zip(inst.demands()).enumerate() {
        let e = BigRational::from_float(e).ok_or_else(|| Error::InvalidInput(format!("demand {e} is not finite")))?;
        let ok = match inst.marginal() {
            maxnorm::lp::Cmp::Le => *m <= e,
            _ => *m >= e,
        };
        if !ok {
            return Err(Error::Internal(format!("entry {k}: expected count {m} violates its requirement {e}")));
        }
    }
    Ok(())
}

fn top_q(norm: &Norm) -> Result<f64> {
    match norm {
        Norm::TopLq { q, .. } => Ok(*q),
        Norm::MaxOrdered { .. } => Err(Error::InvalidInput("fairness is supported for Top(ell,q) norms only".into())),
    }
}

pub fn fair_solve(a: &FairSolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let norm = parse_norm(&a.norm)?;
    let q = top_q(&norm)?;
    let text = match &inst {
        Instance::FairLoad(i) => {
            let out = solve_fair(i, &norm, a.eps, a.cap)?;
            let text = to_json(&DistributionFile::new(out.b, &a.norm, &out.distribution));
            let back: DistributionFile = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
            check_fair(i, &norm, q, &back, &back.parse(SolutionFile::assignment)?)?;
            text
        }
        Instance::FairCluster(i) => {
            let out = solve_fair(i, &norm, a.eps, a.cap)?;
            let text = to_json(&DistributionFile::new(out.b, &a.norm, &out.distribution));
            let back: DistributionFile = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
            check_fair(i, &norm, q, &back, &back.parse(SolutionFile::cluster)?)?;
            text
        }
        _ => return Err(Error::InvalidInput("fair-solve needs a fair-load or fair-cluster instance".into())),
    };
    emit(a.out.as_deref(), &text)
}

pub fn oracle(a: &OracleArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let norm = parse_norm(&a.norm)?;
    let text = match &inst {
        Instance::Load(i) => {
            let opt = brute_force_makespan(i, &norm, a.cap)?;
            let sol = SolutionFile::from(&opt.assignment);
            to_json(&json!({
                "norm": a.norm, "value": decimal(opt.value), "solution": sol,
                "r": decimal(opt.r), "t_star": reals(&opt.t_star),
            }))
        }
        Instance::Cluster(i) => {
            let opt = brute_force_kcenter(i, &norm, a.cap)?;
            to_json(&json!({"norm": a.norm, "value": decimal(opt.value), "solution": SolutionFile::from(&opt.solution)}))
        }
        Instance::FairLoad(i) => {
            top_q(&norm)?;
            let opt = fair_opt_load(i, &norm, a.cap)?;
            to_json(&DistributionFile::new(opt.b, &a.norm, &opt.distribution))
        }
        Instance::FairCluster(i) => {
            top_q(&norm)?;
            let opt = fair_opt_center(i, &norm, a.cap)?;
            to_json(&DistributionFile::new(opt.b, &a.norm, &opt.distribution))
        }
    };
    emit(a.out.as_deref(), &text)
}

/// One CSV row: seed, opt, achieved, ratio, bound, and the guess triple.
fn compare_row(a: &CompareArgs, norm: &Norm, seed: u64) -> Result<[String; 8]> {
    let kind = match a.kind {
        CompareKind::Load => GenKind::Load,
        CompareKind::Cluster => GenKind::Cluster,
    };
    let inst = generate(kind, &a.params, seed)?;
    let (opt, solved) = match &inst {
        Instance::Load(i) => (brute_force_makespan(i, norm, a.cap).map(|o| o.value), solve_load(i, norm, a.eps)),
        Instance::Cluster(i) => (brute_force_kcenter(i, norm, a.cap).map(|o| o.value), solve_cluster(i, norm, a.eps)),
        _ => unreachable!("compare generates plain instances"),
    };
    let blank = || String::new();
    match (opt, solved) {
        (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {
            Ok([seed.to_string(), "infeasible".into(), "infeasible".into(), blank(), blank(), blank(), blank(), blank()])
        }
        (Ok(opt), Ok(s)) => {
            let ratio = if opt > 0.0 { s.value / opt } else if s.value == 0.0 { 1.0 } else { f64::INFINITY };
            let [r, b, t] = s.guess;
            Ok([seed.to_string(), decimal(opt), decimal(s.value), decimal(ratio), decimal(s.bound), r, b, t])
        }
        (Err(e), _) | (_, Err(e)) => Err(Error::Internal(format!("seed {seed}: solver and oracle disagree: {e}"))),
    }
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let norm = parse_norm(&a.norm)?;
    let rows: Vec<[String; 8]> =
        (a.seed..a.seed + a.count).into_par_iter().map(|s| compare_row(a, &norm, s)).collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(["seed", "opt", "achieved", "ratio", "bound", "r", "b", "t"]).map_err(csv_err)?;
    for row in &rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))?)
}

#[derive(Serialize)]
struct SampleReport {
    n: usize,
    seed: u64,
    frequencies: Vec<Frequency>,
    /// Support indices in draw order.
    draws: Vec<usize>,
}

#[derive(Serialize)]
struct Frequency {
    index: usize,
    lambda: Fraction,
    count: usize,
    expected: String,
    sigma: String,
    within_3sigma: bool,
}

pub fn sample(a: &SampleArgs) -> Result<()> {
    let file: DistributionFile = read_json(&a.distribution)?;
    let dist = file.parse(|s| Ok(s.clone()))?;
    let draws = dist.sample_indices(a.seed, a.n);
    let n = a.n as f64;
    let frequencies: Vec<Frequency> = dist
        .probabilities()
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            let count = draws.iter().filter(|&&d| d == index).count();
            let sigma = (n * p * (1.0 - p)).sqrt();
            Frequency {
                index,
                lambda: Fraction::from(&dist.lambda()[index]),
                count,
                expected: decimal(n * p),
                sigma: decimal(sigma),
                within_3sigma: (count as f64 - n * p).abs() <= 3.0 * sigma,
            }
        })
        .collect();
    let text = to_json(&SampleReport { n: a.n, seed: a.seed, frequencies, draws });
    emit(a.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_specs() {
        assert_eq!(parse_norm("topl:2:1.5").unwrap(), Norm::top(2, 1.5).unwrap());
        for bad in ["topl:2", "topl:x:1", "l2", "topl:0:1"] {
            assert!(matches!(parse_norm(bad), Err(Error::InvalidInput(_))), "{bad}");
        }
        assert!(parse_norm("maxordered:/nonexistent.json").is_err());
    }

    #[test]
    fn constraints_are_parsed() {
        let p = InstanceParams {
            machines: 2,
            jobs: 2,
            pmax: 10,
            forbidden: 0.0,
            clients: 3,
            facilities: 4,
            k: 2,
            max_r: 2,
            metric: Metric::Graph,
            constraint: "partition:2".into(),
        };
        let Instance::Cluster(c) = generate(GenKind::Cluster, &p, 3).unwrap() else { panic!() };
        assert!(matches!(c.constraint(), FacilityConstraint::Partition(_)));
        let bad = InstanceParams { constraint: "matroid".into(), ..p };
        assert!(generate(GenKind::Cluster, &bad, 3).is_err());
    }
}
