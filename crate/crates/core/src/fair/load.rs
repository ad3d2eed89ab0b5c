use crate::error::{internal, Result};
use crate::load::{build_topl_load_lp, shmoys_tardos_round};
use crate::lp::{Cmp, DualPoint, OracleAnswer, Sense};
use crate::model::{eval_load_objective, Assignment, FairLoadInstance, Norm};
use crate::search::candidates_up_to;
use crate::sparsify::load_threshold_candidates;

use super::{separate, FairProblem};

impl FairProblem for FairLoadInstance {
    type Solution = Assignment;

    fn inflation(q: f64) -> f64 {
        4f64.powf(1.0 / q)
    }

    fn marginal(&self) -> Cmp {
        Cmp::Le
    }

    fn demands(&self) -> &[f64] {
        &self.e
    }

    fn candidate(&self, ell: usize, q: f64, b: f64, alpha: &[f64]) -> Result<Option<Assignment>> {
        let inst = &self.base;
        let cands = load_threshold_candidates(inst);
        let (Some(&r), Some(&t)) =
            (candidates_up_to(&cands, b).last(), candidates_up_to(&cands, b / (ell as f64).powf(1.0 / q)).last())
        else {
            return Ok(None);
        };
        let mut lp = build_topl_load_lp(inst, ell, q, r, b, t);
        lp.set_machine_objective(Sense::Minimize, alpha);
        let Some(x) = lp.solve()? else { return Ok(None) };
        shmoys_tardos_round(inst, &x, Some(alpha)).map(Some)
    }

    fn counts(&self, sol: &Assignment) -> Vec<usize> {
        sol.counts(self.base.machines())
    }

    fn certify(&self, norm: &Norm, bound: f64, sol: &Assignment) -> Result<()> {
        let v = eval_load_objective(&self.base, norm, sol)?;
        if v > bound {
            return Err(internal!("support assignment has value {v} above {bound}"));
        }
        Ok(())
    }

    fn grid_range(&self, norm: &Norm) -> (Vec<f64>, f64) {
        let inst = &self.base;
        let lb = inst.min_job_sizes().into_iter().fold(0.0, f64::max);
        let cands = if lb > 0.0 {
            vec![lb]
        } else {
            let pos = inst.processing_times().iter().copied().filter(|p| p.is_finite() && *p > 0.0).fold(f64::INFINITY, f64::min);
            if pos.is_finite() { vec![0.0, pos] } else { vec![0.0] }
        };
        (cands, norm.eval_unchecked(&inst.max_job_sizes()))
    }

    fn solution_space(&self) -> usize {
        let m = self.base.machines();
        (0..self.base.jobs()).fold(1usize, |acc, _| acc.saturating_mul(m))
    }
}

/// `Member` if the point lies in `Q_l(B)`, else an assignment whose
/// constraint it violates by at least `η`.
pub fn separation_load(point: &DualPoint, b: f64, inst: &FairLoadInstance, norm: &Norm) -> Result<OracleAnswer<Assignment>> {
    separate(inst, norm, b, point)
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    use super::*;
    use crate::fair::{round_and_cut, solve_fair, RoundAndCut};
    use crate::model::LoadInstance;

    fn toy() -> FairLoadInstance {
        FairLoadInstance::new(LoadInstance::from_rows(&[vec![1.0], vec![1.0]]).unwrap(), vec![0.5, 0.5]).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zero_alpha_gets_a_cut() {
        let p = DualPoint { alpha: vec![q(0, 1), q(0, 1)], mu: q(1, 1) };
        let f = Norm::top(1, 1.0).unwrap();
        assert!(matches!(separation_load(&p, 1.0, &toy(), &f).unwrap(), OracleAnswer::Cut(..)));
        // below every job size nothing is feasible
        assert_eq!(separation_load(&p, 0.5, &toy(), &f).unwrap(), OracleAnswer::Member);
    }

    #[test]
    fn precondition_is_checked() {
        let p = DualPoint { alpha: vec![q(1, 1), q(1, 1)], mu: q(1, 1) };
        assert!(separation_load(&p, 1.0, &toy(), &Norm::top(1, 1.0).unwrap()).is_err());
    }

    #[test]
    fn toy_mixes_both_machines() {
        let f = Norm::top(1, 1.0).unwrap();
        let RoundAndCut::Distribution(d) = round_and_cut(&toy(), &f, 1.0, None).unwrap() else {
            panic!("toy must be fair-feasible at B = 1")
        };
        assert_eq!(d.lambda(), &[q(1, 2), q(1, 2)]);
        let out = solve_fair(&toy(), &f, 0.1, None).unwrap();
        assert_eq!(out.b, 1.0);
    }

    #[test]
    fn zero_caps_are_infeasible() {
        let inst = FairLoadInstance::new(LoadInstance::from_rows(&[vec![1.0], vec![2.0]]).unwrap(), vec![0.0, 0.0]).unwrap();
        let f = Norm::top(1, 1.0).unwrap();
        assert!(matches!(round_and_cut(&inst, &f, 10.0, None).unwrap(), RoundAndCut::InfeasibleAtB(_)));
        assert!(matches!(solve_fair(&inst, &f, 0.1, None), Err(crate::Error::Infeasible(_))));
    }

    #[test]
    fn slack_caps_give_a_deterministic_answer() {
        let inst = FairLoadInstance::new(
            LoadInstance::from_rows(&[vec![1.0, 3.0, 2.0], vec![2.0, 1.0, 4.0]]).unwrap(),
            vec![3.0, 3.0],
        )
        .unwrap();
        let out = solve_fair(&inst, &Norm::top(2, 1.0).unwrap(), 0.1, None).unwrap();
        // fair optimum 3: jobs 0 and 2 on machine 0, job 1 on machine 1
        assert!(out.b <= 3.0 * 1.025 + 1e-9);
    }
}
