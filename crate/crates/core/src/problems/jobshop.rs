//! Job-shop scheduling on a discretized horizon: one qudit of dimension T
//! per operation holding its start slot, precedence and machine-overlap
//! inequalities, and either the average-completion or makespan objective
//! (the latter through one auxiliary qudit).

use std::sync::Arc;

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::register::{Assignment, QuditRegister};

use super::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobShopObjective {
    AverageCompletion,
    Makespan,
}

/// Qudit layout is job-major: qudit `n * K + k` holds the 0-based start slot
/// of operation k of job n (start time t = digit + 1, t in 1..=T). The
/// makespan objective appends one auxiliary qudit at index N * K.
#[derive(Debug, Clone)]
pub struct JobShopProblem {
    pub num_jobs: usize,
    pub ops_per_job: usize,
    pub num_machines: usize,
    pub horizon: usize,
    /// durations[n][k] >= 1
    pub durations: Vec<Vec<usize>>,
    /// machine_of[n][k] in [0, num_machines)
    pub machine_of: Vec<Vec<usize>>,
    pub objective: JobShopObjective,
}

impl JobShopProblem {
    pub fn validate(&self) -> Result<()> {
        if self.num_jobs == 0 || self.ops_per_job == 0 || self.horizon == 0 {
            return Err(Error::Consistency("empty job-shop instance".into()));
        }
        if self.durations.len() != self.num_jobs || self.machine_of.len() != self.num_jobs {
            return Err(Error::Consistency(
                "durations/machine_of must have one row per job".into(),
            ));
        }
        for n in 0..self.num_jobs {
            if self.durations[n].len() != self.ops_per_job
                || self.machine_of[n].len() != self.ops_per_job
            {
                return Err(Error::Consistency(format!(
                    "job {n}: need {} operations",
                    self.ops_per_job
                )));
            }
            for k in 0..self.ops_per_job {
                if self.durations[n][k] == 0 {
                    return Err(Error::Consistency(format!(
                        "operation ({n},{k}) has zero duration"
                    )));
                }
                if self.machine_of[n][k] >= self.num_machines {
                    return Err(Error::Consistency(format!(
                        "operation ({n},{k}) references machine {}",
                        self.machine_of[n][k]
                    )));
                }
            }
        }
        Ok(())
    }

    fn qudit(&self, job: usize, op: usize) -> usize {
        job * self.ops_per_job + op
    }

    fn aux_qudit(&self) -> usize {
        self.num_jobs * self.ops_per_job
    }

    /// 1-based start time of an operation.
    pub fn start_time(&self, assignment: &Assignment, job: usize, op: usize) -> usize {
        assignment.digits()[self.qudit(job, op)] + 1
    }
}

impl Problem for JobShopProblem {
    fn name(&self) -> &'static str {
        "jobshop"
    }

    fn register(&self) -> Result<QuditRegister> {
        self.validate()?;
        let qudits = match self.objective {
            JobShopObjective::AverageCompletion => self.num_jobs * self.ops_per_job,
            JobShopObjective::Makespan => self.num_jobs * self.ops_per_job + 1,
        };
        QuditRegister::new(qudits, self.horizon)
    }

    fn cost(&self, assignment: &Assignment) -> f64 {
        let last = self.ops_per_job - 1;
        match self.objective {
            JobShopObjective::AverageCompletion => {
                let total: usize = (0..self.num_jobs)
                    .map(|n| self.start_time(assignment, n, last) + self.durations[n][last])
                    .sum();
                total as f64 / self.num_jobs as f64
            }
            JobShopObjective::Makespan => (assignment.digits()[self.aux_qudit()] + 1) as f64,
        }
    }

    /// Strict integer inequalities carry a slack of one slot:
    /// precedence `t + p + 1 <= t'`, machine no-overlap
    /// `(t + p - t')(t - t' - p') >= 1`, and for the makespan objective
    /// `t_{n,K} + p_{n,K} + 1 <= t_aux`. Unit weights.
    fn constraints(&self) -> Vec<ConstraintSpec> {
        let me = Arc::new(self.clone());
        let mut out = Vec::new();
        for n in 0..self.num_jobs {
            for k in 0..self.ops_per_job - 1 {
                let p = Arc::clone(&me);
                out.push(ConstraintSpec::inequality(
                    format!("precedence[{n},{k}]"),
                    1.0,
                    move |z: &Assignment| {
                        (p.start_time(z, n, k) + p.durations[n][k] + 1) as f64
                            - p.start_time(z, n, k + 1) as f64
                    },
                ));
            }
        }
        // same-machine operation pairs must not overlap
        for m in 0..self.num_machines {
            let ops: Vec<(usize, usize)> = (0..self.num_jobs)
                .flat_map(|n| (0..self.ops_per_job).map(move |k| (n, k)))
                .filter(|&(n, k)| self.machine_of[n][k] == m)
                .collect();
            for i in 0..ops.len() {
                for j in (i + 1)..ops.len() {
                    let (n1, k1) = ops[i];
                    let (n2, k2) = ops[j];
                    if n1 == n2 {
                        continue; // same job: precedence already orders them
                    }
                    let p = Arc::clone(&me);
                    out.push(ConstraintSpec::inequality(
                        format!("machine[{m}]:({n1},{k1})-({n2},{k2})"),
                        1.0,
                        move |z: &Assignment| {
                            let t1 = p.start_time(z, n1, k1) as f64;
                            let t2 = p.start_time(z, n2, k2) as f64;
                            let p1 = p.durations[n1][k1] as f64;
                            let p2 = p.durations[n2][k2] as f64;
                            1.0 - (t1 + p1 - t2) * (t1 - t2 - p2)
                        },
                    ));
                }
            }
        }
        if self.objective == JobShopObjective::Makespan {
            let last = self.ops_per_job - 1;
            for n in 0..self.num_jobs {
                let p = Arc::clone(&me);
                out.push(ConstraintSpec::inequality(
                    format!("makespan[{n}]"),
                    1.0,
                    move |z: &Assignment| {
                        (p.start_time(z, n, last) + p.durations[n][last] + 1) as f64
                            - (z.digits()[p.aux_qudit()] + 1) as f64
                    },
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::penalized_diagonal;
    use crate::problems::brute_force_optima;

    #[test]
    fn single_op_optimum() {
        // 1 job, 1 op, duration 2, T = 4: optimum starts at t = 1, completion 3
        let p = JobShopProblem {
            num_jobs: 1,
            ops_per_job: 1,
            num_machines: 1,
            horizon: 4,
            durations: vec![vec![2]],
            machine_of: vec![vec![0]],
            objective: JobShopObjective::AverageCompletion,
        };
        let base = p.cost_diagonal().unwrap();
        let result = brute_force_optima(&base);
        assert_eq!(result.min_value, 3.0);
        assert_eq!(result.optima[0].digits(), &[0]);
    }

    #[test]
    fn precedence_feasible_set() {
        // 2 ops of one job, durations (1,1), T = 3: feasible iff t2 >= t1 + 2
        let p = JobShopProblem {
            num_jobs: 1,
            ops_per_job: 2,
            num_machines: 2,
            horizon: 3,
            durations: vec![vec![1, 1]],
            machine_of: vec![vec![0, 1]],
            objective: JobShopObjective::AverageCompletion,
        };
        let r = p.register().unwrap();
        let cs = p.constraints();
        assert_eq!(cs.len(), 1);
        let mut feasible = Vec::new();
        for z in r.assignments() {
            if !cs[0].is_violated(&z) {
                let t1 = p.start_time(&z, 0, 0);
                let t2 = p.start_time(&z, 0, 1);
                assert!(t2 >= t1 + 2);
                feasible.push((t1, t2));
            }
        }
        assert_eq!(feasible, vec![(1, 3)]);

        // with a heavy penalty the optimum is the unique feasible schedule
        let base = p.cost_diagonal().unwrap();
        let weighted: Vec<_> = cs.into_iter().map(|c| c.with_weight(50.0)).collect();
        let pen = penalized_diagonal(&base, &weighted).unwrap();
        let result = brute_force_optima(&pen);
        assert_eq!(result.optima.len(), 1);
        let z = &result.optima[0];
        assert_eq!((p.start_time(z, 0, 0), p.start_time(z, 0, 1)), (1, 3));
    }

    #[test]
    fn machine_overlap_sign() {
        // two 1-duration ops of different jobs on one machine, T = 3
        let p = JobShopProblem {
            num_jobs: 2,
            ops_per_job: 1,
            num_machines: 1,
            horizon: 3,
            durations: vec![vec![1], vec![1]],
            machine_of: vec![vec![0], vec![0]],
            objective: JobShopObjective::AverageCompletion,
        };
        let r = p.register().unwrap();
        let cs = p.constraints();
        assert_eq!(cs.len(), 1);
        for z in r.assignments() {
            let t1 = p.start_time(&z, 0, 0) as i64;
            let t2 = p.start_time(&z, 1, 0) as i64;
            // strict separation by at least the full duration on either side
            let separated = t1 + 1 < t2 || t2 + 1 < t1;
            assert_eq!(
                !cs[0].is_violated(&z),
                separated,
                "t1={t1} t2={t2}"
            );
        }
    }

    #[test]
    fn makespan_objective_with_aux() {
        let p = JobShopProblem {
            num_jobs: 2,
            ops_per_job: 1,
            num_machines: 2,
            horizon: 4,
            durations: vec![vec![1], vec![2]],
            machine_of: vec![vec![0], vec![1]],
            objective: JobShopObjective::Makespan,
        };
        let r = p.register().unwrap();
        assert_eq!(r.num_qudits(), 3);
        let base = p.cost_diagonal().unwrap();
        let weighted: Vec<_> = p
            .constraints()
            .into_iter()
            .map(|c| c.with_weight(50.0))
            .collect();
        assert_eq!(weighted.len(), 2); // one makespan bound per job
        let pen = penalized_diagonal(&base, &weighted).unwrap();
        let result = brute_force_optima(&pen);
        // job 1 (duration 2) pins the makespan aux at t = 4; job 0 may float
        assert_eq!(result.min_value, 4.0);
        assert!(!result.optima.is_empty());
        for z in &result.optima {
            assert_eq!(z.digits()[p.aux_qudit()] + 1, 4);
            assert_eq!(p.start_time(z, 1, 0), 1);
            assert!(p.start_time(z, 0, 0) <= 2);
            for c in &weighted {
                assert!(!c.is_violated(z));
            }
        }
    }
}
