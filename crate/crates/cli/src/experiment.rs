//! Resolution of a config into a runnable experiment: diagonals, constraint
//! machinery, initial state, and the mode-specific objective closure.

use anyhow::{bail, Context, Result};
use std::sync::Arc;

use qudit_qaoa::constraints::{
    feasible_projector, penalized_diagonal, run_conditional_ensemble, ConditionalStats,
    ConstraintSpec, FeasibleProjector,
};
use qudit_qaoa::encoding::DiagonalHamiltonian;
use qudit_qaoa::optimize::{derive_run_seed, Objective};
use qudit_qaoa::problems::{brute_force_optima, BruteForceResult};
use qudit_qaoa::qaoa::{energy_sampled, evolve, expectation, MixerSpec, QaoaParams};
use qudit_qaoa::register::{QuditRegister, StateVector};

use crate::config::{
    build_problem, BuiltProblem, ConstraintMode, ExperimentConfig, MixerKindConfig,
};

/// Everything shared (immutably) across the runs of one experiment.
pub struct Experiment {
    pub register: QuditRegister,
    pub problem: BuiltProblem,
    pub base: Arc<DiagonalHamiltonian>,
    pub penalized: Arc<DiagonalHamiltonian>,
    pub constraints: Arc<Vec<ConstraintSpec>>,
    pub mode: ConstraintMode,
    pub mixer: MixerSpec,
    pub initial: StateVector,
    /// Diagonal whose expectation the optimizer minimizes.
    pub objective_diag: Arc<DiagonalHamiltonian>,
    pub projector: Option<FeasibleProjector>,
    pub shots: Option<usize>,
    pub trajectories: usize,
    /// Fixed circuit seed for shot noise / trajectory draws inside the loop.
    pub circuit_seed: u64,
    pub exact_minimum: f64,
    pub oracle: BruteForceResult,
}

impl Experiment {
    pub fn build(
        config: &ExperimentConfig,
        base_dir: &std::path::Path,
        dim_limit: Option<u64>,
    ) -> Result<Self> {
        let problem = build_problem(&config.problem, base_dir)?;
        let p = problem.as_problem();
        let register = match dim_limit {
            Some(limit) => {
                let r = p.register()?;
                QuditRegister::with_limit(r.num_qudits(), r.dim(), limit)?
            }
            None => p.register()?,
        };
        let base = Arc::new(p.cost_diagonal()?);
        let weight = config.circuit.penalty_weight;
        let constraints: Vec<ConstraintSpec> = p
            .constraints()
            .into_iter()
            .map(|c| c.with_weight(weight))
            .collect();
        let mode = config.circuit.constraint_mode;
        if mode != ConstraintMode::None && constraints.is_empty() {
            log::warn!(
                "constraint mode {:?} on a problem without constraints; behaves like `none`",
                mode
            );
        }
        let penalized = Arc::new(penalized_diagonal(&base, &constraints)?);

        // dynamical decoupling: projector, feasible initial state, DD mixer
        let (mixer, initial, projector) = match mode {
            ConstraintMode::DynamicalDecoupling => {
                let projector = feasible_projector(register, &constraints)
                    .context("building the feasible projector")?;
                let initial = projector.uniform_feasible_state();
                let mixer = MixerSpec::dynamical_decoupling(projector.clone())
                    .with_scale(config.circuit.mixer_scale);
                (mixer, initial, Some(projector))
            }
            _ => {
                if config.circuit.mixer == MixerKindConfig::DynamicalDecoupling {
                    bail!("dynamical-decoupling mixer outside dynamical_decoupling mode");
                }
                let mixer = MixerSpec::standard().with_scale(config.circuit.mixer_scale);
                (mixer, StateVector::uniform(register), None)
            }
        };

        // the optimizer's target and the exact reference per mode
        let objective_diag = match mode {
            ConstraintMode::None | ConstraintMode::DynamicalDecoupling => Arc::clone(&base),
            _ => Arc::clone(&penalized),
        };
        let (exact_minimum, oracle) = match (&projector, mode) {
            (Some(proj), ConstraintMode::DynamicalDecoupling) => {
                let mut best = f64::INFINITY;
                for (i, &keep) in proj.mask().iter().enumerate() {
                    if keep {
                        best = best.min(base.value_at(i));
                    }
                }
                let optima = register
                    .assignments()
                    .enumerate()
                    .filter(|(i, _)| proj.mask()[*i] && base.value_at(*i) <= best + 1e-9)
                    .map(|(_, z)| z)
                    .collect();
                (
                    best,
                    BruteForceResult {
                        min_value: best,
                        optima,
                    },
                )
            }
            _ => {
                let oracle = brute_force_optima(&objective_diag);
                (oracle.min_value, oracle)
            }
        };

        Ok(Self {
            register,
            problem,
            base,
            penalized,
            constraints: Arc::new(constraints),
            mode,
            mixer,
            initial,
            objective_diag,
            projector,
            shots: config.circuit.shots.filter(|&s| s > 0),
            trajectories: config.circuit.trajectories,
            circuit_seed: derive_run_seed(config.optimizer.master_seed, u64::MAX),
            exact_minimum,
            oracle,
        })
    }

    /// Diagonal driving the phase separator.
    fn circuit_diag(&self) -> &Arc<DiagonalHamiltonian> {
        match self.mode {
            ConstraintMode::HamiltonianPenalty => &self.penalized,
            _ => &self.base,
        }
    }

    /// One deterministic objective evaluation at a flat parameter vector.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let params = match QaoaParams::from_flat(x) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        match self.mode {
            ConstraintMode::Conditional => {
                match run_conditional_ensemble(
                    &self.initial,
                    &self.base,
                    &self.penalized,
                    &params,
                    &self.mixer,
                    &self.constraints,
                    self.trajectories,
                    self.circuit_seed,
                ) {
                    Ok(stats) => stats.mean_penalized_energy,
                    Err(e) => {
                        log::warn!("conditional objective failed: {e}");
                        f64::INFINITY
                    }
                }
            }
            _ => {
                let trial = match evolve(
                    self.initial.clone(),
                    self.circuit_diag(),
                    &params,
                    &self.mixer,
                ) {
                    Ok(t) => t,
                    Err(e) => {
                        log::warn!("circuit evaluation failed: {e}");
                        return f64::INFINITY;
                    }
                };
                let result = match self.shots {
                    Some(shots) => {
                        energy_sampled(trial.state(), &self.objective_diag, shots, self.circuit_seed)
                    }
                    None => expectation(trial.state(), &self.objective_diag),
                };
                result.unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Objective closure with budget, sharing this experiment through an Arc.
    pub fn make_objective(self: &Arc<Self>, budget: u64) -> Objective {
        let me = Arc::clone(self);
        Objective::new(budget, move |x: &[f64]| me.objective_value(x))
    }

    /// Final distribution at given parameters: exact probabilities, or the
    /// trajectory mean plus ancilla statistics in conditional mode.
    pub fn final_distribution(
        &self,
        params: &QaoaParams,
    ) -> Result<(Vec<f64>, Option<ConditionalStats>)> {
        match self.mode {
            ConstraintMode::Conditional => {
                let stats = run_conditional_ensemble(
                    &self.initial,
                    &self.base,
                    &self.penalized,
                    params,
                    &self.mixer,
                    &self.constraints,
                    self.trajectories,
                    self.circuit_seed,
                )?;
                Ok((stats.mean_probabilities.clone(), Some(stats)))
            }
            _ => {
                let trial = evolve(self.initial.clone(), self.circuit_diag(), params, &self.mixer)?;
                Ok((trial.state().probabilities(), None))
            }
        }
    }
}
