//! Classical outer-loop optimizers over the 2p parameter space and the
//! multi-start experiment protocol.

mod cma_es;
mod lbfgs;

pub use cma_es::{es_minimize, EsConfig};
pub use lbfgs::{qn_minimize, QnConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar objective with a hard evaluation budget.
pub struct Objective {
    f: Box<dyn Fn(&[f64]) -> f64 + Send>,
    budget: u64,
    used: u64,
}

impl Objective {
    pub fn new<F>(budget: u64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + 'static,
    {
        Self {
            f: Box::new(f),
            budget,
            used: 0,
        }
    }

    /// Evaluate if budget remains; `None` once it is spent.
    pub fn try_eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        Some((self.f)(x))
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }
}

/// Why an optimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientConverged,
    Stagnation,
    MaxIterations,
    BudgetExhausted,
    LineSearchFailure,
}

/// Outcome of one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptRecord {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Best objective value seen in each generation / iteration.
    pub trace: Vec<f64>,
    pub evaluations_used: u64,
    pub seed: u64,
    pub wall_time: f64,
    pub termination: Termination,
}

/// Optimizer choice for [`multi_start`].
#[derive(Debug, Clone)]
pub enum OptimizerConfig {
    CmaEs(EsConfig),
    Lbfgs(QnConfig),
}

/// splitmix64, the documented master-seed to run-seed derivation:
/// `run_seed = splitmix64(master + (run + 1) * 0x9E3779B97F4A7C15)`.
pub fn derive_run_seed(master: u64, run: u64) -> u64 {
    let mut z = master.wrapping_add((run + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Default initial-parameter ranges for a depth-p circuit: gammas uniform in
/// [0, 2 pi), betas uniform in [0, pi).
pub fn qaoa_init_ranges(depth: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * depth);
    for _ in 0..depth {
        out.push((0.0, 2.0 * std::f64::consts::PI));
    }
    for _ in 0..depth {
        out.push((0.0, std::f64::consts::PI));
    }
    out
}

/// Independent seeded runs from random initial points, in parallel. The
/// factory builds a fresh objective per run; per-run seeds come from
/// [`derive_run_seed`].
pub fn multi_start<F>(
    objective_factory: F,
    optimizer: &OptimizerConfig,
    runs: usize,
    init_ranges: &[(f64, f64)],
    master_seed: u64,
) -> Vec<OptRecord>
where
    F: Fn() -> Objective + Sync,
{
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_run_seed(master_seed, run as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0: Vec<f64> = init_ranges
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            let mut objective = objective_factory();
            match optimizer {
                OptimizerConfig::CmaEs(cfg) => {
                    let cfg = EsConfig { seed, ..cfg.clone() };
                    es_minimize(&mut objective, &cfg, &x0)
                }
                OptimizerConfig::Lbfgs(cfg) => {
                    let cfg = QnConfig { seed, ..cfg.clone() };
                    qn_minimize(&mut objective, &cfg, &x0)
                }
            }
        })
        .collect()
}

/// best achieved value minus the exact minimum; a meaningfully negative gap
/// means the oracle or the energy is broken.
pub fn optimality_gap(best_value: f64, exact_min: f64) -> Result<f64> {
    let gap = best_value - exact_min;
    if gap < -1e-9 {
        return Err(Error::Consistency(format!(
            "negative optimality gap {gap:.3e}: energy below the exact minimum"
        )));
    }
    Ok(gap)
}
