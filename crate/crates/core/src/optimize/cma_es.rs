//! Covariance matrix adaptation evolution strategy, the standard
//! (mu/mu_w, lambda) parameterization with rank-one and rank-mu covariance
//! updates and cumulative step-size control. Self-contained and seedable.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

use super::{Objective, OptRecord, Termination};

/// Generations over which a best-value improvement below
/// [`STAGNATION_TOL`] stops the run.
pub const STAGNATION_GENERATIONS: usize = 50;
pub const STAGNATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EsConfig {
    /// Offspring per generation; `None` uses 4 + floor(3 ln n).
    pub population: Option<usize>,
    /// Initial step size sigma_0.
    pub initial_step: f64,
    pub max_generations: usize,
    pub seed: u64,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            population: None,
            initial_step: 0.3,
            max_generations: 500,
            seed: 0,
        }
    }
}

/// Default population size 4 + floor(3 ln n): 6 at n = 2 up to 12 at n = 16.
pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

struct Strategy {
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(dim: usize, lambda: usize) -> Self {
        let n = dim as f64;
        let mu = lambda / 2;
        let mut weights: Vec<f64> = (1..=mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
        let c_mu = (1.0 - c_1)
            .min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Self {
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

/// Minimize from `initial_mean`. Deterministic per seed; the returned record
/// carries the best point ever evaluated.
pub fn es_minimize(objective: &mut Objective, config: &EsConfig, initial_mean: &[f64]) -> OptRecord {
    let start = Instant::now();
    let dim = initial_mean.len();
    assert!(dim >= 1, "objective dimension must be positive");
    let lambda = config.population.unwrap_or_else(|| default_population(dim));
    assert!(lambda >= 4, "population must be at least 4");
    let strategy = Strategy::new(dim, lambda);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mean = Array1::from(initial_mean.to_vec());
    let mut sigma = config.initial_step;
    let mut cov = Array2::<f64>::eye(dim);
    let mut p_sigma = Array1::<f64>::zeros(dim);
    let mut p_c = Array1::<f64>::zeros(dim);

    let mut best_params = initial_mean.to_vec();
    let mut best_value = f64::INFINITY;
    let mut trace: Vec<f64> = Vec::new();
    let mut best_history: Vec<f64> = Vec::new();
    let mut termination = Termination::MaxIterations;

    'outer: for generation in 0..config.max_generations {
        // refresh the sampling basis
        let (eigvals, basis) = match crate::linalg::eigh_real(&cov) {
            Ok(dec) => dec,
            Err(e) => {
                log::warn!("covariance eigendecomposition failed: {e}; stopping");
                termination = Termination::Stagnation;
                break;
            }
        };
        let max_eig = eigvals.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
        let scales: Vec<f64> = eigvals
            .iter()
            .map(|&w| w.max(1e-30 * max_eig).sqrt())
            .collect();

        // sample and evaluate the offspring
        let mut ys: Vec<Array1<f64>> = Vec::with_capacity(lambda);
        let mut values: Vec<f64> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z: Array1<f64> = (0..dim)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let mut y = Array1::<f64>::zeros(dim);
            for row in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += basis[(row, k)] * scales[k] * z[k];
                }
                y[row] = acc;
            }
            let x: Vec<f64> = (0..dim).map(|i| mean[i] + sigma * y[i]).collect();
            let value = match objective.try_eval(&x) {
                Some(v) => v,
                None => {
                    termination = Termination::BudgetExhausted;
                    break 'outer;
                }
            };
            if value < best_value {
                best_value = value;
                best_params = x;
            }
            ys.push(y);
            values.push(value);
        }

        let gen_best = values.iter().copied().fold(f64::INFINITY, f64::min);
        trace.push(gen_best);
        best_history.push(best_value);

        // rank-based selection
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut y_w = Array1::<f64>::zeros(dim);
        for (rank, &w) in strategy.weights.iter().enumerate() {
            let y = &ys[order[rank]];
            for i in 0..dim {
                y_w[i] += w * y[i];
            }
        }

        for i in 0..dim {
            mean[i] += sigma * y_w[i];
        }

        // cumulative step-size path uses C^{-1/2} y_w = B D^-1 B^T y_w
        let mut c_inv_sqrt_yw = Array1::<f64>::zeros(dim);
        {
            let mut bt_yw = vec![0.0f64; dim];
            for (k, b) in bt_yw.iter_mut().enumerate() {
                for row in 0..dim {
                    *b += basis[(row, k)] * y_w[row];
                }
                *b /= scales[k];
            }
            for row in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += basis[(row, k)] * bt_yw[k];
                }
                c_inv_sqrt_yw[row] = acc;
            }
        }
        let cs = strategy.c_sigma;
        let path_scale = (cs * (2.0 - cs) * strategy.mu_eff).sqrt();
        for i in 0..dim {
            p_sigma[i] = (1.0 - cs) * p_sigma[i] + path_scale * c_inv_sqrt_yw[i];
        }

        let p_sigma_norm = p_sigma.iter().map(|v| v * v).sum::<f64>().sqrt();
        let normalizer = (1.0 - (1.0 - cs).powi(2 * (generation as i32 + 1))).sqrt();
        let h_sigma = p_sigma_norm / normalizer
            < (1.4 + 2.0 / (dim as f64 + 1.0)) * strategy.chi_n;

        let cc = strategy.c_c;
        let pc_scale = if h_sigma {
            (cc * (2.0 - cc) * strategy.mu_eff).sqrt()
        } else {
            0.0
        };
        for i in 0..dim {
            p_c[i] = (1.0 - cc) * p_c[i] + pc_scale * y_w[i];
        }

        // covariance: rank-one plus rank-mu update
        let delta_h = if h_sigma { 0.0 } else { cc * (2.0 - cc) };
        let keep = 1.0 - strategy.c_1 - strategy.c_mu + strategy.c_1 * delta_h;
        for row in 0..dim {
            for col in 0..dim {
                let mut rank_mu = 0.0;
                for (rank, &w) in strategy.weights.iter().enumerate() {
                    let y = &ys[order[rank]];
                    rank_mu += w * y[row] * y[col];
                }
                cov[(row, col)] = keep * cov[(row, col)]
                    + strategy.c_1 * p_c[row] * p_c[col]
                    + strategy.c_mu * rank_mu;
            }
        }
        // keep it exactly symmetric against drift
        for row in 0..dim {
            for col in (row + 1)..dim {
                let s = 0.5 * (cov[(row, col)] + cov[(col, row)]);
                cov[(row, col)] = s;
                cov[(col, row)] = s;
            }
        }

        sigma *= ((cs / strategy.d_sigma) * (p_sigma_norm / strategy.chi_n - 1.0)).exp();
        if !sigma.is_finite() {
            log::warn!("step size diverged; stopping");
            termination = Termination::Stagnation;
            break;
        }

        // function-value stagnation over the trailing window
        let g = best_history.len();
        if g > STAGNATION_GENERATIONS {
            let past = best_history[g - 1 - STAGNATION_GENERATIONS];
            if past - best_value < STAGNATION_TOL {
                termination = Termination::Stagnation;
                break;
            }
        }
    }

    OptRecord {
        best_params,
        best_value,
        trace,
        evaluations_used: objective.used(),
        seed: config.seed,
        wall_time: start.elapsed().as_secs_f64(),
        termination,
    }
}
