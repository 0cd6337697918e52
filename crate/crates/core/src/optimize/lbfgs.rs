//! Limited-memory BFGS with central finite-difference gradients and Armijo
//! backtracking, the gradient-based baseline optimizer.

use std::collections::VecDeque;
use std::time::Instant;

use super::{Objective, OptRecord, Termination};

/// Curvature pairs kept for the two-loop recursion.
const MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 30;

#[derive(Debug, Clone)]
pub struct QnConfig {
    /// Central-difference step.
    pub fd_step: f64,
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for QnConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            seed: 0,
        }
    }
}

struct Tracker<'a> {
    objective: &'a mut Objective,
    best_params: Vec<f64>,
    best_value: f64,
}

impl<'a> Tracker<'a> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        let v = self.objective.try_eval(x)?;
        if v < self.best_value {
            self.best_value = v;
            self.best_params = x.to_vec();
        }
        Some(v)
    }

    /// Central differences: g_i = (f(x + h e_i) - f(x - h e_i)) / 2h.
    fn gradient(&mut self, x: &[f64], h: f64) -> Option<Vec<f64>> {
        let mut g = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let fp = self.eval(&probe)?;
            probe[i] = x[i] - h;
            let fm = self.eval(&probe)?;
            probe[i] = x[i];
            g.push((fp - fm) / (2.0 * h));
        }
        Some(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Two-loop recursion: apply the implicit inverse Hessian to the gradient.
fn search_direction(gradient: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = gradient.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let alpha = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= alpha * yi;
        }
        alphas.push(alpha);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), alpha) in pairs.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha - beta) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

/// Quasi-Newton descent from `initial_point`. Deterministic; the seed is
/// only recorded for provenance.
pub fn qn_minimize(objective: &mut Objective, config: &QnConfig, initial_point: &[f64]) -> OptRecord {
    let start = Instant::now();
    assert!(config.fd_step > 0.0, "finite-difference step must be positive");
    let mut tracker = Tracker {
        objective,
        best_params: initial_point.to_vec(),
        best_value: f64::INFINITY,
    };

    let mut trace = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut x = initial_point.to_vec();
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    let mut f = match tracker.eval(&x) {
        Some(v) => v,
        None => {
            return OptRecord {
                best_params: tracker.best_params,
                best_value: tracker.best_value,
                trace,
                evaluations_used: tracker.objective.used(),
                seed: config.seed,
                wall_time: start.elapsed().as_secs_f64(),
                termination: Termination::BudgetExhausted,
            }
        }
    };
    let mut gradient = match tracker.gradient(&x, config.fd_step) {
        Some(g) => g,
        None => {
            return OptRecord {
                best_params: tracker.best_params,
                best_value: tracker.best_value,
                trace,
                evaluations_used: tracker.objective.used(),
                seed: config.seed,
                wall_time: start.elapsed().as_secs_f64(),
                termination: Termination::BudgetExhausted,
            }
        }
    };

    'outer: for _ in 0..config.max_iterations {
        if inf_norm(&gradient) < config.gradient_tolerance {
            termination = Termination::GradientConverged;
            break;
        }
        let mut direction = search_direction(&gradient, &pairs);
        let mut slope = dot(&gradient, &direction);
        if slope >= 0.0 {
            // curvature information went bad; restart from steepest descent
            pairs.clear();
            direction = gradient.iter().map(|g| -g).collect();
            slope = dot(&gradient, &direction);
            if slope >= 0.0 {
                termination = Termination::GradientConverged;
                break;
            }
        }

        // Armijo backtracking from the natural quasi-Newton step
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            let fc = match tracker.eval(&candidate) {
                Some(v) => v,
                None => {
                    termination = Termination::BudgetExhausted;
                    break 'outer;
                }
            };
            if fc <= f + ARMIJO_C1 * alpha * slope {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= 0.5;
        }
        let (x_next, f_next) = match accepted {
            Some(step) => step,
            None => {
                termination = Termination::LineSearchFailure;
                break;
            }
        };

        let gradient_next = match tracker.gradient(&x_next, config.fd_step) {
            Some(g) => g,
            None => {
                termination = Termination::BudgetExhausted;
                break;
            }
        };

        let s: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gradient_next
            .iter()
            .zip(&gradient)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            if pairs.len() == MEMORY {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }

        x = x_next;
        f = f_next;
        gradient = gradient_next;
        trace.push(f);
    }

    OptRecord {
        best_params: tracker.best_params,
        best_value: tracker.best_value,
        trace,
        evaluations_used: tracker.objective.used(),
        seed: config.seed,
        wall_time: start.elapsed().as_secs_f64(),
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges_fast() {
        let mut obj = Objective::new(10_000, |x: &[f64]| x.iter().map(|v| v * v).sum());
        let rec = qn_minimize(&mut obj, &QnConfig::default(), &[1.0, 1.0]);
        assert!(rec.best_value < 1e-12, "best {}", rec.best_value);
        assert!(rec.trace.len() <= 5, "{} iterations", rec.trace.len());
        assert_eq!(rec.termination, Termination::GradientConverged);
    }

    #[test]
    fn finite_difference_gradient_accuracy() {
        // smooth fixture with a known gradient
        let f = |x: &[f64]| (x[0]).sin() * (2.0 * x[1]).cos() + 0.5 * x[0] * x[0];
        let grad = |x: &[f64]| {
            vec![
                x[0].cos() * (2.0 * x[1]).cos() + x[0],
                -2.0 * x[0].sin() * (2.0 * x[1]).sin(),
            ]
        };
        let mut obj = Objective::new(1000, f);
        let mut tracker = Tracker {
            objective: &mut obj,
            best_params: vec![],
            best_value: f64::INFINITY,
        };
        let x = [0.7, -0.3];
        let g = tracker.gradient(&x, 1e-5).unwrap();
        let exact = grad(&x);
        for (a, b) in g.iter().zip(&exact) {
            assert!(
                (a - b).abs() <= 1e-6 * b.abs().max(1.0),
                "fd {a} vs exact {b}"
            );
        }
    }

    #[test]
    fn multimodal_run_ends_at_local_minimum() {
        // 2-D Rastrigin from a fixed start: wherever it stops must be a
        // local minimum along both coordinates
        let f = |x: &[f64]| {
            20.0 + x
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>()
        };
        let mut obj = Objective::new(100_000, f);
        let cfg = QnConfig::default();
        let rec = qn_minimize(&mut obj, &cfg, &[2.2, -1.7]);
        let x = &rec.best_params;
        let h = 2.0 * cfg.fd_step;
        let f0 = f(x);
        for i in 0..2 {
            for sign in [-1.0, 1.0] {
                let mut probe = x.clone();
                probe[i] += sign * h;
                assert!(
                    f(&probe) >= f0 - 1e-9,
                    "perturbation {i} {sign} decreases f"
                );
            }
        }
    }

    #[test]
    fn budget_exhaustion_mid_gradient() {
        let mut obj = Objective::new(3, |x: &[f64]| x.iter().map(|v| v * v).sum());
        let rec = qn_minimize(&mut obj, &QnConfig::default(), &[1.0, 1.0]);
        assert_eq!(rec.termination, Termination::BudgetExhausted);
        assert!(rec.best_value.is_finite());
        assert_eq!(rec.evaluations_used, 3);
    }
}
