//! Bounded knapsack: item counts on qudits of dimension c + 1, value
//! maximization as cost minimization, one weight-capacity inequality.

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::register::{Assignment, QuditRegister};

use super::Problem;

#[derive(Debug, Clone)]
pub struct KnapsackProblem {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    /// Copies available of each item; qudit dimension is copies + 1.
    pub copies: usize,
    pub capacity: f64,
}

impl KnapsackProblem {
    pub fn new(weights: Vec<f64>, values: Vec<f64>, copies: usize, capacity: f64) -> Result<Self> {
        if weights.len() != values.len() || weights.is_empty() {
            return Err(Error::Consistency(
                "weights and values must be nonempty and equal length".into(),
            ));
        }
        if copies < 1 {
            return Err(Error::Consistency("need at least one copy per item".into()));
        }
        if weights.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Consistency("non-finite weight or value".into()));
        }
        Ok(Self {
            weights,
            values,
            copies,
            capacity,
        })
    }

    pub fn total_weight(&self, assignment: &Assignment) -> f64 {
        assignment
            .digits()
            .iter()
            .zip(&self.weights)
            .map(|(&z, w)| z as f64 * w)
            .sum()
    }
}

impl Problem for KnapsackProblem {
    fn name(&self) -> &'static str {
        "knapsack"
    }

    fn register(&self) -> Result<QuditRegister> {
        QuditRegister::new(self.weights.len(), self.copies + 1)
    }

    /// Minimized form: -sum_i v_i z_i.
    fn cost(&self, assignment: &Assignment) -> f64 {
        -assignment
            .digits()
            .iter()
            .zip(&self.values)
            .map(|(&z, v)| z as f64 * v)
            .sum::<f64>()
    }

    /// One inequality: sum_i w_i z_i - W <= 0.
    fn constraints(&self) -> Vec<ConstraintSpec> {
        let weights = self.weights.clone();
        let capacity = self.capacity;
        vec![ConstraintSpec::inequality(
            "capacity",
            1.0,
            move |z: &Assignment| {
                z.digits()
                    .iter()
                    .zip(&weights)
                    .map(|(&zi, w)| zi as f64 * w)
                    .sum::<f64>()
                    - capacity
            },
        )]
    }
}
