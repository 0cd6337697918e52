//! Multiway number partitioning: spread a list of positive integers over k
//! subsets so their sums match. One qudit of dimension k per number; subset
//! labels 1..k map to digits 0..k-1.

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::register::{Assignment, QuditRegister};

use super::Problem;

#[derive(Debug, Clone)]
pub struct PartitionProblem {
    pub numbers: Vec<u64>,
    pub num_subsets: usize,
}

impl PartitionProblem {
    pub fn new(numbers: Vec<u64>, num_subsets: usize) -> Result<Self> {
        if num_subsets < 2 || numbers.len() < num_subsets {
            return Err(Error::Consistency(format!(
                "need n >= k >= 2, got n = {}, k = {num_subsets}",
                numbers.len()
            )));
        }
        if numbers.iter().any(|&s| s == 0) {
            return Err(Error::Consistency("all numbers must be positive".into()));
        }
        Ok(Self {
            numbers,
            num_subsets,
        })
    }

    /// Sum of the numbers assigned to subset `i` (0-based digit label).
    pub fn subset_sum(&self, assignment: &Assignment, subset: usize) -> f64 {
        assignment
            .digits()
            .iter()
            .zip(&self.numbers)
            .filter(|(&z, _)| z == subset)
            .map(|(_, &s)| s as f64)
            .sum()
    }
}

impl Problem for PartitionProblem {
    fn name(&self) -> &'static str {
        "partition"
    }

    fn register(&self) -> Result<QuditRegister> {
        QuditRegister::new(self.numbers.len(), self.num_subsets)
    }

    /// C(z) = sum_{a<b} (V_a - V_b)^2; zero iff perfectly balanced.
    fn cost(&self, assignment: &Assignment) -> f64 {
        let sums: Vec<f64> = (0..self.num_subsets)
            .map(|i| self.subset_sum(assignment, i))
            .collect();
        let mut total = 0.0;
        for a in 0..self.num_subsets {
            for b in (a + 1)..self.num_subsets {
                let diff = sums[a] - sums[b];
                total += diff * diff;
            }
        }
        total
    }

    fn constraints(&self) -> Vec<ConstraintSpec> {
        Vec::new()
    }
}

/// Monomial coefficients (ascending powers of z) of the degree k-1 polynomial
/// realizing the subset indicator `delta_{i,z}` over 1-based labels
/// z in {1..k}, as used when substituting angular momentum operators.
pub fn subset_indicator_coeffs(subset: usize, num_subsets: usize) -> Vec<f64> {
    assert!(
        (1..=num_subsets).contains(&subset),
        "subset label is 1-based"
    );
    let k = num_subsets;
    let mut coeffs = vec![0.0f64; k];
    // Lagrange basis for node `subset` over {1, ..., k}
    let mut basis = vec![0.0f64; k];
    basis[0] = 1.0;
    let mut denom = 1.0;
    let mut degree = 0;
    for z in 1..=k {
        if z == subset {
            continue;
        }
        denom *= (subset as f64) - (z as f64);
        for j in (0..=degree).rev() {
            basis[j + 1] += basis[j];
            basis[j] *= -(z as f64);
        }
        degree += 1;
    }
    for j in 0..k {
        coeffs[j] = basis[j] / denom;
    }
    coeffs
}

/// Evaluate a coefficient vector at a 1-based label.
pub fn eval_poly(coeffs: &[f64], z: usize) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for &c in coeffs {
        acc += c * pow;
        pow *= z as f64;
    }
    acc
}
