//! Concrete problem encoders: cost evaluators, constraint lists, operator
//! encodings, bundled graph instances, and the exhaustive oracle.

mod coloring;
mod ev;
pub mod instances;
mod jobshop;
mod knapsack;
mod oracle;
mod partition;

pub use coloring::GraphColoringProblem;
pub use ev::EvChargingProblem;
pub use jobshop::{JobShopObjective, JobShopProblem};
pub use knapsack::KnapsackProblem;
pub use oracle::{brute_force_optima, BruteForceResult};
pub use partition::{eval_poly, subset_indicator_coeffs, PartitionProblem};

use crate::constraints::ConstraintSpec;
use crate::encoding::DiagonalHamiltonian;
use crate::error::Result;
use crate::register::{Assignment, QuditRegister};

/// Common surface of every problem encoder: the register it lives on, its
/// classical cost, and its constraint list (unit penalty weights; scale them
/// with [`ConstraintSpec::with_weight`]).
pub trait Problem {
    fn name(&self) -> &'static str;
    fn register(&self) -> Result<QuditRegister>;
    fn cost(&self, assignment: &Assignment) -> f64;
    fn constraints(&self) -> Vec<ConstraintSpec>;

    fn cost_diagonal(&self) -> Result<DiagonalHamiltonian> {
        DiagonalHamiltonian::from_cost(self.register()?, |z| self.cost(z))
    }
}
