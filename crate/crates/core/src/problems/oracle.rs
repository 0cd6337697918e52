//! Exhaustive minimization over all d^N assignments, the exact reference
//! every QAOA result is measured against.

use crate::encoding::DiagonalHamiltonian;
use crate::register::Assignment;

/// States within this tolerance of the scanned minimum count as optimal.
pub const OPTIMUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub min_value: f64,
    /// Complete optimal set, ordered by basis index.
    pub optima: Vec<Assignment>,
}

/// Scan the full diagonal. The register cap bounds the work up front.
pub fn brute_force_optima(diagonal: &DiagonalHamiltonian) -> BruteForceResult {
    let register = diagonal.register();
    let min_value = diagonal.min_value();
    let optima = register
        .assignments()
        .enumerate()
        .filter(|(i, _)| diagonal.value_at(*i) <= min_value + OPTIMUM_TOL)
        .map(|(_, z)| z)
        .collect();
    BruteForceResult { min_value, optima }
}
