//! Graph k-coloring with per-color costs: the pure max-k-coloring objective
//! when all costs are equal, the combined charging-station assignment when
//! they differ.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::constraints::ConstraintSpec;
use crate::encoding::{LzPolynomial, ZPolynomial};
use crate::error::{Error, Result};
use crate::register::{Assignment, QuditRegister};

use super::Problem;

/// `C(z) = sum_n c_{z_n} + lambda * #{(n,m) in E : z_n = z_m}`.
#[derive(Debug, Clone)]
pub struct GraphColoringProblem {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    num_colors: usize,
    color_costs: Vec<f64>,
    conflict_weight: f64,
}

impl GraphColoringProblem {
    pub fn new(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        num_colors: usize,
        color_costs: Vec<f64>,
        conflict_weight: f64,
    ) -> Result<Self> {
        if num_colors < 2 {
            return Err(Error::Consistency("need at least two colors".into()));
        }
        if color_costs.len() != num_colors {
            return Err(Error::Consistency(format!(
                "{} color costs for {} colors",
                color_costs.len(),
                num_colors
            )));
        }
        for &(u, v) in &edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Consistency(format!(
                    "edge ({u}, {v}) references a missing node"
                )));
            }
            if u == v {
                return Err(Error::Consistency(format!("self-loop at node {u}")));
            }
        }
        Ok(Self {
            num_nodes,
            edges,
            num_colors,
            color_costs,
            conflict_weight,
        })
    }

    /// Pure coloring: all color costs zero.
    pub fn pure(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        num_colors: usize,
        conflict_weight: f64,
    ) -> Result<Self> {
        let costs = vec![0.0; num_colors];
        Self::new(num_nodes, edges, num_colors, costs, conflict_weight)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn color_costs(&self) -> &[f64] {
        &self.color_costs
    }

    pub fn conflict_weight(&self) -> f64 {
        self.conflict_weight
    }

    /// Angular momentum encoding for k = 3: per node
    /// `c_0 + (c_1 - c_-1)/2 Lz + (c_1 + c_-1 - 2 c_0)/2 Lz^2` (color index z
    /// mapped to m = z - 1, costs `(c_-1, c_0, c_1)`), plus per edge the
    /// two-site delta `lambda [1 - Lz_n^2 - Lz_m^2 + 1/2 Lz_n Lz_m
    /// + 3/2 Lz_n^2 Lz_m^2]`.
    pub fn lz_hamiltonian(&self) -> Result<LzPolynomial> {
        if self.num_colors != 3 {
            return Err(Error::Unsupported(format!(
                "Lz coloring Hamiltonian is specific to k = 3, got k = {}; use the Fourier route",
                self.num_colors
            )));
        }
        let mut poly = LzPolynomial::new(self.num_nodes);
        let (cm, c0, cp) = (self.color_costs[0], self.color_costs[1], self.color_costs[2]);
        for n in 0..self.num_nodes {
            poly.add_constant(c0);
            poly.add_term(&[(n, 1)], 0.5 * (cp - cm));
            poly.add_term(&[(n, 2)], 0.5 * (cp + cm - 2.0 * c0));
        }
        let lam = self.conflict_weight;
        for &(n, m) in &self.edges {
            poly.add_constant(lam);
            poly.add_term(&[(n, 2)], -lam);
            poly.add_term(&[(m, 2)], -lam);
            poly.add_term(&[(n, 1), (m, 1)], 0.5 * lam);
            poly.add_term(&[(n, 2), (m, 2)], 1.5 * lam);
        }
        Ok(poly)
    }

    /// Generalized Pauli encoding for any k: per edge the unnormalized delta
    /// `lambda/k (1 + sum_{a=1}^{k-1} Z_n^a Z_m^{k-a})`, plus each node's
    /// color-cost term folded in through its single-site Fourier transform.
    pub fn z_hamiltonian(&self) -> Result<ZPolynomial> {
        let k = self.num_colors;
        let mut poly = ZPolynomial::new(self.num_nodes, k);
        let lam = self.conflict_weight;
        for &(n, m) in &self.edges {
            let mut zero = vec![0usize; self.num_nodes];
            poly.insert_term(zero.clone(), Complex64::new(lam / k as f64, 0.0));
            for a in 1..k {
                zero[n] = a;
                zero[m] = k - a;
                poly.insert_term(zero.clone(), Complex64::new(lam / k as f64, 0.0));
                zero[n] = 0;
                zero[m] = 0;
            }
        }
        if self.color_costs.iter().any(|&c| c != 0.0) {
            // single-site DFT of the per-node cost lookup
            for n in 0..self.num_nodes {
                for a in 0..k {
                    let mut coeff = Complex64::new(0.0, 0.0);
                    for (z, &c) in self.color_costs.iter().enumerate() {
                        coeff += Complex64::from_polar(c, -2.0 * PI * (a * z) as f64 / k as f64);
                    }
                    coeff /= k as f64;
                    if coeff.norm() > 1e-15 {
                        let mut exps = vec![0usize; self.num_nodes];
                        exps[n] = a;
                        poly.insert_term(exps, coeff);
                    }
                }
            }
        }
        Ok(poly)
    }
}

impl Problem for GraphColoringProblem {
    fn name(&self) -> &'static str {
        "graph_coloring"
    }

    fn register(&self) -> Result<QuditRegister> {
        QuditRegister::new(self.num_nodes, self.num_colors)
    }

    fn cost(&self, assignment: &Assignment) -> f64 {
        let z = assignment.digits();
        let mut total: f64 = z.iter().map(|&c| self.color_costs[c]).sum();
        for &(n, m) in &self.edges {
            if z[n] == z[m] {
                total += self.conflict_weight;
            }
        }
        total
    }

    fn constraints(&self) -> Vec<ConstraintSpec> {
        Vec::new() // conflicts are part of the cost, Eq.-(44) style
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::instances;

    #[test]
    fn coloring_cost_examples() {
        let tri = GraphColoringProblem::pure(3, instances::triangle(), 3, 20.0).unwrap();
        let r = tri.register().unwrap();
        let proper = Assignment::new(&r, vec![0, 1, 2]).unwrap();
        assert_eq!(tri.cost(&proper), 0.0);
        let same = Assignment::new(&r, vec![1, 1, 1]).unwrap();
        assert_eq!(tri.cost(&same), 60.0);

        let single =
            GraphColoringProblem::new(1, vec![], 3, vec![0.0, 1.0, 2.0], 20.0).unwrap();
        let r = single.register().unwrap();
        assert_eq!(single.cost(&Assignment::new(&r, vec![2]).unwrap()), 2.0);
    }

    #[test]
    fn lz_hamiltonian_matches_cost_on_path() {
        let p = GraphColoringProblem::new(
            3,
            instances::path(3),
            3,
            vec![0.0, 1.0, 2.0],
            20.0,
        )
        .unwrap();
        let r = p.register().unwrap();
        let diag = p.lz_hamiltonian().unwrap().diagonal(r).unwrap();
        for (index, z) in r.assignments().enumerate() {
            assert!(
                (diag.value_at(index) - p.cost(&z)).abs() < 1e-9,
                "mismatch at {:?}",
                z.digits()
            );
        }
    }

    #[test]
    fn lz_hamiltonian_trivial_and_unsupported() {
        let empty = GraphColoringProblem::pure(2, vec![], 3, 1.0).unwrap();
        let poly = empty.lz_hamiltonian().unwrap();
        let r = empty.register().unwrap();
        let diag = poly.diagonal(r).unwrap();
        assert!(diag.values().iter().all(|&v| v.abs() < 1e-12));

        let k4 = GraphColoringProblem::pure(2, vec![(0, 1)], 4, 1.0).unwrap();
        assert!(k4.lz_hamiltonian().is_err());
    }

    #[test]
    fn z_hamiltonian_matches_cost() {
        // triangle, k = 3, lambda = 1
        let tri = GraphColoringProblem::pure(3, instances::triangle(), 3, 1.0).unwrap();
        let r = tri.register().unwrap();
        let poly = tri.z_hamiltonian().unwrap();
        for z in r.assignments() {
            assert!((poly.evaluate(&z).unwrap() - tri.cost(&z)).abs() < 1e-9);
        }
        // with color costs folded in
        let comb =
            GraphColoringProblem::new(3, instances::triangle(), 3, vec![0.0, 1.0, 2.0], 20.0)
                .unwrap();
        let poly = comb.z_hamiltonian().unwrap();
        for z in r.assignments() {
            assert!((poly.evaluate(&z).unwrap() - comb.cost(&z)).abs() < 1e-9);
        }
    }

    #[test]
    fn z_hamiltonian_k2_is_ising_like() {
        // k = 2 single edge: delta = 1/2 (1 + Z_n Z_m)
        let p = GraphColoringProblem::pure(2, vec![(0, 1)], 2, 1.0).unwrap();
        let poly = p.z_hamiltonian().unwrap();
        assert_eq!(poly.sparsity(), 2);
        let r = p.register().unwrap();
        for z in r.assignments() {
            assert!((poly.evaluate(&z).unwrap() - p.cost(&z)).abs() < 1e-12);
        }
    }

    #[test]
    fn z_hamiltonian_sparsity_per_edge() {
        for k in 2..=4 {
            let p = GraphColoringProblem::pure(2, vec![(0, 1)], k, 1.0).unwrap();
            assert_eq!(p.z_hamiltonian().unwrap().sparsity(), k);
        }
    }

    #[test]
    fn validation_errors() {
        assert!(GraphColoringProblem::pure(3, vec![(0, 3)], 3, 1.0).is_err());
        assert!(GraphColoringProblem::pure(3, vec![(1, 1)], 3, 1.0).is_err());
        assert!(GraphColoringProblem::pure(3, vec![], 1, 1.0).is_err());
        assert!(GraphColoringProblem::new(3, vec![], 3, vec![0.0], 1.0).is_err());
    }
}
