//! Three interchangeable operator representations of a classical cost
//! function: the diagonal over basis states, a generalized-Pauli Z polynomial
//! obtained by discrete Fourier transform, and an angular momentum (Lz)
//! polynomial obtained by substituting z -> l + m.

use ndarray::Array2;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::apply_local_raw;
use crate::register::{Assignment, QuditRegister};

/// Relative threshold below which Fourier coefficients are treated as zero.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Imaginary residue above which an evaluated Z polynomial is rejected.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// A cost function tabulated over every basis state: `values[i] = C(z_i)`.
#[derive(Debug, Clone)]
pub struct DiagonalHamiltonian {
    register: QuditRegister,
    values: Vec<f64>,
}

impl DiagonalHamiltonian {
    /// Tabulate a cost function over the whole register.
    pub fn from_cost<F>(register: QuditRegister, cost: F) -> Result<Self>
    where
        F: Fn(&Assignment) -> f64,
    {
        let mut values = Vec::with_capacity(register.size());
        for assignment in register.assignments() {
            let c = cost(&assignment);
            if !c.is_finite() {
                return Err(Error::Encoding(format!(
                    "cost is not finite at z = {:?}",
                    assignment.digits()
                )));
            }
            values.push(c);
        }
        Ok(Self { register, values })
    }

    pub fn from_values(register: QuditRegister, values: Vec<f64>) -> Result<Self> {
        if values.len() != register.size() {
            return Err(Error::Encoding(format!(
                "diagonal length {} does not match register size {}",
                values.len(),
                register.size()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Encoding(format!("non-finite diagonal entry {bad}")));
        }
        Ok(Self { register, values })
    }

    pub fn register(&self) -> QuditRegister {
        self.register
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Discrete Fourier transform of a cost function, indexed by the exponent
/// vector `a` with the same little-endian layout as the basis.
#[derive(Debug, Clone)]
pub struct FourierCoefficients {
    register: QuditRegister,
    coeffs: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn register(&self) -> QuditRegister {
        self.register
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Inverse transform back to the diagonal: C(z) = d^-N sum_a Chat(a) e^{2 pi i a.z/d}.
    pub fn inverse(&self) -> DiagonalHamiltonian {
        let d = self.register.dim();
        let scale = 1.0 / self.register.size() as f64;
        let mut kernel = Array2::zeros((d, d));
        for a in 0..d {
            for z in 0..d {
                kernel[(z, a)] = Complex64::from_polar(1.0, 2.0 * PI * (a * z) as f64 / d as f64);
            }
        }
        let values = axis_transform(self.register, &self.coeffs, &kernel)
            .into_iter()
            .map(|c| c.re * scale)
            .collect();
        DiagonalHamiltonian {
            register: self.register,
            values,
        }
    }
}

/// Forward transform: Chat(a) = sum_z C(z) e^{-2 pi i a.z/d}, axis by axis.
pub fn dft_cost(diagonal: &DiagonalHamiltonian) -> FourierCoefficients {
    let register = diagonal.register;
    let d = register.dim();
    let mut kernel = Array2::zeros((d, d));
    for a in 0..d {
        for z in 0..d {
            kernel[(a, z)] = Complex64::from_polar(1.0, -2.0 * PI * (a * z) as f64 / d as f64);
        }
    }
    let input: Vec<Complex64> = diagonal
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let coeffs = axis_transform(register, &input, &kernel);
    FourierCoefficients { register, coeffs }
}

/// Apply a d x d kernel along every mixed-radix axis: O(N d^{N+1}).
fn axis_transform(
    register: QuditRegister,
    input: &[Complex64],
    kernel: &Array2<Complex64>,
) -> Vec<Complex64> {
    let d = register.dim();
    let mut data = input.to_vec();
    let mut stride = 1usize;
    for _ in 0..register.num_qudits() {
        apply_local_raw(&mut data, d, stride, kernel);
        stride *= d;
    }
    data
}

/// Cost Hamiltonian as a polynomial in generalized Pauli Z operators:
/// `sum_a coeff(a) prod_j Z_j^{a_j}` with `coeff(a) = Chat(a)/d^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPolynomial {
    num_qudits: usize,
    dim: usize,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

impl ZPolynomial {
    /// Fourier-expand a diagonal Hamiltonian, pruning coefficients below
    /// [`PRUNE_THRESHOLD`] relative to the largest one.
    pub fn from_diagonal(diagonal: &DiagonalHamiltonian) -> Self {
        let fourier = dft_cost(diagonal);
        Self::from_fourier(&fourier)
    }

    pub fn from_fourier(fourier: &FourierCoefficients) -> Self {
        let register = fourier.register;
        let scale = 1.0 / register.size() as f64;
        let max = fourier
            .coeffs
            .iter()
            .map(|c| c.norm() * scale)
            .fold(0.0f64, f64::max);
        let cutoff = PRUNE_THRESHOLD * max.max(f64::MIN_POSITIVE);
        let mut terms = BTreeMap::new();
        for (index, c) in fourier.coeffs.iter().enumerate() {
            let coeff = c * scale;
            if coeff.norm() >= cutoff {
                let a = register.assignment_of(index).expect("in range");
                terms.insert(a.digits().to_vec(), coeff);
            }
        }
        Self {
            num_qudits: register.num_qudits(),
            dim: register.dim(),
            terms,
        }
    }

    pub fn new(num_qudits: usize, dim: usize) -> Self {
        Self {
            num_qudits,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn insert_term(&mut self, exponents: Vec<usize>, coeff: Complex64) {
        assert_eq!(exponents.len(), self.num_qudits);
        let entry = self
            .terms
            .entry(exponents)
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], Complex64)> {
        self.terms.iter().map(|(a, c)| (a.as_slice(), *c))
    }

    /// Number of retained terms.
    pub fn sparsity(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate on a basis state: sum_a coeff(a) e^{2 pi i a.z/d}. Real costs
    /// must come out real; a large imaginary residue flags a corrupt
    /// polynomial.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<f64> {
        if assignment.len() != self.num_qudits {
            return Err(Error::AssignmentLength {
                got: assignment.len(),
                expected: self.num_qudits,
            });
        }
        let d = self.dim as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (exps, coeff) in &self.terms {
            let mut dot = 0usize;
            for (a, z) in exps.iter().zip(assignment.digits()) {
                if *z >= self.dim {
                    return Err(Error::DigitOutOfRange {
                        digit: *z,
                        dim: self.dim,
                    });
                }
                dot += a * z;
            }
            let phase = Complex64::from_polar(1.0, 2.0 * PI * dot as f64 / d);
            acc += coeff * phase;
        }
        let scale = self
            .terms
            .values()
            .map(|c| c.norm())
            .sum::<f64>()
            .max(1.0);
        if acc.im.abs() > IMAG_TOLERANCE * scale {
            return Err(Error::Encoding(format!(
                "imaginary residue {:.3e} evaluating Z polynomial",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// One term per line: `a_1 ... a_N  re  im`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (exps, coeff) in &self.terms {
            for a in exps {
                out.push_str(&format!("{a} "));
            }
            out.push_str(&format!(" {:.17e} {:.17e}\n", coeff.re, coeff.im));
        }
        out
    }

    pub fn from_text(num_qudits: usize, dim: usize, text: &str) -> Result<Self> {
        let mut poly = Self::new(num_qudits, dim);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != num_qudits + 2 {
                return Err(Error::Encoding(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    num_qudits + 2,
                    fields.len()
                )));
            }
            let mut exps = Vec::with_capacity(num_qudits);
            for f in &fields[..num_qudits] {
                let a: usize = f
                    .parse()
                    .map_err(|_| Error::Encoding(format!("line {}: bad exponent {f}", lineno + 1)))?;
                exps.push(a);
            }
            let re: f64 = fields[num_qudits]
                .parse()
                .map_err(|_| Error::Encoding(format!("line {}: bad coefficient", lineno + 1)))?;
            let im: f64 = fields[num_qudits + 1]
                .parse()
                .map_err(|_| Error::Encoding(format!("line {}: bad coefficient", lineno + 1)))?;
            poly.insert_term(exps, Complex64::new(re, im));
        }
        Ok(poly)
    }
}

/// Cost Hamiltonian as a real polynomial in per-qudit Lz operators; a term
/// maps a power vector (one power per qudit) to its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LzPolynomial {
    num_qudits: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl LzPolynomial {
    pub fn new(num_qudits: usize) -> Self {
        Self {
            num_qudits,
            terms: BTreeMap::new(),
        }
    }

    pub fn num_qudits(&self) -> usize {
        self.num_qudits
    }

    /// Add `coeff * prod Lz_{qudit}^{power}`; repeated qudits multiply powers.
    pub fn add_term(&mut self, factors: &[(usize, usize)], coeff: f64) {
        let mut powers = vec![0usize; self.num_qudits];
        for &(qudit, power) in factors {
            assert!(qudit < self.num_qudits, "qudit index out of range");
            powers[qudit] += power;
        }
        let entry = self.terms.entry(powers).or_insert(0.0);
        *entry += coeff;
    }

    pub fn add_constant(&mut self, coeff: f64) {
        self.add_term(&[], coeff);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(p, c)| (p.as_slice(), *c))
    }

    pub fn max_power(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|p| p.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Tabulate over a register: value at z is sum_terms coeff * prod_j m_j^{p_j}
    /// with m_j = z_j - (d-1)/2. Powers at or above d are rejected; call
    /// [`LzPolynomial::reduced`] first if the source polynomial has them.
    pub fn diagonal(&self, register: QuditRegister) -> Result<DiagonalHamiltonian> {
        if self.num_qudits != register.num_qudits() {
            return Err(Error::Encoding(format!(
                "polynomial over {} qudits does not fit register of {}",
                self.num_qudits,
                register.num_qudits()
            )));
        }
        let d = register.dim();
        if self.max_power() >= d {
            return Err(Error::Encoding(format!(
                "Lz power {} not reduced below qudit dimension {}",
                self.max_power(),
                d
            )));
        }
        let ell = 0.5 * (d as f64 - 1.0);
        let mut values = Vec::with_capacity(register.size());
        for assignment in register.assignments() {
            let mut total = 0.0;
            for (powers, coeff) in &self.terms {
                let mut prod = *coeff;
                for (z, &p) in assignment.digits().iter().zip(powers) {
                    if p > 0 {
                        prod *= (*z as f64 - ell).powi(p as i32);
                    }
                }
                total += prod;
            }
            values.push(total);
        }
        DiagonalHamiltonian::from_values(register, values)
    }

    /// Rewrite powers >= d through the minimal polynomial of Lz on a d-level
    /// qudit (Lagrange interpolation of m^p on the spectrum). Exposed as an
    /// explicit step, never applied automatically.
    pub fn reduced(&self, dim: usize) -> LzPolynomial {
        let ell = 0.5 * (dim as f64 - 1.0);
        let spectrum: Vec<f64> = (0..dim).map(|z| z as f64 - ell).collect();
        let mut out = LzPolynomial::new(self.num_qudits);
        let mut work: Vec<(Vec<usize>, f64)> =
            self.terms.iter().map(|(p, c)| (p.clone(), *c)).collect();
        while let Some((powers, coeff)) = work.pop() {
            match powers.iter().position(|&p| p >= dim) {
                None => {
                    let entry = out.terms.entry(powers).or_insert(0.0);
                    *entry += coeff;
                }
                Some(j) => {
                    let p = powers[j];
                    let reduced = interpolate_power(&spectrum, p);
                    for (k, alpha) in reduced.iter().enumerate() {
                        if alpha.abs() == 0.0 {
                            continue;
                        }
                        let mut next = powers.clone();
                        next[j] = k;
                        work.push((next, coeff * alpha));
                    }
                }
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }
}

/// Coefficients of the degree < d polynomial agreeing with m^p on the given
/// spectrum points.
fn interpolate_power(spectrum: &[f64], p: usize) -> Vec<f64> {
    let d = spectrum.len();
    let mut coeffs = vec![0.0f64; d];
    for (i, &xi) in spectrum.iter().enumerate() {
        // Lagrange basis polynomial for node i, expanded in monomials.
        let mut basis = vec![0.0f64; d];
        basis[0] = 1.0;
        let mut denom = 1.0;
        let mut degree = 0;
        for (j, &xj) in spectrum.iter().enumerate() {
            if i == j {
                continue;
            }
            denom *= xi - xj;
            // multiply basis by (x - xj)
            for k in (0..=degree).rev() {
                basis[k + 1] += basis[k];
                basis[k] *= -xj;
            }
            degree += 1;
        }
        let value = xi.powi(p as i32) / denom;
        for k in 0..d {
            coeffs[k] += basis[k] * value;
        }
    }
    coeffs
}
