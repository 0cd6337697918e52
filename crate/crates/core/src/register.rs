//! Register of `N` qudits of dimension `d`: basis indexing, assignments, and
//! dense state vectors.
//!
//! Basis order is little-endian: qudit 0 is the fastest-varying digit and
//! `index = sum_j z_j * d^j`. Every serialized output carries this note.

use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the PRNG used for all sampling, recorded in run outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Default cap on the total Hilbert-space dimension d^N.
pub const DEFAULT_DIM_LIMIT: u64 = 1 << 24;

/// The `(d, N)` Hilbert space descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuditRegister {
    num_qudits: usize,
    dim: usize,
}

impl QuditRegister {
    /// Register of `num_qudits` qudits with `dim` levels each, subject to the
    /// default d^N cap.
    pub fn new(num_qudits: usize, dim: usize) -> Result<Self> {
        Self::with_limit(num_qudits, dim, DEFAULT_DIM_LIMIT)
    }

    /// Same as [`QuditRegister::new`] with an explicit d^N cap. Fails fast
    /// instead of letting a typo allocate gigabytes.
    pub fn with_limit(num_qudits: usize, dim: usize, limit: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if num_qudits == 0 {
            return Err(Error::RegisterMismatch("register needs at least one qudit".into()));
        }
        let mut size: u64 = 1;
        for _ in 0..num_qudits {
            size = size.saturating_mul(dim as u64);
            if size > limit {
                return Err(Error::DimensionLimit {
                    dim,
                    num_qudits,
                    limit,
                });
            }
        }
        Ok(Self { num_qudits, dim })
    }

    pub fn num_qudits(&self) -> usize {
        self.num_qudits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total Hilbert-space dimension d^N.
    pub fn size(&self) -> usize {
        self.dim.pow(self.num_qudits as u32)
    }

    /// Little-endian mixed-radix index of an assignment.
    pub fn index_of(&self, assignment: &Assignment) -> Result<usize> {
        if assignment.len() != self.num_qudits {
            return Err(Error::AssignmentLength {
                got: assignment.len(),
                expected: self.num_qudits,
            });
        }
        let mut index = 0usize;
        let mut stride = 1usize;
        for &z in assignment.digits() {
            if z >= self.dim {
                return Err(Error::DigitOutOfRange { digit: z, dim: self.dim });
            }
            index += z * stride;
            stride *= self.dim;
        }
        Ok(index)
    }

    /// Inverse of [`QuditRegister::index_of`].
    pub fn assignment_of(&self, index: usize) -> Result<Assignment> {
        if index >= self.size() {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.size(),
            });
        }
        let mut digits = Vec::with_capacity(self.num_qudits);
        let mut rest = index;
        for _ in 0..self.num_qudits {
            digits.push(rest % self.dim);
            rest /= self.dim;
        }
        Ok(Assignment::unchecked(digits))
    }

    /// Iterate all assignments in basis order.
    pub fn assignments(&self) -> AssignmentIter {
        AssignmentIter {
            register: *self,
            next: 0,
        }
    }
}

pub struct AssignmentIter {
    register: QuditRegister,
    next: usize,
}

impl Iterator for AssignmentIter {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.next >= self.register.size() {
            return None;
        }
        let a = self.register.assignment_of(self.next).expect("in range");
        self.next += 1;
        Some(a)
    }
}

/// A classical configuration: one digit `z_j` in `[0, d)` per qudit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    digits: Vec<usize>,
}

impl Assignment {
    /// Build an assignment checked against a register.
    pub fn new(register: &QuditRegister, digits: Vec<usize>) -> Result<Self> {
        if digits.len() != register.num_qudits() {
            return Err(Error::AssignmentLength {
                got: digits.len(),
                expected: register.num_qudits(),
            });
        }
        for &z in &digits {
            if z >= register.dim() {
                return Err(Error::DigitOutOfRange {
                    digit: z,
                    dim: register.dim(),
                });
            }
        }
        Ok(Self { digits })
    }

    pub(crate) fn unchecked(digits: Vec<usize>) -> Self {
        Self { digits }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

/// Dense complex amplitude vector over a register's basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    register: QuditRegister,
    amplitudes: Array1<Complex64>,
}

impl StateVector {
    /// Equal superposition of all basis states, amplitude d^{-N/2}.
    pub fn uniform(register: QuditRegister) -> Self {
        let size = register.size();
        let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
        Self {
            register,
            amplitudes: Array1::from_elem(size, amp),
        }
    }

    /// Basis state |z> for the given assignment.
    pub fn basis(register: QuditRegister, assignment: &Assignment) -> Result<Self> {
        let index = register.index_of(assignment)?;
        let mut amplitudes = Array1::zeros(register.size());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Wrap raw amplitudes; the caller vouches for the length.
    pub fn from_amplitudes(register: QuditRegister, amplitudes: Array1<Complex64>) -> Result<Self> {
        if amplitudes.len() != register.size() {
            return Err(Error::RegisterMismatch(format!(
                "amplitude vector length {} does not match register size {}",
                amplitudes.len(),
                register.size()
            )));
        }
        Ok(Self {
            register,
            amplitudes,
        })
    }

    pub fn register(&self) -> QuditRegister {
        self.register
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Array1<Complex64> {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm; returns the norm that was divided out.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = Complex64::new(1.0 / n, 0.0);
            self.amplitudes.mapv_inplace(|z| z * inv);
        }
        n
    }

    /// |amplitude|^2 of one basis state.
    pub fn probability(&self, index: usize) -> Result<f64> {
        self.amplitudes
            .get(index)
            .map(|z| z.norm_sqr())
            .ok_or(Error::IndexOutOfRange {
                index,
                size: self.register.size(),
            })
    }

    /// Full probability vector.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Draw `count` i.i.d. assignments by inverse-CDF over the cumulative
    /// probability vector, using the seeded [`RNG_ALGORITHM`] generator.
    pub fn sample(&self, rng_seed: u64, count: usize) -> Result<Vec<Assignment>> {
        let norm = self.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::UnnormalizedState { norm });
        }
        let mut cdf = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0f64;
        for z in self.amplitudes.iter() {
            acc += z.norm_sqr();
            cdf.push(acc);
        }
        let total = *cdf.last().expect("nonempty register");

        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = match cdf.binary_search_by(|c| c.total_cmp(&u)) {
                Ok(i) => i,
                Err(i) => i.min(cdf.len() - 1),
            };
            out.push(self.register.assignment_of(idx)?);
        }
        Ok(out)
    }

    /// <self|other> = sum_i conj(a_i) b_i.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch(
                "inner product requires matching registers".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(n: usize, d: usize) -> QuditRegister {
        QuditRegister::new(n, d).unwrap()
    }

    #[test]
    fn index_of_little_endian() {
        let r = reg(2, 3);
        let z0 = Assignment::new(&r, vec![0, 0]).unwrap();
        assert_eq!(r.index_of(&z0).unwrap(), 0);
        let z = Assignment::new(&r, vec![1, 2]).unwrap();
        assert_eq!(r.index_of(&z).unwrap(), 7); // 1 + 2*3
    }

    #[test]
    fn assignment_of_examples() {
        let r = reg(2, 3);
        assert_eq!(r.assignment_of(7).unwrap().digits(), &[1, 2]);
        let r = reg(3, 2);
        assert_eq!(r.assignment_of(5).unwrap().digits(), &[1, 0, 1]);
        let r = reg(1, 4);
        assert_eq!(r.assignment_of(3).unwrap().digits(), &[3]);
    }

    #[test]
    fn index_round_trip_exhaustive() {
        for d in 2..=4 {
            for n in 1..=3 {
                let r = reg(n, d);
                for i in 0..r.size() {
                    let a = r.assignment_of(i).unwrap();
                    assert_eq!(r.index_of(&a).unwrap(), i);
                }
            }
        }
    }

    #[test]
    fn digit_out_of_range_rejected() {
        let r = reg(2, 3);
        assert!(Assignment::new(&r, vec![0, 3]).is_err());
        let bad = Assignment::unchecked(vec![0, 3]);
        assert!(r.index_of(&bad).is_err());
        assert!(r.assignment_of(9).is_err());
    }

    #[test]
    fn dimension_cap() {
        assert!(QuditRegister::new(30, 3).is_err());
        assert!(QuditRegister::with_limit(30, 3, u64::MAX).is_ok());
        assert!(QuditRegister::new(1, 1).is_err());
    }

    #[test]
    fn uniform_state_amplitudes() {
        let s = StateVector::uniform(reg(1, 3));
        for z in s.amplitudes() {
            assert!((z - Complex64::new(1.0 / 3.0_f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        let s = StateVector::uniform(reg(2, 2));
        for z in s.amplitudes() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let s = StateVector::uniform(reg(6, 3));
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let s = StateVector::uniform(reg(2, 3));
        assert!((s.probability(4).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let total: f64 = s.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(s.probability(9).is_err());
    }

    #[test]
    fn basis_state_probability() {
        let r = reg(2, 3);
        let a = r.assignment_of(5).unwrap();
        let s = StateVector::basis(r, &a).unwrap();
        assert_eq!(s.probability(5).unwrap(), 1.0);
        assert_eq!(s.probability(3).unwrap(), 0.0);
    }

    #[test]
    fn sample_from_basis_state() {
        let r = reg(2, 3);
        let a = r.assignment_of(3).unwrap();
        let s = StateVector::basis(r, &a).unwrap();
        let draws = s.sample(1234, 10).unwrap();
        assert_eq!(draws.len(), 10);
        for d in &draws {
            assert_eq!(d, &a);
        }
    }

    #[test]
    fn sample_deterministic_and_concentrated() {
        let s = StateVector::uniform(reg(1, 2));
        let n = 100_000;
        let a = s.sample(99, n).unwrap();
        let b = s.sample(99, n).unwrap();
        assert_eq!(a, b);
        let zeros = a.iter().filter(|x| x.digits()[0] == 0).count() as f64;
        let freq = zeros / n as f64;
        // 3 sigma binomial bound around 0.5
        let bound = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((freq - 0.5).abs() < bound, "freq {freq} outside {bound}");
    }

    #[test]
    fn sample_rejects_unnormalized() {
        let r = reg(1, 2);
        let amps = Array1::from_elem(2, Complex64::new(1.0, 0.0));
        let s = StateVector::from_amplitudes(r, amps).unwrap();
        assert!(s.sample(0, 1).is_err());
    }

    #[test]
    fn inner_products() {
        let r = reg(2, 3);
        let u = StateVector::uniform(r);
        assert!((u.inner_product(&u).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let a = StateVector::basis(r, &r.assignment_of(2).unwrap()).unwrap();
        let b = StateVector::basis(r, &r.assignment_of(4).unwrap()).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(a.inner_product(&a).unwrap(), Complex64::new(1.0, 0.0));
        let overlap = u.inner_product(&a).unwrap();
        assert!((overlap - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-12);
        let other = StateVector::uniform(reg(1, 3));
        assert!(u.inner_product(&other).is_err());
    }
}
