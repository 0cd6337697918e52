//! Local d x d operators: angular momentum matrices, generalized Pauli clock
//! and shift, spectral exponentials, and application of a local unitary to one
//! qudit axis of a state vector.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg;
use crate::register::StateVector;

const HERMITIAN_TOL: f64 = 1e-12;
const SPECTRAL_TOL: f64 = 1e-12;

/// A dense operator on a single qudit.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    dim: usize,
    matrix: Array2<Complex64>,
}

impl LocalOperator {
    pub fn new(matrix: Array2<Complex64>) -> Self {
        let dim = matrix.nrows();
        assert_eq!(dim, matrix.ncols(), "local operator must be square");
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(Array2::eye(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Max-norm of M - M^dag.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut max = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let r = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                max = max.max(r);
            }
        }
        max
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() < HERMITIAN_TOL
    }

    /// Max-norm of M^dag M - I.
    pub fn unitarity_residual(&self) -> f64 {
        let mut max = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    acc += self.matrix[(k, i)].conj() * self.matrix[(k, j)];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                max = max.max((acc - expect).norm());
            }
        }
        max
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() < HERMITIAN_TOL
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self.matrix[(j, i)].conj();
            }
        }
        Self::new(m)
    }

    pub fn matmul(&self, other: &LocalOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::new(self.matrix.dot(&other.matrix))
    }
}

/// Eigensystem of a Hermitian local operator, used to exponentiate it.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<Complex64>,
}

impl SpectralDecomposition {
    /// V diag(w) V^dag.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let n = self.eigenvalues.len();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.eigenvectors[(i, k)]
                        * self.eigenvalues[k]
                        * self.eigenvectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Hermitian eigendecomposition with a residual gate at 1e-12 (relative to
/// the operator scale): a failed solve is an error, never an approximation.
pub fn spectral_decomposition(op: &LocalOperator) -> Result<SpectralDecomposition> {
    let residual = op.hermiticity_residual();
    if residual >= HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let (w, v) = linalg::eigh(op.matrix())?;
    let dec = SpectralDecomposition {
        eigenvalues: Array1::from_vec(w),
        eigenvectors: v,
    };
    let rec = dec.reconstruct();
    let scale = op.matrix.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut max = 0.0_f64;
    for (a, b) in rec.iter().zip(op.matrix.iter()) {
        max = max.max((a - b).norm());
    }
    if max > SPECTRAL_TOL * scale {
        return Err(Error::EigensolverFailure {
            residual: max,
            tol: SPECTRAL_TOL,
        });
    }
    Ok(dec)
}

/// Lz in the m-basis: diagonal entries m = z - (d-1)/2 for z = 0..d-1.
pub fn lz_matrix(dim: usize) -> LocalOperator {
    let ell = 0.5 * (dim as f64 - 1.0);
    let mut m = Array2::zeros((dim, dim));
    for z in 0..dim {
        m[(z, z)] = Complex64::new(z as f64 - ell, 0.0);
    }
    LocalOperator::new(m)
}

/// Raising operator: L+|l,m> = sqrt((l-m)(l+m+1)) |l,m+1>.
pub fn lplus_matrix(dim: usize) -> LocalOperator {
    let ell = 0.5 * (dim as f64 - 1.0);
    let mut mat = Array2::zeros((dim, dim));
    for z in 0..dim.saturating_sub(1) {
        let m = z as f64 - ell;
        let c = ((ell - m) * (ell + m + 1.0)).sqrt();
        mat[(z + 1, z)] = Complex64::new(c, 0.0);
    }
    LocalOperator::new(mat)
}

/// Lowering operator, the adjoint of L+.
pub fn lminus_matrix(dim: usize) -> LocalOperator {
    lplus_matrix(dim).adjoint()
}

/// Lx = (L+ + L-)/2.
pub fn lx_matrix(dim: usize) -> LocalOperator {
    let p = lplus_matrix(dim);
    let m = lminus_matrix(dim);
    LocalOperator::new((p.matrix() + m.matrix()).mapv(|z| z * 0.5))
}

/// Ly = (L+ - L-)/(2i).
pub fn ly_matrix(dim: usize) -> LocalOperator {
    let p = lplus_matrix(dim);
    let m = lminus_matrix(dim);
    let half_over_i = Complex64::new(0.0, -0.5);
    LocalOperator::new((p.matrix() - m.matrix()).mapv(|z| z * half_over_i))
}

/// Generalized Pauli Z (clock): diagonal entries e^{2 pi i z / d}.
pub fn gen_z_matrix(dim: usize) -> LocalOperator {
    let mut m = Array2::zeros((dim, dim));
    for z in 0..dim {
        m[(z, z)] = Complex64::from_polar(1.0, 2.0 * PI * z as f64 / dim as f64);
    }
    LocalOperator::new(m)
}

/// Generalized Pauli X (shift): |(z+1) mod d><z|.
pub fn gen_x_matrix(dim: usize) -> LocalOperator {
    let mut m = Array2::zeros((dim, dim));
    for z in 0..dim {
        m[((z + 1) % dim, z)] = Complex64::new(1.0, 0.0);
    }
    LocalOperator::new(m)
}

/// e^{-i angle op} for Hermitian `op`, via spectral decomposition.
pub fn exp_hermitian(op: &LocalOperator, angle: f64) -> Result<LocalOperator> {
    let dec = spectral_decomposition(op)?;
    let d = op.dim();
    let phases: Vec<Complex64> = dec
        .eigenvalues
        .iter()
        .map(|&w| Complex64::from_polar(1.0, -angle * w))
        .collect();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += dec.eigenvectors[(i, k)] * phases[k] * dec.eigenvectors[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Ok(LocalOperator::new(out))
}

/// Contract a d x d matrix against one mixed-radix axis of a raw amplitude
/// slice. `stride` is the axis stride (d^j for qudit j); the slice length must
/// be a multiple of `stride * dim`, which also covers registers carrying an
/// extra ancilla factor above the qudits.
pub(crate) fn apply_local_raw(
    amps: &mut [Complex64],
    dim: usize,
    stride: usize,
    matrix: &Array2<Complex64>,
) {
    let block = stride * dim;
    debug_assert_eq!(amps.len() % block, 0);
    // flatten for bounds-check-free row access
    let m: Vec<Complex64> = matrix.iter().copied().collect();
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut base = 0;
    while base < amps.len() {
        for inner in 0..stride {
            let off = base + inner;
            for (a, t) in tmp.iter_mut().enumerate() {
                *t = amps[off + a * stride];
            }
            for a in 0..dim {
                let row = &m[a * dim..(a + 1) * dim];
                let mut acc = Complex64::new(0.0, 0.0);
                for (b, t) in tmp.iter().enumerate() {
                    acc += row[b] * t;
                }
                amps[off + a * stride] = acc;
            }
        }
        base += block;
    }
}

/// Apply a local operator to one qudit of a state, in place.
pub fn apply_local_inplace(state: &mut StateVector, qudit: usize, op: &LocalOperator) -> Result<()> {
    let reg = state.register();
    if qudit >= reg.num_qudits() {
        return Err(Error::RegisterMismatch(format!(
            "qudit {qudit} out of range for register of {} qudits",
            reg.num_qudits()
        )));
    }
    if op.dim() != reg.dim() {
        return Err(Error::OperatorDimension {
            op_dim: op.dim(),
            qudit_dim: reg.dim(),
        });
    }
    let stride = reg.dim().pow(qudit as u32);
    apply_local_raw(
        state.amplitudes_mut().as_slice_mut().expect("contiguous"),
        reg.dim(),
        stride,
        op.matrix(),
    );
    Ok(())
}

/// Copying variant of [`apply_local_inplace`].
pub fn apply_local(state: &StateVector, qudit: usize, op: &LocalOperator) -> Result<StateVector> {
    let mut out = state.clone();
    apply_local_inplace(&mut out, qudit, op)?;
    Ok(out)
}

/// Dense d^N x d^N embedding of a local operator on one qudit. Test oracle;
/// only sensible for small registers.
pub fn embed_local(
    register: crate::register::QuditRegister,
    qudit: usize,
    op: &LocalOperator,
) -> Array2<Complex64> {
    let size = register.size();
    let d = register.dim();
    let stride = d.pow(qudit as u32);
    let mut out = Array2::zeros((size, size));
    for col in 0..size {
        let digit = (col / stride) % d;
        let rest = col - digit * stride;
        for row_digit in 0..d {
            let row = rest + row_digit * stride;
            out[(row, col)] = op.matrix()[(row_digit, digit)];
        }
    }
    out
}

/// Dense matrix-vector application. Test oracle.
pub fn apply_dense(matrix: &Array2<Complex64>, state: &StateVector) -> Result<StateVector> {
    if matrix.ncols() != state.register().size() {
        return Err(Error::RegisterMismatch(
            "dense matrix does not match register size".into(),
        ));
    }
    let amps = matrix.dot(state.amplitudes());
    StateVector::from_amplitudes(state.register(), amps)
}
