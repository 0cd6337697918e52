//! Dense Hermitian eigensolver (cyclic Jacobi) for the small matrices this
//! crate works with: d x d local operators and the CMA-ES covariance.
//!
//! Self-contained on purpose; no LAPACK binding for matrices this size.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix: `a = v * diag(w) * v^dag`,
/// eigenvalues ascending. Fails if the off-diagonal mass does not converge.
pub(crate) fn eigh(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh requires a square matrix");

    let mut m = a.clone();
    let mut v = Array2::<Complex64>::eye(n);

    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let tol = 1e-15 * scale;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off <= tol * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    if off_diagonal_norm(&m) > 1e-12 * scale * n as f64 {
        return Err(Error::EigensolverFailure {
            residual: off_diagonal_norm(&m),
            tol: 1e-12,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigs[i].total_cmp(&eigs[j]));

    let w: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let mut vecs = Array2::<Complex64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vecs[(row, col)] = v[(row, src)];
        }
    }
    Ok((w, vecs))
}

/// Real symmetric eigendecomposition, via the complex solver.
pub(crate) fn eigh_real(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let ac = a.mapv(|x| Complex64::new(x, 0.0));
    let (w, v) = eigh(&ac)?;
    Ok((w, v.mapv(|z| z.re)))
}

fn off_diagonal_norm(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing m[(p, q)]. The unitary is a phase on column q
/// composed with a real Givens rotation; v accumulates the product.
fn rotate(m: &mut Array2<Complex64>, v: &mut Array2<Complex64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let alpha = m[(p, p)].re;
    let beta = m[(q, q)].re;

    let tau = (beta - alpha) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J[p][p] = c, J[p][q] = s, J[q][p] = -s e^{-i phi}, J[q][q] = c e^{-i phi}
    let e = phase.conj();
    let n = m.nrows();

    // m <- m * J (columns p, q)
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * (e * s);
        m[(k, q)] = mkp * s + mkq * (e * c);
    }
    // m <- J^dag * m (rows p, q)
    let ec = phase; // e^{+i phi}
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * (ec * s);
        m[(q, k)] = mpk * s + mqk * (ec * c);
    }
    // pin the rotated entries that are exactly zero/real by construction
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    // v <- v * J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * (e * s);
        v[(k, q)] = vkp * s + vkq * (e * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn reconstruct(w: &[f64], v: &Array2<Complex64>) -> Array2<Complex64> {
        let n = w.len();
        let mut out = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += v[(i, k)] * w[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn pauli_x_spectrum() {
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let (w, v) = eigh(&a).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14);
        assert!((w[1] - 1.0).abs() < 1e-14);
        let rec = reconstruct(&w, &v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[(i, j)] - a[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn pauli_y_complex_entries() {
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]
        ];
        let (w, v) = eigh(&a).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14);
        assert!((w[1] - 1.0).abs() < 1e-14);
        let rec = reconstruct(&w, &v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[(i, j)] - a[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn random_hermitian_reconstruction() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 6, 12, 27] {
            let mut a = Array2::<Complex64>::zeros((n, n));
            for i in 0..n {
                for j in i..n {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if i == j {
                        a[(i, j)] = Complex64::new(z.re, 0.0);
                    } else {
                        a[(i, j)] = z;
                        a[(j, i)] = z.conj();
                    }
                }
            }
            let (w, v) = eigh(&a).unwrap();
            let rec = reconstruct(&w, &v);
            let mut max = 0.0_f64;
            for i in 0..n {
                for j in 0..n {
                    max = max.max((rec[(i, j)] - a[(i, j)]).norm());
                }
            }
            assert!(max < 1e-12, "reconstruction residual {max} at n={n}");
            // unitarity of the eigenvector matrix
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += v[(k, i)].conj() * v[(k, j)];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((acc - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn real_symmetric_wrapper() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (w, _) = eigh_real(&a).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-13);
        assert!((w[1] - 3.0).abs() < 1e-13);
    }
}
