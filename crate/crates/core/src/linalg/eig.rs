//! Hermitian eigensolver: Householder reduction to tridiagonal form followed
//! by implicit QL iterations with Wilkinson-style shifts.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{tol, ComplexMatrix, LinalgError, RealMatrix};

const MAX_QL_ITERATIONS_PER_VALUE: usize = 60;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: RealMatrix,
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if !m.is_hermitian(tol::EPS_HERM) {
        return Err(LinalgError::NonHermitianInput);
    }
    let (values, vectors) = decompose(m, true)?;
    Ok(HermitianEigen {
        eigenvalues: values,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    if !m.is_hermitian(tol::EPS_HERM) {
        return Err(LinalgError::NonHermitianInput);
    }
    Ok(decompose(m, false)?.0)
}

/// Real symmetric eigen-decomposition. The symmetry check is relative to the
/// largest entry since SDP iterates can be badly scaled.
pub fn symmetric_eig(m: &RealMatrix) -> Result<SymmetricEigen, LinalgError> {
    let c = to_complex_checked(m)?;
    let (values, vectors) = decompose(&c, true)?;
    let v = vectors.expect("vectors requested");
    Ok(SymmetricEigen {
        eigenvalues: values,
        eigenvectors: RealMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)].re),
    })
}

pub fn symmetric_eigenvalues(m: &RealMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(decompose(&to_complex_checked(m)?, false)?.0)
}

fn to_complex_checked(m: &RealMatrix) -> Result<ComplexMatrix, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if m.symmetry_error() > tol::EPS_HERM * m.max_abs().max(1.0) {
        return Err(LinalgError::NonHermitianInput);
    }
    Ok(ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        Complex64::new(0.5 * (m[(i, j)] + m[(j, i)]), 0.0)
    }))
}

fn decompose(
    m: &ComplexMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>), LinalgError> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| ComplexMatrix::zeros(0, 0))));
    }
    let (diag, sub, q) = tridiagonalize(m, want_vectors);

    // Rotate the complex subdiagonal onto the nonnegative reals.
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let c = sub[k];
        let r = c.norm();
        e[k] = r;
        phases[k + 1] = if r > 0.0 {
            phases[k] * (c / r)
        } else {
            phases[k]
        };
    }
    let mut d = diag;
    let mut z = want_vectors.then(|| RealMatrix::identity(n));
    tridiagonal_ql(&mut d, &mut e, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();

    let vectors = match (q, z) {
        (Some(q), Some(z)) => Some(ComplexMatrix::from_fn(n, n, |r, c| {
            let col = order[c];
            (0..n).map(|i| q[(r, i)] * phases[i] * z[(i, col)]).sum()
        })),
        _ => None,
    };
    Ok((values, vectors))
}

/// Reduces a Hermitian matrix to `Q T Q†` with `T` tridiagonal. Returns the
/// real diagonal, the complex subdiagonal (`T[k+1,k]`) and optionally `Q`.
fn tridiagonalize(
    m: &ComplexMatrix,
    want_q: bool,
) -> (Vec<f64>, Vec<Complex64>, Option<ComplexMatrix>) {
    let n = m.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = m.clone();
    let mut q = want_q.then(|| ComplexMatrix::identity(n));
    let mut w = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail: f64 = ((lo + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = a[(lo, k)];
        let xnorm = libm::sqrt(alpha.norm_sqr() + tail);
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // u = x + phase·|x|·e₁, w = u/|u|, reflector P = I − 2 w w†.
        w[lo] = alpha + phase * xnorm;
        for i in (lo + 1)..n {
            w[i] = a[(i, k)];
        }
        let unorm = libm::sqrt((lo..n).map(|i| w[i].norm_sqr()).sum::<f64>());
        for wi in &mut w[lo..n] {
            *wi /= unorm;
        }

        let beta = -phase * xnorm;
        a[(lo, k)] = beta;
        a[(k, lo)] = beta.conj();
        for i in (lo + 1)..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        // B ← P B P = B − 2(w q† + q w†) with q = Bw − (w†Bw) w.
        for i in lo..n {
            p[i] = (lo..n).map(|j| a[(i, j)] * w[j]).sum();
        }
        let kappa: f64 = (lo..n).map(|i| (w[i].conj() * p[i]).re).sum();
        for i in lo..n {
            p[i] -= w[i] * kappa;
        }
        for i in lo..n {
            for j in lo..n {
                a[(i, j)] -= (w[i] * p[j].conj() + p[i] * w[j].conj()) * 2.0;
            }
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let s: Complex64 = (lo..n).map(|j| q[(r, j)] * w[j]).sum();
                for j in lo..n {
                    q[(r, j)] -= s * w[j].conj() * 2.0;
                }
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let sub = (0..n.saturating_sub(1)).map(|k| a[(k + 1, k)]).collect();
    (diag, sub, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and is overwritten with the (unsorted)
/// eigenvalues. `e[k]` couples rows `k` and `k+1`; `e[n-1]` is ignored and
/// the slice is clobbered. When `z` is given the rotations are accumulated
/// into its columns.
pub fn tridiagonal_ql(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut RealMatrix>,
) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS_PER_VALUE {
                    return Err(LinalgError::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let h = z[(k, i + 1)];
                            z[(k, i + 1)] = s * z[(k, i)] + c * h;
                            z[(k, i)] = c * z[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
