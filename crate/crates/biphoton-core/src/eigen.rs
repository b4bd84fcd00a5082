//! Eigenvalues of dense real symmetric matrices.
//!
//! Classic two-stage scheme: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration, eigenvalues only. Ported by
//! hand so the core stays dependency-free; dimensions up to ~1500 (the
//! largest mode-basis truncation the library produces) run in well under a
//! second.

use crate::fm;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

/// Errors from the symmetric eigensolver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EigenError {
    /// The flattened matrix slice does not hold n×n entries.
    DimensionMismatch { expected: usize, got: usize },
    /// QL iteration failed to isolate an eigenvalue within the iteration cap.
    NoConvergence { index: usize },
}

impl fmt::Display for EigenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenError::DimensionMismatch { expected, got } => {
                write!(f, "matrix slice holds {got} entries, expected {expected}")
            }
            EigenError::NoConvergence { index } => {
                write!(f, "QL iteration did not converge at eigenvalue index {index}")
            }
        }
    }
}

impl core::error::Error for EigenError {}

/// Eigenvalues of the symmetric matrix stored row-major in `matrix`
/// (n×n, only symmetry is assumed — the strict upper triangle is read but
/// never trusted over the lower one). Returned in ascending order.
pub fn eigenvalues_symmetric(matrix: &[f64], n: usize) -> Result<Vec<f64>, EigenError> {
    if matrix.len() != n * n {
        return Err(EigenError::DimensionMismatch { expected: n * n, got: matrix.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![matrix[0]]);
    }
    let mut a = matrix.to_vec();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    householder_tridiagonal(&mut a, n, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, n)?;
    d.sort_unstable_by(|x, y| x.partial_cmp(y).expect("eigenvalues are never NaN"));
    Ok(d)
}

/// Householder reduction of a symmetric matrix (lower triangle of `a`) to
/// tridiagonal form: diagonal into `d`, subdiagonal into `e[1..]`.
fn householder_tridiagonal(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0f64;
        if l > 0 {
            let mut scale = 0.0f64;
            for k in 0..=l {
                scale += fm::abs(a[idx(i, k)]);
            }
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -fm::sqrt(h) } else { fm::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f_acc = 0.0f64;
                for j in 0..=l {
                    let mut g_acc = 0.0f64;
                    for k in 0..=j {
                        g_acc += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[idx(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let fj = a[idx(i, j)];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[idx(j, k)] -= fj * e[k] + gj * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[idx(i, i)];
    }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix
/// (diagonal `d`, subdiagonal `e[1..]`); eigenvalues land in `d`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize) -> Result<(), EigenError> {
    const MAX_SWEEPS: usize = 30;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = fm::abs(d[m]) + fm::abs(d[m + 1]);
                if fm::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_SWEEPS {
                return Err(EigenError::NoConvergence { index: l });
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + copysign_mag(r, g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflowed = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = fm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflowed && i > l {
                continue;
            }
            if !underflowed {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
    Ok(())
}

/// Magnitude of `mag` with the sign of `sign` (FORTRAN SIGN intrinsic).
fn copysign_mag(mag: f64, sign: f64) -> f64 {
    if sign >= 0.0 {
        fm::abs(mag)
    } else {
        -fm::abs(mag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            eigenvalues_symmetric(&[1.0, 2.0, 3.0], 2),
            Err(EigenError::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn trivial_sizes() {
        assert!(eigenvalues_symmetric(&[], 0).unwrap().is_empty());
        assert_eq!(eigenvalues_symmetric(&[4.5], 1).unwrap(), vec![4.5]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b, c]] has eigenvalues (a+c)/2 ± √(((a−c)/2)² + b²).
        let (a, b, c) = (1.3f64, -0.7f64, 2.1f64);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let ev = eigenvalues_symmetric(&[a, b, b, c], 2).unwrap();
        assert_abs_diff_eq!(ev[0], mid - rad, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], mid + rad, epsilon = 1e-14);
    }

    #[test]
    fn three_by_three_known_spectrum() {
        // Symmetric matrix with eigenvalues {1, 2, 4}: diag(1,2,4) conjugated
        // by a Householder reflection H = I − 2vvᵀ/|v|², v = (1,1,1).
        let lam = [1.0, 2.0, 4.0];
        let mut m = [0.0f64; 9];
        let h = |i: usize, j: usize| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - 2.0 / 3.0
        };
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += h(i, k) * lam[k] * h(k, j);
                }
                m[i * 3 + j] = acc;
            }
        }
        let ev = eigenvalues_symmetric(&m, 3).unwrap();
        for (got, want) in ev.iter().zip(lam.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn rank_one_matrix() {
        // vvᵀ has one eigenvalue |v|² and n−1 zeros.
        let v = [0.5, -1.5, 2.0, 0.25, -0.75];
        let n = v.len();
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = v[i] * v[j];
            }
        }
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let ev = eigenvalues_symmetric(&m, n).unwrap();
        for &e in &ev[..n - 1] {
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(ev[n - 1], norm2, epsilon = 1e-13);
    }

    #[test]
    fn tridiagonal_toeplitz_spectrum() {
        // Dense storage of tridiag(b, a, b): eigenvalues a + 2b·cos(kπ/(n+1)).
        let n = 40usize;
        let (a, b) = (2.0f64, -1.0f64);
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            m[i * n + i] = a;
            if i + 1 < n {
                m[i * n + i + 1] = b;
                m[(i + 1) * n + i] = b;
            }
        }
        let mut want: Vec<f64> = (1..=n)
            .map(|k| a + 2.0 * b * (core::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        let ev = eigenvalues_symmetric(&m, n).unwrap();
        for (got, want) in ev.iter().zip(want.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn invariants_on_a_dense_matrix() {
        // Deterministic pseudo-random symmetric matrix: check Σλ = tr(A) and
        // Σλ² = ‖A‖²_F, which the exact spectrum must satisfy.
        let n = 60usize;
        let mut m = vec![0.0f64; n * n];
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        let frob2: f64 = m.iter().map(|x| x * x).sum();
        let ev = eigenvalues_symmetric(&m, n).unwrap();
        let sum: f64 = ev.iter().sum();
        let sum2: f64 = ev.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(sum, trace, epsilon = 1e-10 * (1.0 + trace.abs()));
        assert_abs_diff_eq!(sum2, frob2, epsilon = 1e-10 * (1.0 + frob2));
    }
}
