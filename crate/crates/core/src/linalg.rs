//! Thin dense linear-algebra layer over faer.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub(crate) struct SymEigen {
    pub values: Vec<f64>,
    vectors: Mat<f64>,
}

impl SymEigen {
    /// Eigenvector `idx` (in ascending eigenvalue order) with the sign fixed
    /// so that its largest-magnitude entry is positive.
    pub fn vector(&self, idx: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.vectors.nrows()).map(|r| self.vectors[(r, idx)]).collect();
        fix_sign(&mut v);
        v
    }
}

/// Decomposes the `n x n` symmetric matrix stored row-major in `data`.
pub(crate) fn sym_eigen(n: usize, data: &[f64]) -> Result<SymEigen> {
    debug_assert_eq!(data.len(), n * n);
    let a = Mat::<f64>::from_fn(n, n, |i, j| data[i * n + j]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    Ok(SymEigen { values, vectors: evd.U().to_owned() })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Inverse of a general `n x n` matrix via partial-pivot LU.
pub(crate) fn inverse(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    let a = Mat::<f64>::from_fn(n, n, |i, j| data[i * n + j]);
    let inv = a.partial_piv_lu().inverse();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(inv[(i, j)]);
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("singular matrix in inverse".into()));
    }
    Ok(out)
}

/// Solves the `k x k` system `a x = b` in place by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `rel_tol` times
/// the largest diagonal magnitude.
pub(crate) fn solve_small(k: usize, a: &mut [f64], b: &mut [f64], rel_tol: f64) -> Option<()> {
    let scale = (0..k).map(|i| a[i * k + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))?;
        if a[piv * k + col].abs() <= rel_tol * scale {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * k + col];
        for r in (col + 1)..k {
            let f = a[r * k + col] / d;
            if f != 0.0 {
                for c in col..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in (col + 1)..k {
            acc -= a[col * k + c] * b[c];
        }
        b[col] = acc / a[col * k + col];
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let e = sym_eigen(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
        let v = e.vector(2);
        assert!((v[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }

    #[test]
    fn small_solve() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        solve_small(2, &mut a, &mut b, 1e-12).unwrap();
        assert!((b[0] - 0.8).abs() < 1e-14 && (b[1] - 1.4).abs() < 1e-14);
        let mut s = vec![1.0, 2.0, 2.0, 4.0];
        assert!(solve_small(2, &mut s, &mut [1.0, 1.0], 1e-12).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let inv = inverse(2, &[4.0, 7.0, 2.0, 6.0]).unwrap();
        let expect = [0.6, -0.7, -0.2, 0.4];
        for (x, y) in inv.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
