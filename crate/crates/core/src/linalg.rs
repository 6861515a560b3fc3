//! Dense symmetric factorization used by the exact Gaussian sampler.

use nalgebra::{DMatrix, SymmetricEigen};

/// In-place lower Cholesky factor of a row-major `n x n` symmetric matrix.
///
/// On success the lower triangle holds `L` and the strict upper triangle is zeroed.
/// On failure returns the pivot index and the non-positive Schur complement value.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<(), (usize, f64)> {
    assert_eq!(a.len(), n * n);
    for j in 0..n {
        let (head, tail) = a.split_at_mut((j + 1) * n);
        let row_j = &mut head[j * n..];
        let pivot = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err((j, pivot));
        }
        let diag = pivot.sqrt();
        row_j[j] = diag;
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
        let row_j = &head[j * n..j * n + j];
        let update = |row_i: &mut [f64]| {
            row_i[j] = (row_i[j] - dot(&row_i[..j], row_j)) / diag;
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if n - j > 64 {
                tail.par_chunks_mut(n).for_each(update);
                continue;
            }
        }
        tail.chunks_mut(n).for_each(update);
    }
    Ok(())
}

/// `L z` for a row-major lower-triangular `L`.
pub(crate) fn lower_mul(l: &[f64], n: usize, z: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| dot(&l[i * n..i * n + i + 1], &z[..=i]))
        .collect()
}

pub(crate) fn min_eigenvalue(a: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, a);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reconstructs_matrix() {
        let a = vec![4.0, 2.0, 0.4, 2.0, 2.0, 0.5, 0.4, 0.5, 3.0];
        let mut l = a.clone();
        cholesky_in_place(&mut l, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert_eq!(l[1], 0.0);
        assert_eq!(lower_mul(&l, 3, &[1.0, 0.0, 0.0]), vec![2.0, 1.0, 0.2]);
    }

    #[test]
    fn indefinite_reports_pivot() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        let (j, p) = cholesky_in_place(&mut a, 2).unwrap_err();
        assert_eq!(j, 1);
        assert!((p + 3.0).abs() < 1e-12);
        assert!((min_eigenvalue(&[1.0, 2.0, 2.0, 1.0], 2) + 1.0).abs() < 1e-12);
    }
}
