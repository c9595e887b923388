//! Small dense linear-algebra helpers shared by the decoders and checks.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Validates a 0-based index set against `n` and returns it sorted.
pub fn normalize_set(set: &[usize], n: usize) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    if let Some(&last) = sorted.last() {
        if last >= n {
            return Err(Error::IndexOutOfRange { index: last, n });
        }
    }
    Ok(sorted)
}

/// `[n] \ set` for a sorted set.
pub fn complement(sorted: &[usize], n: usize) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in sorted {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}

pub fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.clone().modulus()))
}

/// Singular values, descending.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `tol`.
pub fn numerical_rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > tol).count()
}

/// Minimum-norm least-squares combination of the rows of `b` indexed by
/// `rows` that best approximates the all-ones row vector. Returns the
/// coefficients (one per selected row) and the 2-norm residual.
pub fn best_row_combination(b: &DMatrix<f64>, rows: &[usize]) -> (DVector<f64>, f64) {
    let n = b.ncols();
    let sub_t = DMatrix::from_fn(n, rows.len(), |j, c| b[(rows[c], j)]);
    let ones = DVector::from_element(n, 1.0);
    let svd = sub_t.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = sigma_max * (n.max(rows.len()) as f64) * f64::EPSILON;
    let coeffs = svd
        .solve(&ones, eps)
        .expect("SVD computed with both factors");
    let residual = (&sub_t * &coeffs - &ones).norm();
    (coeffs, residual)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_rejects_bad_sets() {
        assert!(matches!(normalize_set(&[], 3), Err(Error::EmptySet)));
        assert!(matches!(normalize_set(&[1, 1], 3), Err(Error::DuplicateIndex(1))));
        assert!(matches!(normalize_set(&[0, 3], 3), Err(Error::IndexOutOfRange { index: 3, n: 3 })));
        assert_eq!(normalize_set(&[2, 0], 3).unwrap(), vec![0, 2]);
    }

    #[test]
    fn complement_of_set() {
        assert_eq!(complement(&[0, 2], 5), vec![1, 3, 4]);
    }

    #[test]
    fn identity_rows_give_sqrt_missing() {
        let b = DMatrix::<f64>::identity(5, 5);
        let (coeffs, res) = best_row_combination(&b, &[0, 2, 4]);
        assert!((res - 2f64.sqrt()).abs() < 1e-12);
        for c in coeffs.iter() {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_of_rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(numerical_rank(&m, 1e-9), 2);
        assert!((spectral_norm(&DMatrix::<f64>::identity(4, 4)) - 1.0).abs() < 1e-12);
    }
}
