//! Packing pairs of real gradient columns into one complex column, so a
//! complex scheme sends `ceil(p/2)` complex numbers instead of `p`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Columns `N1 + i N2, N3 + i N4, ...`; with odd p the last column is `Np`.
pub fn pack_complex(n: &DMatrix<f64>) -> DMatrix<Complex64> {
    let p = n.ncols();
    DMatrix::from_fn(n.nrows(), p.div_ceil(2), |i, c| {
        let re = n[(i, 2 * c)];
        let im = if 2 * c + 1 < p { n[(i, 2 * c + 1)] } else { 0.0 };
        Complex64::new(re, im)
    })
}

/// Packs a single real vector the same way.
pub fn pack_vector(v: &DVector<f64>) -> DVector<Complex64> {
    let p = v.len();
    DVector::from_fn(p.div_ceil(2), |c, _| {
        let im = if 2 * c + 1 < p { v[2 * c + 1] } else { 0.0 };
        Complex64::new(v[2 * c], im)
    })
}

/// `e(v) = (Re v1, Im v1, Re v2, Im v2, ...)` truncated to `p` entries.
pub fn unpack(v: &DVector<Complex64>, p: usize) -> DVector<f64> {
    assert!(p.div_ceil(2) == v.len(), "packed length {} does not match p = {p}", v.len());
    DVector::from_fn(p, |j, _| if j % 2 == 0 { v[j / 2].re } else { v[j / 2].im })
}

/// Row-wise inverse of [`pack_complex`].
pub fn unpack_matrix(m: &DMatrix<Complex64>, p: usize) -> DMatrix<f64> {
    assert!(p.div_ceil(2) == m.ncols(), "packed width {} does not match p = {p}", m.ncols());
    DMatrix::from_fn(m.nrows(), p, |i, j| {
        let z = m[(i, j / 2)];
        if j % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}
