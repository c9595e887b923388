//! Dense polynomials over the complex numbers, with evaluation on the
//! n-th roots of unity and interpolation through arbitrary nodes.
//!
//! Coefficients are stored lowest degree first. The zero polynomial is the
//! empty coefficient list.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping trailing exact zeros.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monic polynomial `prod (x - r)` over `roots`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(ONE);
        for &r in roots {
            // multiply in place by (x - r)
            coeffs.push(ZERO);
            for k in (0..coeffs.len()).rev() {
                let lower = if k > 0 { coeffs[k - 1] } else { ZERO };
                coeffs[k] = lower - r * coeffs[k];
            }
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// Values at `alpha_j = exp(2*pi*i*j/n)` for `j = 0..n`.
    pub fn eval_roots_of_unity(&self, n: usize) -> Vec<Complex64> {
        poly_eval_roots_of_unity(self, n)
    }
}

/// The n complex roots of unity of order n, `alpha_j = exp(2*pi*i*j/n)`.
#[derive(Clone, Debug)]
pub struct RootsOfUnity {
    values: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(n: usize) -> Self {
        Self {
            values: (0..n).map(|j| root_of_unity(n, j as i64)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, j: usize) -> Complex64 {
        self.values[j]
    }
}

/// `exp(2*pi*i*k/n)` with the exponent reduced mod n first, and the four
/// axis points returned exactly.
pub fn root_of_unity(n: usize, k: i64) -> Complex64 {
    let n_i = n as i64;
    let k = k.rem_euclid(n_i);
    if 4 * k == 0 {
        return ONE;
    }
    if 4 * k == n_i {
        return Complex64::new(0.0, 1.0);
    }
    if 2 * k == n_i {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == 3 * n_i {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// Evaluates `p` on all n-th roots of unity. Uses a radix-2 FFT when n is a
/// power of two and direct evaluation otherwise.
pub fn poly_eval_roots_of_unity(p: &Polynomial, n: usize) -> Vec<Complex64> {
    assert!(n >= 1, "n must be positive");
    // alpha^n = 1, so coefficients can be folded mod n
    let mut folded = vec![ZERO; n];
    for (k, &c) in p.coeffs().iter().enumerate() {
        folded[k % n] += c;
    }
    if n.is_power_of_two() {
        fft_positive(&mut folded);
        folded
    } else {
        let table: Vec<Complex64> = (0..n).map(|j| root_of_unity(n, j as i64)).collect();
        (0..n)
            .map(|j| {
                folded
                    .iter()
                    .enumerate()
                    .fold(ZERO, |acc, (k, &c)| acc + c * table[(j * k) % n])
            })
            .collect()
    }
}

/// In-place `X_j = sum_k a_k * exp(2*pi*i*j*k/n)` for power-of-two n.
fn fft_positive(a: &mut [Complex64]) {
    let n = a.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = root_of_unity(len, k as i64);
                let u = a[start + k];
                let v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Unique polynomial of degree < m through m points with distinct nodes,
/// via Newton divided differences.
pub fn poly_interpolate(points: &[(Complex64, Complex64)]) -> Result<Polynomial> {
    if points.is_empty() {
        return Err(Error::InvalidParams("interpolation needs at least one point".into()));
    }
    let scale = points.iter().fold(1.0f64, |acc, (x, _)| acc.max(x.norm()));
    let tol = 1e-12 * scale;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if (points[i].0 - points[j].0).norm() <= tol {
                return Err(Error::DuplicateNode { first: i, second: j });
            }
        }
    }

    let xs: Vec<Complex64> = points.iter().map(|p| p.0).collect();
    let mut dd: Vec<Complex64> = points.iter().map(|p| p.1).collect();
    let m = xs.len();
    for level in 1..m {
        for i in (level..m).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }

    // Horner on the Newton form: p = dd[m-1]; p = p*(x - x_i) + dd[i]
    let mut coeffs = vec![ZERO; m];
    coeffs[0] = dd[m - 1];
    let mut len = 1;
    for i in (0..m - 1).rev() {
        // multiply by (x - xs[i])
        for k in (0..=len).rev() {
            let lower = if k > 0 { coeffs[k - 1] } else { ZERO };
            let cur = if k < len { coeffs[k] } else { ZERO };
            coeffs[k] = lower - xs[i] * cur;
        }
        len += 1;
        coeffs[0] += dd[i];
    }
    Ok(Polynomial::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn constant_on_roots() {
        let p = Polynomial::constant(ONE);
        assert_eq!(p.eval_roots_of_unity(4), vec![ONE; 4]);
    }

    #[test]
    fn identity_on_roots() {
        let p = Polynomial::new(vec![ZERO, ONE]);
        let v = p.eval_roots_of_unity(4);
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in v.iter().zip(want.iter()) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn quadratic_on_fourth_roots() {
        // x^2 + (1+i)x + i, hand-substituted at 1, i, -1, -i
        let p = Polynomial::new(vec![c(0.0, 1.0), c(1.0, 1.0), ONE]);
        let v = p.eval_roots_of_unity(4);
        let want = [c(2.0, 2.0), c(-2.0, 2.0), ZERO, ZERO];
        for (a, b) in v.iter().zip(want.iter()) {
            assert!(close(*a, *b), "{a} vs {b}");
        }
    }

    #[test]
    fn fft_matches_direct_evaluation() {
        for n in [1usize, 2, 8, 16, 64] {
            let p = Polynomial::new((0..(n + 3)).map(|k| c(k as f64 * 0.3 - 1.0, 0.7 / (k as f64 + 1.0))).collect());
            let fast = p.eval_roots_of_unity(n);
            for (j, v) in fast.iter().enumerate() {
                let direct = p.eval(root_of_unity(n, j as i64));
                assert!((v - direct).norm() < 1e-9, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn non_power_of_two_uses_direct_path() {
        let p = Polynomial::from_roots(&[c(0.5, 0.5), c(-1.0, 0.0)]);
        for n in [3usize, 5, 6, 7, 10] {
            let v = p.eval_roots_of_unity(n);
            for (j, val) in v.iter().enumerate() {
                assert!((val - p.eval(root_of_unity(n, j as i64))).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn from_roots_expands() {
        // (x+1)(x+i) = x^2 + (1+i)x + i
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(p.coeffs(), &[c(0.0, 1.0), c(1.0, 1.0), ONE]);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn zero_polynomial_has_no_degree() {
        assert_eq!(Polynomial::new(vec![ZERO, ZERO]).degree(), None);
        assert!(Polynomial::zero().is_zero());
    }

    #[test]
    fn interpolate_single_point() {
        let p = poly_interpolate(&[(ONE, c(5.0, 0.0))]).unwrap();
        assert_eq!(p.coeffs(), &[c(5.0, 0.0)]);
    }

    #[test]
    fn interpolate_symmetric_values() {
        let p = poly_interpolate(&[(ONE, ONE), (c(-1.0, 0.0), ONE)]).unwrap();
        assert!(close(p.eval(c(3.0, 2.0)), ONE));
        assert!(p.coeffs().len() <= 2);
        assert!(p.coeffs().get(1).map_or(true, |c1| c1.norm() < 1e-15));
    }

    #[test]
    fn interpolate_line_through_two_points() {
        // solving a + b*1 = 2+2i, a + b*i = -2+2i by hand gives a = 0, b = 2+2i
        let p = poly_interpolate(&[(ONE, c(2.0, 2.0)), (c(0.0, 1.0), c(-2.0, 2.0))]).unwrap();
        assert!(close(p.coeffs()[0], ZERO));
        assert!(close(p.coeffs()[1], c(2.0, 2.0)));
    }

    #[test]
    fn interpolate_rejects_duplicates() {
        let err = poly_interpolate(&[(ONE, ONE), (c(0.0, 1.0), ONE), (ONE, c(2.0, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::DuplicateNode { first: 0, second: 2 }));
    }

    #[test]
    fn roots_of_unity_invariants() {
        let r = RootsOfUnity::new(12);
        for (j, a) in r.values().iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-15);
            assert!((a.powu(12) - ONE).norm() < 1e-12);
            for b in &r.values()[j + 1..] {
                assert!((a - b).norm() > 1e-3);
            }
        }
    }
}
