//! Exact gradient codes built from cyclic MDS codes.
//!
//! Both constructions produce a circulant encoding matrix `B` whose first
//! column `c1` is a minimum-weight codeword supported on its first `s + 1`
//! coordinates. Column `j` of `B` is `c1` cyclically shifted down by `j`.
//!
//! * Complex: `c1` holds the evaluations of `m(x) = prod_{j>s} (x - alpha_j)`
//!   on the n-th roots of unity (a cyclic Reed-Solomon codeword).
//! * Real: `c1` holds the coefficients of the generator polynomial of a real
//!   BCH code whose roots are `s` consecutive, conjugation-closed powers of
//!   `omega = exp(2*pi*i/n)`. Requires `n` and `s` of different parity.
//!
//! Decoding returns `A(K)` with support inside `K` and `A(K) B = 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement, max_abs, normalize_set};
use crate::poly::{poly_interpolate, root_of_unity, Polynomial, RootsOfUnity};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for residual checks of the EC identity.
pub const EC_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Complex,
    Real,
}

#[derive(Clone, Debug)]
pub struct ExactScheme {
    n: usize,
    s: usize,
    field: Field,
    b: DMatrix<Complex64>,
    c1: Vec<Complex64>,
    x_prime: Vec<Complex64>,
    /// Complex: all n evaluation points. Real: the s code roots.
    roots: Vec<Complex64>,
    /// Exponents `e` with root = omega^e (real case only).
    root_exponents: Vec<usize>,
    /// Column multipliers of the dual GRS code (complex case only).
    dual_multipliers: Option<Vec<Complex64>>,
}

fn check_params(n: usize, s: usize) -> Result<()> {
    if s == 0 || s >= n {
        return Err(Error::InvalidParams(format!("need 1 <= s < n, got n={n}, s={s}")));
    }
    Ok(())
}

fn construction_tol(b: &DMatrix<Complex64>) -> f64 {
    1e-9 * (1.0 + max_abs(b))
}

/// Circulant matrix whose column j is `c1` shifted down by j.
pub fn circulant(c1: &[Complex64]) -> DMatrix<Complex64> {
    let n = c1.len();
    DMatrix::from_fn(n, n, |i, j| c1[(i + n - j) % n])
}

/// Solves `x'' B' = 1` on the upper-left (n-s)x(n-s) lower-triangular block
/// of `b` by back-substitution and pads with s zeros.
pub fn precompute_x_prime(b: &DMatrix<Complex64>, s: usize) -> Result<Vec<Complex64>> {
    let n = b.nrows();
    if s >= n || b.ncols() != n {
        return Err(Error::InvalidParams(format!("need a square matrix with s < n (n={n}, s={s})")));
    }
    let k = n - s;
    let pivot_tol = 1e-12 * (1.0 + max_abs(b));
    let mut x = vec![ZERO; n];
    // column j of B' only involves rows i >= j, at most s+1 of them
    for j in (0..k).rev() {
        let pivot = b[(j, j)];
        if pivot.norm() <= pivot_tol {
            return Err(Error::SingularTriangular { index: j });
        }
        let upper = (j + s + 1).min(k);
        let acc = ((j + 1)..upper).fold(ZERO, |acc, i| acc + x[i] * b[(i, j)]);
        x[j] = (ONE - acc) / pivot;
    }
    let residual = ones_residual_inf(&DVector::from_vec(x.clone()), b);
    if residual > construction_tol(b) {
        return Err(Error::ConstructionCheck(format!("x'B deviates from 1 by {residual:e}")));
    }
    Ok(x)
}

/// `max_j |(a B)_j - 1|`.
pub fn ones_residual_inf(a: &DVector<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let prod = a.transpose() * b;
    prod.iter().fold(0.0, |acc, v| acc.max((v - ONE).norm()))
}

/// Builds the complex cyclic-MDS scheme for any `1 <= s < n`.
pub fn build_complex_scheme(n: usize, s: usize) -> Result<ExactScheme> {
    check_params(n, s)?;
    let alphas = RootsOfUnity::new(n);
    let m = Polynomial::from_roots(&alphas.values()[s + 1..]);
    let mut c1 = m.eval_roots_of_unity(n);
    for v in c1.iter_mut().skip(s + 1) {
        *v = ZERO;
    }
    let multipliers: Vec<Complex64> = alphas.values().iter().map(|a| a / n as f64).collect();
    ExactScheme::assemble(n, s, Field::Complex, c1, alphas.values().to_vec(), Vec::new(), Some(multipliers))
}

/// Exponents of the BCH code roots: s consecutive powers of omega centred
/// on n/2, closed under conjugation.
pub fn bch_root_exponents(n: usize, s: usize) -> Result<Vec<usize>> {
    check_params(n, s)?;
    if n % 2 == s % 2 {
        return Err(Error::ParityMismatch { n, s });
    }
    let start = if n % 2 == 0 {
        n / 2 - s / 2
    } else {
        n / 2 - s / 2 + 1
    };
    Ok((start..start + s).collect())
}

/// Builds the real BCH scheme; needs `n` and `s` of different parity.
pub fn build_real_bch_scheme(n: usize, s: usize) -> Result<ExactScheme> {
    let exponents = bch_root_exponents(n, s)?;
    let roots: Vec<Complex64> = exponents.iter().map(|&e| root_of_unity(n, e as i64)).collect();
    let generator = Polynomial::from_roots(&roots);
    let coeffs = generator.coeffs();
    let tol = 1e-9 * (1.0 + coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm())));
    let mut c1 = vec![ZERO; n];
    for (k, c) in coeffs.iter().enumerate() {
        if c.im.abs() > tol {
            return Err(Error::ConstructionCheck(format!(
                "generator coefficient {k} has imaginary part {:e}",
                c.im
            )));
        }
        c1[k] = Complex64::new(c.re, 0.0);
    }
    ExactScheme::assemble(n, s, Field::Real, c1, roots, exponents, None)
}

impl ExactScheme {
    fn assemble(
        n: usize,
        s: usize,
        field: Field,
        c1: Vec<Complex64>,
        roots: Vec<Complex64>,
        root_exponents: Vec<usize>,
        dual_multipliers: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        let b = circulant(&c1);
        let x_prime = precompute_x_prime(&b, s)?;
        let scheme = Self {
            n,
            s,
            field,
            b,
            c1,
            x_prime,
            roots,
            root_exponents,
            dual_multipliers,
        };
        scheme.verify_dual()?;
        Ok(scheme)
    }

    /// Rebuilds a scheme from its stored generating data, re-running every
    /// construction check. The stored `x_prime` must satisfy `x' B = 1`.
    pub fn from_parts(
        n: usize,
        s: usize,
        field: Field,
        c1: Vec<Complex64>,
        x_prime: Vec<Complex64>,
        roots: Vec<Complex64>,
    ) -> Result<Self> {
        check_params(n, s)?;
        if c1.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c1.len() });
        }
        if x_prime.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x_prime.len() });
        }
        let (root_exponents, dual_multipliers) = match field {
            Field::Complex => {
                if roots.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: roots.len() });
                }
                (Vec::new(), Some(roots.iter().map(|a| a / n as f64).collect()))
            }
            Field::Real => {
                if roots.len() != s {
                    return Err(Error::DimensionMismatch { expected: s, got: roots.len() });
                }
                let exps = roots
                    .iter()
                    .map(|r| {
                        let turns = r.arg() / (2.0 * std::f64::consts::PI) * n as f64;
                        let e = (turns.round() as i64).rem_euclid(n as i64) as usize;
                        if (root_of_unity(n, e as i64) - r).norm() > 1e-9 {
                            Err(Error::Format(format!("{r} is not an n-th root of unity")))
                        } else {
                            Ok(e)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (exps, None)
            }
        };
        let b = circulant(&c1);
        let residual = ones_residual_inf(&DVector::from_vec(x_prime.clone()), &b);
        if residual > construction_tol(&b) {
            return Err(Error::ConstructionCheck(format!("stored x' gives residual {residual:e}")));
        }
        if x_prime[n - s..].iter().any(|v| *v != ZERO) {
            return Err(Error::ConstructionCheck("x' must vanish on its last s entries".into()));
        }
        let scheme = Self {
            n,
            s,
            field,
            b,
            c1,
            x_prime,
            roots,
            root_exponents,
            dual_multipliers,
        };
        scheme.verify_dual()?;
        Ok(scheme)
    }

    /// Every row of the dual generator annihilates every column of B.
    fn verify_dual(&self) -> Result<()> {
        let dual = self.dual_generator();
        let prod = &dual * &self.b;
        let worst = max_abs(&prod);
        let tol = construction_tol(&self.b);
        if worst > tol {
            return Err(Error::ConstructionCheck(format!(
                "dual code does not annihilate B (max entry {worst:e} > {tol:e})"
            )));
        }
        Ok(())
    }

    /// s x n generator of the dual code: `V D` in the complex case (V the
    /// Vandermonde on all roots of unity), and the Vandermonde on the code
    /// roots in the real case.
    pub fn dual_generator(&self) -> DMatrix<Complex64> {
        let (n, s) = (self.n, self.s);
        match self.field {
            Field::Complex => {
                let ell = self.dual_multipliers.as_ref().expect("complex scheme has multipliers");
                DMatrix::from_fn(s, n, |k, j| root_of_unity(n, (j * k) as i64) * ell[j])
            }
            Field::Real => DMatrix::from_fn(s, n, |i, j| self.root_power(i, j)),
        }
    }

    fn root_power(&self, root: usize, power: usize) -> Complex64 {
        root_of_unity(self.n, ((self.root_exponents[root] * power) % self.n) as i64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn b(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn c1(&self) -> &[Complex64] {
        &self.c1
    }

    pub fn x_prime(&self) -> &[Complex64] {
        &self.x_prime
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn dual_multipliers(&self) -> Option<&[Complex64]> {
        self.dual_multipliers.as_deref()
    }

    /// Real part of B; meaningful for real schemes.
    pub fn b_real(&self) -> DMatrix<f64> {
        self.b.map(|v| v.re)
    }

    /// Nonzero count of every row of B.
    pub fn row_supports(&self) -> Vec<usize> {
        row_supports(&self.b)
    }

    pub fn is_circulant(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| self.b[(i, j)] == self.b[((i + 1) % n, (j + 1) % n)]))
    }

    /// Decoding vector for a set of exactly `n - s` non-stragglers.
    pub fn decode(&self, k: &[usize]) -> Result<DVector<Complex64>> {
        match self.field {
            Field::Complex => decode_complex(self, k),
            Field::Real => decode_real(self, k),
        }
    }

    fn prepare_set(&self, k: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let expected = self.n - self.s;
        if k.len() != expected {
            return Err(Error::WrongSetSize { expected, got: k.len() });
        }
        let k = normalize_set(k, self.n)?;
        let kc = complement(&k, self.n);
        Ok((k, kc))
    }

    /// Drops all but the first `k` columns of B (data split into k parts).
    pub fn restrict_to_k_partitions(&self, k: usize) -> Result<RestrictedScheme<'_>> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidParams(format!("need 1 <= k <= n, got k={k}, n={}", self.n)));
        }
        Ok(RestrictedScheme {
            scheme: self,
            b_hat: self.b.columns(0, k).into_owned(),
        })
    }
}

pub fn row_supports(b: &DMatrix<Complex64>) -> Vec<usize> {
    (0..b.nrows())
        .map(|i| b.row(i).iter().filter(|v| **v != ZERO).count())
        .collect()
}

/// Decoder for the complex scheme: interpolate `f` of degree < s through the
/// straggler positions, evaluate it on all roots of unity, and scale by the
/// dual column multipliers.
pub fn decode_complex(scheme: &ExactScheme, k: &[usize]) -> Result<DVector<Complex64>> {
    let ell = match (&scheme.field, &scheme.dual_multipliers) {
        (Field::Complex, Some(ell)) => ell,
        _ => return Err(Error::InvalidParams("decode_complex needs a complex scheme".into())),
    };
    let (k, kc) = scheme.prepare_set(k)?;
    let points: Vec<(Complex64, Complex64)> = kc
        .iter()
        .map(|&j| (scheme.roots[j], -scheme.x_prime[j] / ell[j]))
        .collect();
    let f = poly_interpolate(&points)?;
    let evals = f.eval_roots_of_unity(scheme.n);
    let mut a = DVector::from_element(scheme.n, ZERO);
    for &j in &k {
        a[j] = evals[j] * ell[j] + scheme.x_prime[j];
    }
    Ok(a)
}

/// Decoder for the real BCH scheme: solve the s x s generalized Vandermonde
/// system on the straggler columns and add the resulting dual codeword to x'.
pub fn decode_real(scheme: &ExactScheme, k: &[usize]) -> Result<DVector<Complex64>> {
    if scheme.field != Field::Real {
        return Err(Error::InvalidParams("decode_real needs a real scheme".into()));
    }
    let (k, kc) = scheme.prepare_set(k)?;
    let s = scheme.s;
    // row c: sum_i f_i r_i^{kc[c]} = -x'_{kc[c]}
    let system = DMatrix::from_fn(s, s, |c, i| scheme.root_power(i, kc[c]));
    let rhs = DVector::from_iterator(s, kc.iter().map(|&j| -scheme.x_prime[j]));
    let f = system.clone().lu().solve(&rhs).ok_or(Error::SingularVandermonde)?;
    let solve_err = (&system * &f - &rhs).camax();
    if !solve_err.is_finite() || solve_err > 1e-9 * (1.0 + rhs.camax()) {
        return Err(Error::SingularVandermonde);
    }

    let mut a = DVector::from_element(scheme.n, ZERO);
    let mut worst_imag = 0.0f64;
    let mut scale = 1.0f64;
    for &j in &k {
        let y = (0..s).fold(ZERO, |acc, i| acc + f[i] * scheme.root_power(i, j));
        let v = y + scheme.x_prime[j];
        worst_imag = worst_imag.max(v.im.abs());
        scale = scale.max(v.re.abs());
        a[j] = Complex64::new(v.re, 0.0);
    }
    if worst_imag > 1e-9 * scale {
        return Err(Error::ConstructionCheck(format!(
            "real decoder produced imaginary residue {worst_imag:e}"
        )));
    }
    Ok(a)
}

/// A scheme whose data is split into k <= n parts: B with its last n-k
/// columns removed. Decoders are those of the full scheme.
#[derive(Clone, Debug)]
pub struct RestrictedScheme<'a> {
    scheme: &'a ExactScheme,
    b_hat: DMatrix<Complex64>,
}

impl RestrictedScheme<'_> {
    pub fn b_hat(&self) -> &DMatrix<Complex64> {
        &self.b_hat
    }

    pub fn k(&self) -> usize {
        self.b_hat.ncols()
    }

    pub fn decode(&self, k: &[usize]) -> Result<DVector<Complex64>> {
        self.scheme.decode(k)
    }

    pub fn row_supports(&self) -> Vec<usize> {
        row_supports(&self.b_hat)
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn random_subset(n: usize, size: usize, seed: u64) -> Vec<usize> {
        // small LCG keeps the proptest strategy simple and reproducible
        let mut idx: Vec<usize> = (0..n).collect();
        let mut state = seed | 1;
        for i in 0..size {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = i + (state >> 33) as usize % (n - i);
            idx.swap(i, j);
        }
        idx.truncate(size);
        idx
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn complex_decoder_satisfies_ec(n in 2usize..17, s_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let s = 1 + ((n - 2) as f64 * s_frac) as usize;
            let sch = build_complex_scheme(n, s).unwrap();
            let k = random_subset(n, n - s, seed);
            let a = sch.decode(&k).unwrap();
            prop_assert!(ones_residual_inf(&a, sch.b()) <= EC_TOLERANCE);
            let kc = complement(&normalize_set(&k, n).unwrap(), n);
            prop_assert!(kc.iter().all(|&j| a[j] == ZERO));
        }

        #[test]
        fn real_decoder_satisfies_ec(n in 2usize..17, s_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let mut s = 1 + ((n - 2) as f64 * s_frac) as usize;
            if n % 2 == s % 2 {
                s = if s + 1 < n { s + 1 } else { s - 1 };
            }
            prop_assume!(s >= 1 && s < n);
            let sch = build_real_bch_scheme(n, s).unwrap();
            let k = random_subset(n, n - s, seed);
            let a = sch.decode(&k).unwrap();
            prop_assert!(ones_residual_inf(&a, sch.b()) <= EC_TOLERANCE);
            prop_assert!(a.iter().all(|v| v.im == 0.0));
        }
    }
}
