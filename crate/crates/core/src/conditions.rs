//! Checks of the exact-computation (EC) and approximate-computation (ε-AC)
//! conditions, the error bounds of the graph schemes, and the adversarial
//! straggler sets behind the matching lower bound.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{ones_residual_inf, ExactScheme, EC_TOLERANCE};
use crate::error::{Error, Result};
use crate::expander::{residual_l2, ApproxDecoder, ApproxScheme};
use crate::linalg::{best_row_combination, normalize_set};

/// Default cap on the number of sets visited in exhaustive mode.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 1_000_000;

/// Slack added to ε(s) when checking the ε-AC inequality.
pub const EPS_AC_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationMode {
    /// Every subset of size n - s, refused above `cap` subsets.
    Exhaustive { cap: u128 },
    /// Uniform random subsets of size n - s.
    Sampled { samples: usize, seed: u64 },
}

impl VerificationMode {
    pub fn exhaustive() -> Self {
        Self::Exhaustive {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Ec,
    EpsAc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exhaustive,
    Sampled,
}

/// Outcome of an EC or ε-AC check. Residuals are ∞-norms for EC and
/// 2-norms for ε-AC. `worst_set` is 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scheme: String,
    pub condition: Condition,
    pub mode: ModeName,
    pub n: usize,
    pub s: usize,
    pub sets_tested: u64,
    pub max_residual: f64,
    /// EC tolerance, or ε(s) for ε-AC.
    pub bound: f64,
    pub violations: u64,
    /// Largest `residual - bound` seen.
    pub worst_margin: f64,
    pub worst_set: Vec<usize>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic k-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let k = cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - k + i {
                cur[i] += 1;
                for j in (i + 1)..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Calls `visit` on every tested survivor set of size `n - s`.
fn for_each_set<F>(n: usize, s: usize, mode: VerificationMode, mut visit: F) -> Result<(ModeName, u64)>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if s >= n {
        return Err(Error::InvalidParams(format!("need s < n, got n={n}, s={s}")));
    }
    let size = n - s;
    match mode {
        VerificationMode::Exhaustive { cap } => {
            let count = binomial(n, size);
            if count > cap {
                return Err(Error::CapExceeded { count, cap });
            }
            for k in Combinations::new(n, size) {
                visit(&k)?;
            }
            Ok((ModeName::Exhaustive, count as u64))
        }
        VerificationMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..n).collect();
            for _ in 0..samples {
                let (chosen, _) = idx.partial_shuffle(&mut rng, size);
                let mut k = chosen.to_vec();
                k.sort_unstable();
                visit(&k)?;
            }
            Ok((ModeName::Sampled, samples as u64))
        }
    }
}

struct Tally {
    max_residual: f64,
    worst_margin: f64,
    worst_set: Vec<usize>,
    violations: u64,
}

impl Tally {
    fn new() -> Self {
        Self {
            max_residual: 0.0,
            worst_margin: f64::NEG_INFINITY,
            worst_set: Vec::new(),
            violations: 0,
        }
    }

    fn record(&mut self, k: &[usize], residual: f64, bound: f64, allowed: f64) {
        self.max_residual = self.max_residual.max(residual);
        let margin = residual - bound;
        if margin > self.worst_margin || self.worst_set.is_empty() {
            self.worst_margin = margin;
            self.worst_set = k.iter().map(|i| i + 1).collect();
        }
        // NaN residuals count as violations
        if !(residual <= allowed) {
            self.violations += 1;
        }
    }
}

/// EC check for an arbitrary matrix and decoder: `||A(K) B - 1||_inf <= 1e-8`
/// for every tested K of size `n - s`.
pub fn check_ec<F>(name: &str, b: &DMatrix<Complex64>, s: usize, mut decoder: F, mode: VerificationMode) -> Result<VerificationReport>
where
    F: FnMut(&[usize]) -> Result<DVector<Complex64>>,
{
    let n = b.nrows();
    let mut tally = Tally::new();
    let (mode_name, sets_tested) = for_each_set(n, s, mode, |k| {
        let a = decoder(k)?;
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.len() });
        }
        tally.record(k, ones_residual_inf(&a, b), EC_TOLERANCE, EC_TOLERANCE);
        Ok(())
    })?;
    Ok(VerificationReport {
        scheme: name.to_string(),
        condition: Condition::Ec,
        mode: mode_name,
        n,
        s,
        sets_tested,
        max_residual: tally.max_residual,
        bound: EC_TOLERANCE,
        violations: tally.violations,
        worst_margin: tally.worst_margin,
        worst_set: tally.worst_set,
        passed: tally.violations == 0,
    })
}

pub fn check_ec_scheme(scheme: &ExactScheme, mode: VerificationMode) -> Result<VerificationReport> {
    let name = format!("{:?}-n{}-s{}", scheme.field(), scheme.n(), scheme.s()).to_lowercase();
    check_ec(&name, scheme.b(), scheme.s(), |k| scheme.decode(k), mode)
}

/// ε-AC check: `||A(K) B - 1||_2 <= epsilon(s) + 1e-9` for every tested K of
/// size `n - s`.
pub fn check_eps_ac<F, E>(
    name: &str,
    b: &DMatrix<f64>,
    s: usize,
    mut decoder: F,
    epsilon: E,
    mode: VerificationMode,
) -> Result<VerificationReport>
where
    F: FnMut(&[usize]) -> Result<DVector<f64>>,
    E: Fn(usize) -> f64,
{
    let n = b.nrows();
    let bound = epsilon(s);
    let mut tally = Tally::new();
    let (mode_name, sets_tested) = for_each_set(n, s, mode, |k| {
        let a = decoder(k)?;
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.len() });
        }
        tally.record(k, residual_l2(&a, b), bound, bound + EPS_AC_SLACK);
        Ok(())
    })?;
    Ok(VerificationReport {
        scheme: name.to_string(),
        condition: Condition::EpsAc,
        mode: mode_name,
        n,
        s,
        sets_tested,
        max_residual: tally.max_residual,
        bound,
        violations: tally.violations,
        worst_margin: tally.worst_margin,
        worst_set: tally.worst_set,
        passed: tally.violations == 0,
    })
}

/// ε-AC check of a graph scheme against its own bound `(lambda/d) sqrt(ns/(n-s))`.
pub fn check_eps_ac_scheme(
    scheme: &ApproxScheme,
    decoder: ApproxDecoder,
    s: usize,
    mode: VerificationMode,
) -> Result<VerificationReport> {
    let eps = scheme.epsilon(s)?;
    let name = format!("{:?}-n{}-d{}", scheme.kind(), scheme.n(), scheme.d()).to_lowercase();
    check_eps_ac(&name, scheme.b(), s, |k| decoder.decode(scheme, k), |_| eps, mode)
}

/// `(lambda / d) * sqrt(n s / (n - s))`.
pub fn epsilon_bound(n: usize, s: usize, d: usize, lambda: f64) -> Result<f64> {
    if s >= n {
        return Err(Error::InvalidParams(format!("need s < n, got n={n}, s={s}")));
    }
    if d == 0 {
        return Err(Error::InvalidParams("degree must be positive".into()));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParams(format!("spectral parameter must be nonnegative, got {lambda}")));
    }
    let (n, s) = (n as f64, s as f64);
    Ok(lambda / d as f64 * (n * s / (n - s)).sqrt())
}

/// Same bound with the second singular value of the biadjacency block.
pub fn epsilon_bound_bipartite(n: usize, s: usize, d: usize, lambda_bipartite: f64) -> Result<f64> {
    epsilon_bound(n, s, d, lambda_bipartite)
}

/// `sqrt(floor(s / d))`.
pub fn lower_bound(s: usize, d: usize) -> f64 {
    ((s / d) as f64).sqrt()
}

/// `min over a supported on K of ||a B - 1||_2`.
pub fn min_norm_residual(b: &DMatrix<f64>, k: &[usize]) -> Result<f64> {
    let k = normalize_set(k, b.nrows())?;
    Ok(best_row_combination(b, &k).1)
}

/// Result of the greedy adversary. Indices are 0-based and sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialSet {
    /// Survivors, `n - s` of them.
    pub k: Vec<usize>,
    /// Partitions no survivor holds.
    pub q: Vec<usize>,
    /// Workers holding some partition of Q.
    pub neighborhood: Vec<usize>,
    /// Row sparsity used, the largest number of nonzeros in a row.
    pub d: usize,
}

/// Greedy adversary: repeat `floor(s/d)` times, take the partition held by
/// the fewest remaining workers (smallest index on ties) and remove it with
/// the workers holding it. Survivors are the `n - s` smallest-index workers
/// outside the removed ones, so no combination of them touches Q.
pub fn adversarial_straggler_set(b: &DMatrix<f64>, s: usize) -> Result<AdversarialSet> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.ncols() });
    }
    let d = (0..n)
        .map(|i| b.row(i).iter().filter(|v| **v != 0.0).count())
        .max()
        .unwrap_or(0);
    if d == 0 {
        return Err(Error::InvalidParams("matrix has no nonzero entries".into()));
    }
    if s <= d {
        return Err(Error::InvalidParams(format!("need s > d, got s={s}, d={d}")));
    }
    if s >= n {
        return Err(Error::InvalidParams(format!("need s < n, got n={n}, s={s}")));
    }

    let mut worker_removed = vec![false; n];
    let mut part_removed = vec![false; n];
    let mut q = Vec::new();
    for _ in 0..(s / d) {
        let degree = |j: usize| (0..n).filter(|&i| !worker_removed[i] && b[(i, j)] != 0.0).count();
        let pick = (0..n)
            .filter(|&j| !part_removed[j])
            .min_by_key(|&j| (degree(j), j))
            .expect("fewer than n partitions removed");
        part_removed[pick] = true;
        q.push(pick);
        for i in 0..n {
            if b[(i, pick)] != 0.0 {
                worker_removed[i] = true;
            }
        }
    }
    let neighborhood: Vec<usize> = (0..n).filter(|&i| worker_removed[i]).collect();
    if neighborhood.len() > s {
        return Err(Error::ConstructionCheck(format!(
            "greedy neighbourhood has {} workers, more than s={s}",
            neighborhood.len()
        )));
    }
    let k: Vec<usize> = (0..n).filter(|&i| !worker_removed[i]).take(n - s).collect();
    q.sort_unstable();
    Ok(AdversarialSet { k, q, neighborhood, d })
}
