//! Approximate gradient codes from regular graphs.
//!
//! The encoding matrix is a normalized adjacency matrix `B = A_G / d` (or the
//! normalized biadjacency block `C / d` of a bipartite graph). The linear
//! decoder weights every surviving worker by `n / (n - s)`; its error is
//! bounded by `(lambda / d) * sqrt(n s / (n - s))`. The optimal decoder is
//! the least-squares combination of the surviving rows.

use std::collections::VecDeque;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::epsilon_bound;
use crate::error::{Error, Result};
use crate::linalg::{best_row_combination, normalize_set, singular_values};

/// Restarts allowed when sampling random regular graphs.
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// A regular (multi)graph together with its adjacency spectrum.
///
/// Adjacency entries are edge multiplicities; a loop contributes 2 to its
/// diagonal entry, so every row sums to the degree.
#[derive(Clone, Debug)]
pub struct SpectralGraph {
    n: usize,
    d: usize,
    adjacency: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    lambda: f64,
    connected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub lambda_1: f64,
    /// `max(|lambda_2|, |lambda_n|)`.
    pub lambda: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

impl SpectralGraph {
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::InvalidParams("adjacency must be a nonempty square matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = adjacency[(i, j)];
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidParams(format!("entry ({i},{j}) = {v} is not a multiplicity")));
                }
                if v != adjacency[(j, i)] {
                    return Err(Error::InvalidParams("adjacency must be symmetric".into()));
                }
            }
        }
        let d = row_degree(&adjacency, 0);
        if (1..n).any(|i| row_degree(&adjacency, i) != d) {
            return Err(Error::InvalidParams("graph is not regular".into()));
        }
        let eigenvalues = symmetric_eigenvalues(&adjacency);
        let lambda = second_magnitude(&eigenvalues);
        let connected = is_connected(&adjacency);
        Ok(Self {
            n,
            d,
            adjacency,
            eigenvalues,
            lambda,
            connected,
        })
    }

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = DMatrix::zeros(n, n);
        for &(u, v) in edges {
            adj[(u, v)] += 1.0;
            adj[(v, u)] += 1.0;
        }
        Self::from_adjacency(adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// No loops and no repeated edges.
    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|i| self.adjacency[(i, i)] == 0.0) && self.adjacency.iter().all(|&v| v <= 1.0)
    }

    /// Connected and `lambda_n = -d` (within tolerance).
    pub fn is_bipartite(&self) -> bool {
        let last = *self.eigenvalues.last().expect("nonempty graph");
        self.connected && (last + self.d as f64).abs() < 1e-8
    }

    /// Neighbours of `v` with multiplicity, 0-based and sorted. A loop is
    /// listed twice.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.d);
        for u in 0..self.n {
            for _ in 0..self.adjacency[(v, u)] as usize {
                out.push(u);
            }
        }
        out
    }
}

fn row_degree(adj: &DMatrix<f64>, i: usize) -> usize {
    adj.row(i).iter().sum::<f64>() as usize
}

fn symmetric_eigenvalues(adj: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = adj.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn second_magnitude(desc: &[f64]) -> f64 {
    match desc.len() {
        0 | 1 => 0.0,
        len => desc[1].abs().max(desc[len - 1].abs()),
    }
}

fn is_connected(adj: &DMatrix<f64>) -> bool {
    let n = adj.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if adj[(u, v)] > 0.0 && !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Eigenvalues (descending) and `lambda = max(|lambda_2|, |lambda_n|)`.
pub fn spectral_gap(g: &SpectralGraph) -> Spectrum {
    Spectrum {
        lambda_1: g.eigenvalues[0],
        lambda: g.lambda,
        eigenvalues: g.eigenvalues.clone(),
    }
}

pub fn complete_graph(n: usize) -> Result<SpectralGraph> {
    if n < 2 {
        return Err(Error::InvalidParams("complete graph needs n >= 2".into()));
    }
    SpectralGraph::from_adjacency(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
}

pub fn cycle_graph(n: usize) -> Result<SpectralGraph> {
    if n < 3 {
        return Err(Error::InvalidParams("cycle needs n >= 3".into()));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    SpectralGraph::from_edges(n, &edges)
}

/// Pairs up `left` and `right` stubs without repeating an edge (and without
/// loops when `simple_loops` is set). Returns `None` on a dead end.
fn pair_stubs<R: Rng>(
    rng: &mut R,
    left: &mut Vec<usize>,
    right: Option<&mut Vec<usize>>,
    taken: &mut [Vec<bool>],
) -> Option<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    match right {
        None => {
            // one stub pool: pair two stubs of different, non-adjacent vertices
            while !left.is_empty() {
                let len = left.len();
                let mut found = None;
                for _ in 0..50 {
                    let i = rng.random_range(0..len);
                    let j = rng.random_range(0..len);
                    let (u, v) = (left[i], left[j]);
                    if i != j && u != v && !taken[u][v] {
                        found = Some((i, j));
                        break;
                    }
                }
                if found.is_none() {
                    let valid: Vec<(usize, usize)> = (0..len)
                        .flat_map(|i| ((i + 1)..len).map(move |j| (i, j)))
                        .filter(|&(i, j)| left[i] != left[j] && !taken[left[i]][left[j]])
                        .collect();
                    if valid.is_empty() {
                        return None;
                    }
                    found = Some(valid[rng.random_range(0..valid.len())]);
                }
                let (i, j) = found.expect("pair chosen");
                let (u, v) = (left[i], left[j]);
                taken[u][v] = true;
                taken[v][u] = true;
                edges.push((u, v));
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                left.swap_remove(hi);
                left.swap_remove(lo);
            }
        }
        Some(right) => {
            while !left.is_empty() {
                let len = left.len();
                let i = len - 1;
                let u = left[i];
                let mut found = None;
                for _ in 0..50 {
                    let j = rng.random_range(0..len);
                    if !taken[u][right[j]] {
                        found = Some(j);
                        break;
                    }
                }
                if found.is_none() {
                    let valid: Vec<usize> = (0..len).filter(|&j| !taken[u][right[j]]).collect();
                    if valid.is_empty() {
                        return None;
                    }
                    found = Some(valid[rng.random_range(0..valid.len())]);
                }
                let j = found.expect("stub chosen");
                let v = right[j];
                taken[u][v] = true;
                edges.push((u, v));
                left.pop();
                right.swap_remove(j);
            }
        }
    }
    Some(edges)
}

/// Simple connected d-regular graph on n vertices, sampled by random stub
/// pairing that never creates loops or repeated edges. Restarts on dead
/// ends or disconnected results.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<SpectralGraph> {
    if d == 0 || d >= n {
        return Err(Error::InvalidParams(format!("need 0 < d < n, got n={n}, d={d}")));
    }
    if (n * d) % 2 != 0 {
        return Err(Error::InvalidParams(format!("n*d must be even, got n={n}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut taken = vec![vec![false; n]; n];
        let Some(edges) = pair_stubs(&mut rng, &mut stubs, None, &mut taken) else {
            continue;
        };
        let g = SpectralGraph::from_edges(n, &edges)?;
        if g.connected {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// The 8-regular Margulis / Gabber-Galil graph on `Z_m x Z_m`: (x, y) is
/// joined to (x +- 2y, y), (x +- (2y+1), y), (x, y +- 2x), (x, y +- (2x+1)).
/// Repeated edges and loops are kept so that every vertex has degree 8.
pub fn margulis_graph(m: usize) -> Result<SpectralGraph> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("Margulis graph needs m >= 2, got {m}")));
    }
    let n = m * m;
    let idx = |x: usize, y: usize| (x % m) * m + (y % m);
    let mut edges = Vec::with_capacity(4 * n);
    for x in 0..m {
        for y in 0..m {
            let v = idx(x, y);
            // each forward map together with its inverse contributes one edge
            edges.push((v, idx(x + 2 * y, y)));
            edges.push((v, idx(x + 2 * y + 1, y)));
            edges.push((v, idx(x, y + 2 * x)));
            edges.push((v, idx(x, y + 2 * x + 1)));
        }
    }
    SpectralGraph::from_edges(n, &edges)
}

/// d-regular bipartite graph with both sides of size n, stored through its
/// n x n biadjacency block `C`.
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    n: usize,
    d: usize,
    biadjacency: DMatrix<f64>,
    singular_values: Vec<f64>,
    connected: bool,
}

impl BipartiteGraph {
    pub fn from_biadjacency(c: DMatrix<f64>) -> Result<Self> {
        let n = c.nrows();
        if n == 0 || c.ncols() != n {
            return Err(Error::InvalidParams("biadjacency must be a nonempty square matrix".into()));
        }
        if c.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
            return Err(Error::InvalidParams("biadjacency entries must be multiplicities".into()));
        }
        let d = c.row(0).iter().sum::<f64>();
        let regular = (0..n).all(|i| c.row(i).iter().sum::<f64>() == d && c.column(i).iter().sum::<f64>() == d);
        if !regular {
            return Err(Error::InvalidParams("bipartite graph is not regular on both sides".into()));
        }
        let singular_values = singular_values(&c);
        let mut g = Self {
            n,
            d: d as usize,
            biadjacency: c,
            singular_values,
            connected: false,
        };
        g.connected = is_connected(&g.full_adjacency());
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn biadjacency(&self) -> &DMatrix<f64> {
        &self.biadjacency
    }

    /// Descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Second singular value of the biadjacency block.
    pub fn lambda_bipartite(&self) -> f64 {
        self.singular_values.get(1).copied().unwrap_or(0.0)
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// The 2n x 2n adjacency `[[0, C], [C^T, 0]]`.
    pub fn full_adjacency(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).copy_from(&self.biadjacency);
        a.view_mut((n, 0), (n, n)).copy_from(&self.biadjacency.transpose());
        a
    }
}

pub fn complete_bipartite(n: usize) -> Result<BipartiteGraph> {
    BipartiteGraph::from_biadjacency(DMatrix::from_element(n, n, 1.0))
}

/// Random simple connected bipartite graph, d-regular on both sides.
pub fn random_bipartite_regular(n: usize, d: usize, seed: u64) -> Result<BipartiteGraph> {
    if d == 0 || d > n {
        return Err(Error::InvalidParams(format!("need 0 < d <= n, got n={n}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut left: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut right = left.clone();
        let mut taken = vec![vec![false; n]; n];
        let Some(edges) = pair_stubs(&mut rng, &mut left, Some(&mut right), &mut taken) else {
            continue;
        };
        let mut c = DMatrix::zeros(n, n);
        for (u, v) in edges {
            c[(u, v)] = 1.0;
        }
        let g = BipartiteGraph::from_biadjacency(c)?;
        if g.connected {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxKind {
    Expander,
    Bipartite,
    Identity,
}

/// Row-stochastic encoding matrix with at most `d` nonzeros per row and the
/// spectral parameter used in its error bound.
#[derive(Clone, Debug)]
pub struct ApproxScheme {
    kind: ApproxKind,
    d: usize,
    b: DMatrix<f64>,
    bound_lambda: f64,
}

impl ApproxScheme {
    pub fn from_parts(kind: ApproxKind, d: usize, b: DMatrix<f64>, bound_lambda: f64) -> Result<Self> {
        let n = b.nrows();
        if n == 0 || b.ncols() != n {
            return Err(Error::InvalidParams("scheme matrix must be a nonempty square matrix".into()));
        }
        if d == 0 {
            return Err(Error::InvalidParams("degree must be positive".into()));
        }
        if !(bound_lambda >= 0.0) {
            return Err(Error::InvalidParams(format!("bad spectral bound {bound_lambda}")));
        }
        for i in 0..n {
            let sum: f64 = b.row(i).iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("row {i} sums to {sum}, not 1")));
            }
        }
        let scheme = Self {
            kind,
            d,
            b,
            bound_lambda,
        };
        if scheme.max_row_support() > d {
            return Err(Error::InvalidParams("row support exceeds the degree".into()));
        }
        Ok(scheme)
    }

    pub fn kind(&self) -> ApproxKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn bound_lambda(&self) -> f64 {
        self.bound_lambda
    }

    pub fn row_supports(&self) -> Vec<usize> {
        (0..self.n())
            .map(|i| self.b.row(i).iter().filter(|v| **v != 0.0).count())
            .collect()
    }

    /// Storage overhead: the largest number of parts any worker holds.
    pub fn max_row_support(&self) -> usize {
        self.row_supports().into_iter().max().unwrap_or(0)
    }

    /// Error bound of the linear decoder with s stragglers.
    pub fn epsilon(&self, s: usize) -> Result<f64> {
        epsilon_bound(self.n(), s, self.d, self.bound_lambda)
    }
}

/// `B = A_G / d` for a connected regular graph.
pub fn build_expander_scheme(g: &SpectralGraph) -> Result<ApproxScheme> {
    if !g.connected {
        return Err(Error::Disconnected);
    }
    if g.is_bipartite() {
        warn!("bipartite graph: lambda = d, so the expander bound is no better than the trivial scheme; use a bipartite scheme instead");
    }
    let d = g.d as f64;
    ApproxScheme::from_parts(ApproxKind::Expander, g.d, g.adjacency.map(|v| v / d), g.lambda)
}

/// `B = C / d` with the bound parameter `sigma_2(C)`.
pub fn build_bipartite_scheme(g: &BipartiteGraph) -> Result<ApproxScheme> {
    if !g.connected {
        return Err(Error::Disconnected);
    }
    let d = g.d as f64;
    ApproxScheme::from_parts(ApproxKind::Bipartite, g.d, g.biadjacency.map(|v| v / d), g.lambda_bipartite())
}

/// The trivial scheme: every worker holds its own part, `B = I`.
pub fn identity_scheme(n: usize) -> Result<ApproxScheme> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    ApproxScheme::from_parts(ApproxKind::Identity, 1, DMatrix::identity(n, n), 1.0)
}

/// `A(K) = 1 + u_K`: weight `n / |K|` on K and zero elsewhere.
pub fn linear_decoder(k: &[usize], n: usize) -> Result<DVector<f64>> {
    let k = normalize_set(k, n)?;
    let weight = n as f64 / k.len() as f64;
    let mut a = DVector::zeros(n);
    for &i in &k {
        a[i] = weight;
    }
    Ok(a)
}

/// The characteristic vector of K (ignore the stragglers).
pub fn ignore_stragglers_decoder(k: &[usize], n: usize) -> Result<DVector<f64>> {
    let k = normalize_set(k, n)?;
    let mut a = DVector::zeros(n);
    for &i in &k {
        a[i] = 1.0;
    }
    Ok(a)
}

/// Minimum-norm least-squares decoder over the rows of `b` indexed by K.
pub fn optimal_decoder_for(b: &DMatrix<f64>, k: &[usize]) -> Result<DVector<f64>> {
    let k = normalize_set(k, b.nrows())?;
    let (coeffs, _) = best_row_combination(b, &k);
    let mut a = DVector::zeros(b.nrows());
    for (c, &i) in k.iter().enumerate() {
        a[i] = coeffs[c];
    }
    Ok(a)
}

pub fn optimal_decoder(scheme: &ApproxScheme, k: &[usize]) -> Result<DVector<f64>> {
    optimal_decoder_for(&scheme.b, k)
}

/// `||a B - 1||_2`.
pub fn residual_l2(a: &DVector<f64>, b: &DMatrix<f64>) -> f64 {
    (a.transpose() * b).iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxDecoder {
    Linear,
    Optimal,
    IgnoreStragglers,
}

impl ApproxDecoder {
    pub fn decode(&self, scheme: &ApproxScheme, k: &[usize]) -> Result<DVector<f64>> {
        match self {
            Self::Linear => linear_decoder(k, scheme.n()),
            Self::Optimal => optimal_decoder(scheme, k),
            Self::IgnoreStragglers => ignore_stragglers_decoder(k, scheme.n()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Optimal => "optimal",
            Self::IgnoreStragglers => "ignore-stragglers",
        }
    }
}

impl std::str::FromStr for ApproxDecoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "optimal" => Ok(Self::Optimal),
            "ignore-stragglers" | "ignore" => Ok(Self::IgnoreStragglers),
            other => Err(Error::InvalidParams(format!("unknown decoder '{other}'"))),
        }
    }
}
