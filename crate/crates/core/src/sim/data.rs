//! Labelled datasets, partitioning across workers, and the logistic loss.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Probability that a synthetic label is flipped.
pub const DEFAULT_FLIP_PROB: f64 = 0.05;

/// Examples as rows of `x` with labels in {-1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("features must be finite".into()));
        }
        if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidParams(format!("label {bad} is not -1 or 1")));
        }
        Ok(Self { x, y })
    }

    /// Features drawn from N(0, I), labels `sign(w* . x)` for a random
    /// ground truth `w*`, each flipped with probability `flip_prob`.
    pub fn synthetic(m: usize, p: usize, flip_prob: f64, seed: u64) -> Result<Self> {
        if m == 0 || p == 0 {
            return Err(Error::InvalidParams("need m > 0 and p > 0".into()));
        }
        if !(0.0..=1.0).contains(&flip_prob) {
            return Err(Error::InvalidParams(format!("flip probability {flip_prob} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w_star = DVector::<f64>::from_fn(p, |_, _| rng.sample(StandardNormal));
        let x = DMatrix::<f64>::from_fn(m, p, |_, _| rng.sample(StandardNormal));
        let y = DVector::from_fn(m, |i, _| {
            let mut label = if x.row(i).dot(&w_star.transpose()) >= 0.0 { 1.0 } else { -1.0 };
            if rng.random_bool(flip_prob) {
                label = -label;
            }
            label
        });
        Self::new(x, y)
    }

    /// Parses a CSV with header `y,x1,...,xp`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if header.len() < 2 || &header[0] != "y" {
            return Err(Error::Format("header must be y,x1,...,xp".into()));
        }
        let p = header.len() - 1;
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            let line = record.position().map_or(0, |pos| pos.line());
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|e| Error::Format(format!("line {line}, column {}: {e}", col + 1)))?;
                if col == 0 {
                    labels.push(v);
                } else {
                    feats.push(v);
                }
            }
        }
        let m = labels.len();
        Self::new(DMatrix::from_row_slice(m, p, &feats), DVector::from_vec(labels))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("y".to_string())
            .chain((1..=self.p()).map(|j| format!("x{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.m() {
            let row: Vec<String> = std::iter::once(self.y[i])
                .chain(self.x.row(i).iter().copied())
                .map(|v| v.to_string())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    fn select(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
        }
    }
}

/// `1 / (1 + e^-z)`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn check_dim(w: &DVector<f64>, part: &Dataset) -> Result<()> {
    if w.len() != part.p() {
        return Err(Error::DimensionMismatch {
            expected: part.p(),
            got: w.len(),
        });
    }
    if part.m() == 0 {
        return Err(Error::InvalidParams("empty part".into()));
    }
    Ok(())
}

/// Mean logistic loss `log(1 + exp(-y w.x))` over the part.
pub fn logistic_loss(w: &DVector<f64>, part: &Dataset) -> Result<f64> {
    check_dim(w, part)?;
    let margins = &part.x * w;
    let total: f64 = margins.iter().zip(part.y.iter()).map(|(z, y)| softplus(-y * z)).sum();
    Ok(total / part.m() as f64)
}

/// Gradient of [`logistic_loss`]: mean of `-y x sigma(-y w.x)`.
pub fn logistic_gradient(w: &DVector<f64>, part: &Dataset) -> Result<DVector<f64>> {
    check_dim(w, part)?;
    let margins = &part.x * w;
    let coeffs = DVector::from_fn(part.m(), |i, _| -part.y[i] * sigmoid(-part.y[i] * margins[i]));
    Ok(part.x.tr_mul(&coeffs) / part.m() as f64)
}

/// n disjoint parts of equal size and the parts each worker holds.
#[derive(Clone, Debug)]
pub struct PartitionedDataset {
    parts: Vec<Dataset>,
    assignment: Vec<Vec<usize>>,
    padded: usize,
}

impl PartitionedDataset {
    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn p(&self) -> usize {
        self.parts[0].p()
    }

    pub fn parts(&self) -> &[Dataset] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> &Dataset {
        &self.parts[j]
    }

    /// Sorted part indices held by worker `i`.
    pub fn assignment(&self, i: usize) -> &[usize] {
        &self.assignment[i]
    }

    /// Number of duplicated examples added to equalize part sizes.
    pub fn padded(&self) -> usize {
        self.padded
    }

    /// Loss of the partitioned data: the mean of the part losses.
    pub fn loss(&self, w: &DVector<f64>) -> Result<f64> {
        let mut total = 0.0;
        for part in &self.parts {
            total += logistic_loss(w, part)?;
        }
        Ok(total / self.n() as f64)
    }

    /// Gradient of every part at `w`.
    pub fn part_gradients(&self, w: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.parts.iter().map(|part| logistic_gradient(w, part)).collect()
    }
}

/// Shuffles by seed and cuts into n contiguous blocks of size `ceil(m/n)`.
/// Short blocks are topped up by repeating their own examples, so parts stay
/// disjoint as sets of original examples. `supports[i]` lists the parts
/// worker i holds.
pub fn partition(data: &Dataset, supports: &[Vec<usize>], seed: u64) -> Result<PartitionedDataset> {
    let n = supports.len();
    if n == 0 {
        return Err(Error::InvalidParams("need at least one worker".into()));
    }
    let m = data.m();
    if m < n {
        return Err(Error::TooFewExamples { m, n });
    }
    if let Some(&j) = supports.iter().flatten().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let size = m.div_ceil(n);
    let base = m / n;
    let extra = m % n;
    let mut parts = Vec::with_capacity(n);
    let mut start = 0;
    let mut padded = 0;
    for j in 0..n {
        // the first `extra` blocks get one more example
        let len = base + usize::from(j < extra);
        let mut rows: Vec<usize> = order[start..start + len].to_vec();
        start += len;
        let mut k = 0;
        while rows.len() < size {
            rows.push(rows[k]);
            k += 1;
            padded += 1;
        }
        parts.push(data.select(&rows));
    }
    let assignment = supports
        .iter()
        .map(|sup| {
            let mut s = sup.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    Ok(PartitionedDataset {
        parts,
        assignment,
        padded,
    })
}
