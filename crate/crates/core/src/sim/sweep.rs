//! Recovery-error sweeps over random expander schemes.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mix_seed;
use crate::error::{Error, Result};
use crate::expander::{build_expander_scheme, random_regular_graph, residual_l2, ApproxDecoder};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub n: usize,
    pub degrees: Vec<usize>,
    pub s_values: Vec<usize>,
    /// Graphs drawn per degree; each trial pairs one graph with one random K.
    pub trials: usize,
    pub decoders: Vec<ApproxDecoder>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub decoder: ApproxDecoder,
    pub mean_residual: f64,
    pub std_residual: f64,
    /// Mean over the trial graphs of `(lambda/d) sqrt(ns/(n-s))`.
    pub bound: f64,
}

/// Mean and sample standard deviation of `||A(K) B - 1||_2`. The same graphs
/// are reused for every s, and the same K for every decoder.
pub fn l2_sweep(params: &SweepParams) -> Result<Vec<SweepRow>> {
    let n = params.n;
    if params.trials == 0 || params.degrees.is_empty() || params.s_values.is_empty() || params.decoders.is_empty() {
        return Err(Error::InvalidParams("sweep needs trials, degrees, s values and decoders".into()));
    }
    if let Some(&s) = params.s_values.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParams(format!("s = {s} must be below n = {n}")));
    }
    let mut rows = Vec::new();
    for &d in &params.degrees {
        let schemes = (0..params.trials)
            .map(|trial| {
                let g = random_regular_graph(n, d, mix_seed(params.seed, d as u64, trial as u64))?;
                build_expander_scheme(&g)
            })
            .collect::<Result<Vec<_>>>()?;
        for &s in &params.s_values {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, d as u64, (1 << 32) + s as u64));
            let mut idx: Vec<usize> = (0..n).collect();
            let mut residuals = vec![Vec::with_capacity(params.trials); params.decoders.len()];
            let mut bound = 0.0;
            for scheme in &schemes {
                let (chosen, _) = idx.partial_shuffle(&mut rng, n - s);
                let k = chosen.to_vec();
                for (slot, decoder) in params.decoders.iter().enumerate() {
                    let a = decoder.decode(scheme, &k)?;
                    residuals[slot].push(residual_l2(&a, scheme.b()));
                }
                bound += scheme.epsilon(s)?;
            }
            bound /= params.trials as f64;
            for (slot, decoder) in params.decoders.iter().enumerate() {
                let (mean, std) = mean_std(&residuals[slot]);
                rows.push(SweepRow {
                    n,
                    d,
                    s,
                    decoder: *decoder,
                    mean_residual: mean,
                    std_residual: std,
                    bound,
                });
            }
        }
    }
    Ok(rows)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let len = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / len;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (len - 1.0);
    (mean, var.sqrt())
}

/// Writes `n,d,s,decoder,mean_residual,std_residual,bound`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "n,d,s,decoder,mean_residual,std_residual,bound")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.d,
            r.s,
            r.decoder.name(),
            r.mean_residual,
            r.std_residual,
            r.bound
        )?;
    }
    Ok(())
}
