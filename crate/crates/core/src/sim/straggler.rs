//! Straggler models: which workers respond in each iteration.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StragglerKind {
    /// s_t workers chosen uniformly at random.
    FixedRandom,
    /// Each worker's delay is `shift + Exp(rate)`; the master keeps the
    /// first `n - s_t` to arrive.
    DelayTail {
        #[serde(default = "default_shift")]
        shift: f64,
        #[serde(default = "default_rate")]
        rate: f64,
    },
}

fn default_shift() -> f64 {
    1.0
}

fn default_rate() -> f64 {
    1.0
}

/// Either one straggler count for every iteration or a per-iteration list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StragglerSchedule {
    Constant(usize),
    PerIteration(Vec<usize>),
}

impl StragglerSchedule {
    /// `s_t` for 1-based `t`.
    pub fn at(&self, t: usize) -> Result<usize> {
        match self {
            Self::Constant(s) => Ok(*s),
            Self::PerIteration(list) => list
                .get(t - 1)
                .copied()
                .ok_or_else(|| Error::InvalidParams(format!("straggler schedule has no entry for iteration {t}"))),
        }
    }

    pub fn max(&self) -> usize {
        match self {
            Self::Constant(s) => *s,
            Self::PerIteration(list) => list.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StragglerConfig {
    #[serde(flatten)]
    pub kind: StragglerKind,
    pub s: StragglerSchedule,
    pub seed: u64,
}

impl StragglerConfig {
    pub fn fixed_random(s: usize, seed: u64) -> Self {
        Self {
            kind: StragglerKind::FixedRandom,
            s: StragglerSchedule::Constant(s),
            seed,
        }
    }

    pub fn validate(&self, n: usize, iterations: usize) -> Result<()> {
        if let StragglerSchedule::PerIteration(list) = &self.s {
            if list.len() < iterations {
                return Err(Error::InvalidParams(format!(
                    "straggler schedule has {} entries for {iterations} iterations",
                    list.len()
                )));
            }
        }
        if self.s.max() >= n {
            return Err(Error::InvalidParams(format!("need s_t < n = {n}")));
        }
        if let StragglerKind::DelayTail { shift, rate } = self.kind {
            if !(rate > 0.0) || !shift.is_finite() {
                return Err(Error::InvalidParams(format!("bad delay parameters shift={shift}, rate={rate}")));
            }
        }
        Ok(())
    }

    pub fn sampler(&self, n: usize) -> StragglerSampler {
        StragglerSampler {
            config: self.clone(),
            n,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
        }
    }
}

/// Draws the survivor set `K_t` for each iteration.
pub struct StragglerSampler {
    config: StragglerConfig,
    n: usize,
    rng: ChaCha8Rng,
}

impl StragglerSampler {
    /// Sorted survivors for 1-based iteration `t`, exactly `n - s_t` of them.
    pub fn next(&mut self, t: usize) -> Result<Vec<usize>> {
        let s = self.config.s.at(t)?;
        if s >= self.n {
            return Err(Error::InvalidParams(format!("s_t = {s} leaves no survivors")));
        }
        let keep = self.n - s;
        let mut k = match self.config.kind {
            StragglerKind::FixedRandom => {
                let mut idx: Vec<usize> = (0..self.n).collect();
                let (chosen, _) = idx.partial_shuffle(&mut self.rng, keep);
                chosen.to_vec()
            }
            StragglerKind::DelayTail { shift, rate } => {
                let exp = Exp::new(rate).map_err(|e| Error::InvalidParams(e.to_string()))?;
                let delays: Vec<f64> = (0..self.n).map(|_| shift + self.rng.sample(exp)).collect();
                let mut idx: Vec<usize> = (0..self.n).collect();
                idx.sort_by(|&a, &b| delays[a].total_cmp(&delays[b]).then(a.cmp(&b)));
                idx.truncate(keep);
                idx
            }
        };
        k.sort_unstable();
        Ok(k)
    }
}
