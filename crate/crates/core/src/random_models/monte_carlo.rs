use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{primes_upto, residue_from_key, residue_key, WindowBits};
use crate::error::{invalid, Result};
use crate::keyed::{derive, tag};
use crate::prime_engine::window_len;
use crate::table::{Cell, Provenance, Table};

/// Trials per parallel work unit; fixed so that the split never depends on
/// the worker count.
const CHUNK: u64 = 2048;

/// Seed of trial `i`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    derive(derive(seed, tag::TRIAL), i)
}

/// Histogram of the survivor count `S_z = |[1, ⌊y⌋] ∩ 𝒮_z|` over independent trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivorDistribution {
    pub window: u64,
    pub trials: u64,
    pub forbid_zero: bool,
    pub seed: u64,
    /// `counts[k]` = trials with `S_z = k`.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub y: f64,
    pub z: f64,
    pub k: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
    pub forbid_zero: bool,
}

impl SurvivorDistribution {
    pub fn frequency(&self, k: u64) -> f64 {
        self.counts.get(k as usize).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Binomial standard error of [`frequency`](Self::frequency).
    pub fn stderr(&self, k: u64) -> f64 {
        let p = self.frequency(k);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        let s: u64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum();
        s as f64 / self.trials as f64
    }
}

/// One trial: survivors left in `[1, len]` after every prime of `primes`.
fn run_trial(len: u64, primes: &[u64], forbid_zero: bool, tseed: u64) -> u64 {
    let rkey = residue_key(tseed);
    let mut bits = WindowBits::full(len);
    let mut left = len;
    for &p in primes {
        if left == 0 {
            break;
        }
        let alpha = residue_from_key(rkey, p, forbid_zero);
        if p > len {
            if alpha >= 1 && alpha <= len && bits.clear(alpha) {
                left -= 1;
            }
        } else {
            left -= bits.strike_class(p, alpha);
        }
    }
    left
}

pub fn survivor_distribution(
    y: f64,
    z: f64,
    trials: u64,
    forbid_zero: bool,
    seed: u64,
) -> Result<SurvivorDistribution> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let len = window_len(y)?;
    let primes = primes_upto(z)?;
    let chunks = trials.div_ceil(CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u64; len as usize + 1];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                h[run_trial(len, &primes, forbid_zero, trial_seed(seed, i)) as usize] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; len as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(SurvivorDistribution {
        window: len,
        trials,
        forbid_zero,
        seed,
        counts: hist,
    })
}

/// Frequency estimate of `P(S_z = k)` with its binomial standard error.
pub fn monte_carlo_window(
    y: f64,
    z: f64,
    k: u64,
    trials: u64,
    forbid_zero: bool,
    seed: u64,
) -> Result<McEstimate> {
    let d = survivor_distribution(y, z, trials, forbid_zero, seed)?;
    Ok(McEstimate {
        y,
        z,
        k,
        trials,
        estimate: d.frequency(k),
        stderr: d.stderr(k),
        seed,
        forbid_zero,
    })
}

/// CSV table `(y, z, k, trials, estimate, stderr, seed)`.
pub fn monte_carlo_table(rows: &[McEstimate]) -> Table {
    let mut t = Table::new(
        "monte-carlo-window",
        Provenance::MonteCarlo,
        &["y", "z", "k", "trials", "estimate", "stderr", "seed"],
    );
    for r in rows {
        t.push(vec![
            Cell::from(r.y),
            Cell::from(r.z),
            Cell::from(r.k),
            Cell::from(r.trials),
            Cell::from(r.estimate),
            Cell::from(r.stderr),
            Cell::from(r.seed),
        ]);
    }
    t
}
