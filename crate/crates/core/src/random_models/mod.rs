//! Random sieve models: uniformly random residue classes removed modulo each
//! prime, Cramér's model, the model `ℛ`, Monte Carlo survivor statistics and
//! the normalized survivor traces along increasing prime cutoffs.

mod martingale;
mod models;
mod monte_carlo;

pub use martingale::{
    martingale_trace, martingale_trace_with, next_step_survivor_sum, upper_sieve_increment_shape,
    IncrementBounds, MartingaleTrace, Normalization,
};
pub use models::{bft_sample, bft_start, cramer_sample, BFT_FIRST};
pub use monte_carlo::{
    monte_carlo_table, monte_carlo_window, survivor_distribution, trial_seed, McEstimate,
    SurvivorDistribution,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::keyed::{derive, tag, uniform_below};
use crate::params::{table, TABLE_LIMIT};
use crate::prime_engine::{primes_in, window_len};

/// `α_p` as a function of `(seed, p)`: uniform on `[0, p)`, or on `[1, p)`
/// when zero is forbidden.
#[inline]
pub fn keyed_residue(seed: u64, p: u64, forbid_zero: bool) -> u64 {
    residue_from_key(residue_key(seed), p, forbid_zero)
}

#[inline]
pub(crate) fn residue_key(seed: u64) -> u64 {
    derive(seed, tag::RESIDUE)
}

#[inline]
pub(crate) fn residue_from_key(rkey: u64, p: u64, forbid_zero: bool) -> u64 {
    let key = derive(rkey, p);
    if forbid_zero {
        1 + uniform_below(key, p - 1)
    } else {
        uniform_below(key, p)
    }
}

pub(crate) fn primes_upto(z: f64) -> Result<Vec<u64>> {
    if z < 2.0 {
        return Ok(Vec::new());
    }
    let lim = z.floor() as u64;
    if lim <= TABLE_LIMIT {
        let primes = &table().primes;
        Ok(primes[..primes.partition_point(|&p| p <= lim)].to_vec())
    } else {
        Ok(primes_in(0, lim)?.into_elements())
    }
}

fn prime_count_upto(z: f64) -> Result<usize> {
    if z <= TABLE_LIMIT as f64 {
        Ok(table().primes.partition_point(|&p| p as f64 <= z))
    } else {
        Ok(primes_upto(z)?.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueAssignment {
    pub prime_cutoff: f64,
    pub forbid_zero: bool,
    pub master_seed: u64,
    primes: Vec<u64>,
    residues: Vec<u64>,
}

/// Draw `α_p` for every prime `p <= z`.
pub fn sample_residues(z: f64, seed: u64, forbid_zero: bool) -> Result<ResidueAssignment> {
    if !(z >= 2.0) || !z.is_finite() {
        return Err(invalid(format!("z must be at least 2, got {z}")));
    }
    let primes = primes_upto(z)?;
    let residues = primes
        .iter()
        .map(|&p| keyed_residue(seed, p, forbid_zero))
        .collect();
    Ok(ResidueAssignment {
        prime_cutoff: z,
        forbid_zero,
        master_seed: seed,
        primes,
        residues,
    })
}

impl ResidueAssignment {
    /// An assignment with explicitly chosen residues (`(p, α_p)` pairs, any order).
    pub fn from_residues(mut pairs: Vec<(u64, u64)>, forbid_zero: bool) -> Result<Self> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate prime in residue list"));
        }
        for &(p, a) in &pairs {
            if p < 2 || a >= p || (forbid_zero && a == 0) {
                return Err(invalid(format!("residue {a} is not valid modulo {p}")));
            }
        }
        let prime_cutoff = pairs.last().map_or(1.0, |&(p, _)| p as f64);
        let (primes, residues) = pairs.into_iter().unzip();
        Ok(ResidueAssignment {
            prime_cutoff,
            forbid_zero,
            master_seed: 0,
            primes,
            residues,
        })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn residue(&self, p: u64) -> Option<u64> {
        self.primes.binary_search(&p).ok().map(|i| self.residues[i])
    }

    /// Pin `α_p`, as when conditioning on the residues of a set of primes.
    pub fn fix(&mut self, p: u64, alpha: u64) -> Result<()> {
        if alpha >= p || (self.forbid_zero && alpha == 0) {
            return Err(invalid(format!(
                "residue {alpha} is not allowed modulo {p}"
            )));
        }
        let i = self
            .primes
            .binary_search(&p)
            .map_err(|_| invalid(format!("{p} is not covered by this assignment")))?;
        self.residues[i] = alpha;
        Ok(())
    }

    /// Largest prime covered.
    pub fn largest_prime(&self) -> u64 {
        self.primes.last().copied().unwrap_or(0)
    }
}

/// Bitset over `[1, len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct WindowBits {
    len: u64,
    words: Vec<u64>,
}

impl WindowBits {
    pub(crate) fn full(len: u64) -> Self {
        let nw = len.div_ceil(64) as usize;
        let mut words = vec![u64::MAX; nw];
        if len % 64 != 0 {
            words[nw - 1] = (1u64 << (len % 64)) - 1;
        }
        WindowBits { len, words }
    }

    /// Remove every `n ≡ alpha (mod p)`; returns how many were removed.
    #[inline]
    pub(crate) fn strike_class(&mut self, p: u64, alpha: u64) -> u64 {
        let first = if alpha == 0 { p } else { alpha };
        let mut removed = 0;
        let mut n = first;
        while n <= self.len {
            removed += self.clear(n) as u64;
            n += p;
        }
        removed
    }

    /// Clear `n`; true if it was set.
    #[inline]
    pub(crate) fn clear(&mut self, n: u64) -> bool {
        let i = (n - 1) as usize;
        let (w, b) = (i / 64, i % 64);
        let was = (self.words[w] >> b) & 1 == 1;
        self.words[w] &= !(1u64 << b);
        was
    }

    #[inline]
    pub(crate) fn get(&self, n: u64) -> bool {
        let i = (n - 1) as usize;
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub(crate) fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub(crate) fn members(&self) -> Vec<u64> {
        (1..=self.len).filter(|&n| self.get(n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SievedWindow {
    pub y: f64,
    pub z: f64,
    pub survivors: Vec<u64>,
    pub count: u64,
}

/// Remove `α_p mod p` from `[1, ⌊y⌋]` for the primes of `a` up to `z`.
///
/// A prime above `⌊y⌋` meets the window in at most the single point `α_p`.
pub fn sift_window(y: f64, z: f64, a: &ResidueAssignment) -> Result<SievedWindow> {
    let len = window_len(y)?;
    let needed = prime_count_upto(z)?;
    if a.primes.partition_point(|&p| p as f64 <= z) < needed {
        return Err(invalid(format!(
            "assignment does not cover every prime up to {z}"
        )));
    }
    let mut bits = WindowBits::full(len);
    for (&p, &alpha) in a.primes.iter().zip(&a.residues) {
        if p as f64 > z {
            break;
        }
        if p > len {
            if alpha >= 1 && alpha <= len {
                bits.clear(alpha);
            }
        } else {
            bits.strike_class(p, alpha);
        }
    }
    let survivors = if len == 0 { Vec::new() } else { bits.members() };
    Ok(SievedWindow {
        y,
        z,
        count: survivors.len() as u64,
        survivors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(y: f64, z: f64, a: &ResidueAssignment) -> Vec<u64> {
        let len = y.floor() as u64;
        (1..=len)
            .filter(|&n| {
                a.primes()
                    .iter()
                    .zip(a.residues())
                    .filter(|(&p, _)| p as f64 <= z)
                    .all(|(&p, &al)| n % p != al)
            })
            .collect()
    }

    #[test]
    fn hand_example() {
        let a =
            ResidueAssignment::from_residues(vec![(2, 0), (3, 1), (5, 2), (7, 3)], false).unwrap();
        let w = sift_window(10.0, 7.0, &a).unwrap();
        assert_eq!(w.survivors, vec![5, 9]);
        assert_eq!(w.count, 2);
    }

    #[test]
    fn no_primes_keeps_everything() {
        let a = sample_residues(2.0, 1, false).unwrap();
        let w = sift_window(12.0, 1.5, &a).unwrap();
        assert_eq!(w.count, 12);
    }

    #[test]
    fn forbid_zero_support() {
        let a = sample_residues(1000.0, 77, true).unwrap();
        assert!(a.residues().iter().all(|&r| r != 0));
        let b = sample_residues(1000.0, 77, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sparse_shortcut_matches_naive_scan() {
        for seed in 0..100u64 {
            let a = sample_residues(1000.0, seed, seed % 2 == 0).unwrap();
            for y in [1.0, 7.5, 23.0, 50.0] {
                for z in [2.0, 10.0, 47.0, 1000.0] {
                    assert_eq!(sift_window(y, z, &a).unwrap().survivors, naive(y, z, &a));
                }
            }
        }
    }

    #[test]
    fn fixing_residues() {
        let mut a = sample_residues(30.0, 5, true).unwrap();
        assert!(a.fix(7, 0).is_err());
        a.fix(7, 3).unwrap();
        assert_eq!(a.residue(7), Some(3));
        assert!(a.fix(31, 1).is_err());
    }

    #[test]
    fn residue_three_is_uniform() {
        let mut counts = [0u64; 3];
        let n = 100_000u64;
        for seed in 0..n {
            counts[keyed_residue(seed, 3, false) as usize] += 1;
        }
        let e = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 2 degrees of freedom, 99.9% quantile 13.8
        assert!(chi2 < 13.8, "chi2 = {chi2}, counts {counts:?}");
    }
}
