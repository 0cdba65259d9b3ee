use serde::{Deserialize, Serialize};

use super::{primes_upto, sample_residues, ResidueAssignment, WindowBits};
use crate::error::{invalid, Result};
use crate::prime_engine::window_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `Θ_{w1,p}`: unrestricted residues, a martingale.
    Theta,
    /// `Θ̂_{w1,p}`: residue zero forbidden, a submartingale with bounded drift.
    ThetaHat,
}

impl Normalization {
    pub fn forbid_zero(self) -> bool {
        matches!(self, Normalization::ThetaHat)
    }

    /// Survival factor of one prime.
    pub fn factor(self, p: u64) -> f64 {
        match self {
            Normalization::Theta => 1.0 - 1.0 / p as f64,
            Normalization::ThetaHat => 1.0 - 1.0 / (p - 1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTrace {
    pub y: f64,
    pub w1: f64,
    pub w2: f64,
    pub normalization: Normalization,
    /// `p_0 = w1`, then the primes `p_1 < … < p_m` of `(w1, w2]`.
    pub cutoffs: Vec<f64>,
    /// `S_{p_j}`.
    pub survivors: Vec<u64>,
    /// `X_j = (normalization over (w1, p_j])^{-1} · S_{p_j}`.
    pub values: Vec<f64>,
}

impl MartingaleTrace {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total_change(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

/// Per-step increment bounds `c_j` and drift allowances `d_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementBounds {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl IncrementBounds {
    /// Worst-case bounds valid for every residue choice.
    ///
    /// With `R` points removed at the step to `p`, the increment is
    /// `N_{p}^{-1} (S/(p - ε) - R)` where `ε` is 0 for `Θ` and 1 for `Θ̂`;
    /// `S <= ⌊y⌋` and `R <= ⌈⌊y⌋/p⌉`. The drift under `Θ̂` is
    /// `N_p^{-1} |S ∩ (0 mod p)| / (p - 1) <= N_p^{-1} ⌊⌊y⌋/p⌋ / (p - 1)`.
    pub fn analytic(y: f64, w1: f64, w2: f64, normalization: Normalization) -> Result<Self> {
        let primes = step_primes(w1, w2)?;
        let len = window_len(y)? as f64;
        let mut norm = 1.0f64;
        let mut c = Vec::with_capacity(primes.len());
        let mut d = Vec::with_capacity(primes.len());
        for &p in &primes {
            norm *= normalization.factor(p);
            let pf = p as f64;
            let removed = (len / pf).ceil();
            match normalization {
                Normalization::Theta => {
                    c.push(removed.max(len / pf) / norm);
                    d.push(0.0);
                }
                Normalization::ThetaHat => {
                    c.push(removed.max(len / (pf - 1.0)) / norm);
                    d.push((len / pf).floor() / (pf - 1.0) / norm);
                }
            }
        }
        Ok(IncrementBounds { c, d })
    }
}

fn step_primes(w1: f64, w2: f64) -> Result<Vec<u64>> {
    if !(w1 >= 2.0) || !(w1 < w2) || !w2.is_finite() {
        return Err(invalid(format!(
            "need 2 <= w1 < w2, got w1 = {w1}, w2 = {w2}"
        )));
    }
    Ok(primes_upto(w2)?
        .into_iter()
        .filter(|&p| p as f64 > w1)
        .collect())
}

/// Trace of `X_j` for residues drawn from `seed`; zero is forbidden for every
/// prime under `Θ̂`.
pub fn martingale_trace(
    y: f64,
    w1: f64,
    w2: f64,
    seed: u64,
    normalization: Normalization,
) -> Result<MartingaleTrace> {
    let a = sample_residues(w2.max(2.0), seed, normalization.forbid_zero())?;
    martingale_trace_with(y, w1, w2, &a, normalization)
}

/// Trace of `X_j` under a given assignment, e.g. one with pinned residues.
pub fn martingale_trace_with(
    y: f64,
    w1: f64,
    w2: f64,
    a: &ResidueAssignment,
    normalization: Normalization,
) -> Result<MartingaleTrace> {
    let steps = step_primes(w1, w2)?;
    let len = window_len(y)?;
    let mut bits = WindowBits::full(len);
    let residue = |p: u64| {
        a.residue(p)
            .ok_or_else(|| invalid(format!("assignment does not cover {p}")))
    };
    for p in primes_upto(w1)? {
        let alpha = residue(p)?;
        if len > 0 {
            bits.strike_class(p, alpha);
        }
    }
    let mut s = if len == 0 { 0 } else { bits.count() };
    let mut cutoffs = vec![w1];
    let mut survivors = vec![s];
    let mut values = vec![s as f64];
    let mut norm = 1.0f64;
    for &p in &steps {
        let alpha = residue(p)?;
        if len > 0 {
            s -= bits.strike_class(p, alpha);
        }
        norm *= normalization.factor(p);
        cutoffs.push(p as f64);
        survivors.push(s);
        values.push(s as f64 / norm);
    }
    Ok(MartingaleTrace {
        y,
        w1,
        w2,
        normalization,
        cutoffs,
        survivors,
        values,
    })
}

/// `Σ_α S_next(α)` over the allowed residues `α` of `p`, and the number of
/// allowed residues, for the survivor set `survivors ⊂ [1, ⌊y⌋]`.
pub fn next_step_survivor_sum(survivors: &[u64], p: u64, forbid_zero: bool) -> (u64, u64) {
    let mut hits = vec![0u64; p as usize];
    for &n in survivors {
        hits[(n % p) as usize] += 1;
    }
    let s = survivors.len() as u64;
    let first = u64::from(forbid_zero);
    let total = (first..p).map(|a| s - hits[a as usize]).sum();
    (total, p - first)
}

/// Shape `(log p_prev / log w1) · (y/p) / min(log p_prev, log(y/p))` of the
/// upper-sieve increment bound at a step to `p <= y/2`, before its implied constant.
pub fn upper_sieve_increment_shape(y: f64, w1: f64, p_prev: f64, p: f64) -> Result<f64> {
    if !(p <= y / 2.0) || !(w1 > 1.0) || !(p_prev > 1.0) {
        return Err(invalid(
            "the upper-sieve shape needs p <= y/2 and w1, p_prev > 1",
        ));
    }
    let m = p_prev.ln().min((y / p).ln());
    Ok(p_prev.ln() / w1.ln() * (y / p) / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_models::{sift_window, ResidueAssignment};

    #[test]
    fn first_value_is_initial_count() {
        let t = martingale_trace(200.0, 5.0, 50.0, 3, Normalization::Theta).unwrap();
        let a = sample_residues(50.0, 3, false).unwrap();
        assert_eq!(t.survivors[0], sift_window(200.0, 5.0, &a).unwrap().count);
        assert_eq!(t.values[0], t.survivors[0] as f64);
        assert_eq!(t.cutoffs[1], 7.0);
        assert_eq!(*t.cutoffs.last().unwrap(), 47.0);
    }

    #[test]
    fn one_step_average_is_exact() {
        // theta normalization: Σ_α S_next(α) = (p - 1) S
        let a = sample_residues(100.0, 8, false).unwrap();
        let w = sift_window(300.0, 29.0, &a).unwrap();
        for p in [31u64, 37, 101, 307] {
            let (sum, n) = next_step_survivor_sum(&w.survivors, p, false);
            assert_eq!(n, p);
            assert_eq!(sum, (p - 1) * w.count);
        }
    }

    #[test]
    fn analytic_bounds_hold_along_traces() {
        for norm in [Normalization::Theta, Normalization::ThetaHat] {
            let b = IncrementBounds::analytic(100.0, 3.0, 200.0, norm).unwrap();
            for seed in 0..200 {
                let t = martingale_trace(100.0, 3.0, 200.0, seed, norm).unwrap();
                for (j, inc) in t.increments().iter().enumerate() {
                    assert!(inc.abs() <= b.c[j] * (1.0 + 1e-12), "{norm:?} step {j}");
                }
            }
        }
    }

    #[test]
    fn pinned_prefix_is_respected() {
        let mut a = sample_residues(60.0, 1, false).unwrap();
        a.fix(2, 1).unwrap();
        let t = martingale_trace_with(20.0, 2.0, 60.0, &a, Normalization::Theta).unwrap();
        assert_eq!(t.survivors[0], 10);
        let b = ResidueAssignment::from_residues(vec![(2, 0)], false).unwrap();
        assert!(martingale_trace_with(20.0, 2.0, 3.0, &b, Normalization::Theta).is_err());
    }
}
