//! Exact Bonferroni coefficients and truncated inclusion-exclusion counts.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::prime_engine::IntegerSet;

/// Largest `u`, `k`, `K` accepted by [`bonferroni_check`].
pub const CHECK_BOUND: u64 = 200;

/// Subset-count budget for the truncated counts.
pub const SUBSET_CAP: u128 = 10_000_000;

/// `C(n, r)`, zero for `r > n` and for negative `n`.
pub fn binomial(n: i64, r: u64) -> BigInt {
    if n < 0 || r > n as u64 {
        return BigInt::zero();
    }
    let r = r.min(n as u64 - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc *= n as u64 - i;
        acc /= i + 1;
    }
    acc
}

/// `δ_K(u, k) = Σ_{ℓ=k}^{K} (-1)^{ℓ-k} C(ℓ, k) C(u, ℓ)`.
pub fn delta_k(u: u64, k: u64, big_k: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for l in k..=big_k.min(u) {
        let term = binomial(l as i64, k) * binomial(u as i64, l);
        if (l - k) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `δ(u, k)`: 1 if `u = k`, else 0.
pub fn delta(u: u64, k: u64) -> BigInt {
    BigInt::from((u == k) as u8)
}

/// `δ(u, k) - δ_K(u, k)` in closed form: `(-1)^{K-k+1} C(u, k) C(u-k-1, K-k)`.
pub fn delta_remainder(u: u64, k: u64, big_k: u64) -> BigInt {
    if big_k < k {
        return delta(u, k);
    }
    let r = binomial(u as i64, k) * binomial(u as i64 - k as i64 - 1, big_k - k);
    if (big_k - k) % 2 == 0 {
        -r
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BonferroniFailure {
    /// `K ≡ k (mod 2)` but `δ > δ_K`.
    UpperParity,
    /// `K ≢ k (mod 2)` but `δ < δ_K`.
    LowerParity,
    /// `δ ≠ δ_K + remainder`.
    Remainder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BonferroniViolation {
    pub u: u64,
    pub k: u64,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub failure: BonferroniFailure,
    /// Decimal strings, exact.
    pub delta: String,
    pub delta_k: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BonferroniReport {
    pub u_max: u64,
    pub k_max: u64,
    #[serde(rename = "K_max")]
    pub big_k_max: u64,
    /// Triples `(u, k, K)` with `k <= K` examined.
    pub checked: u64,
    pub violations: Vec<BonferroniViolation>,
}

impl BonferroniReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exhaustively checks the parity inequalities and the remainder identity
/// for `0 <= u <= u_max`, `0 <= k <= min(k_max, K)`, `K <= K_max`.
pub fn bonferroni_check(u_max: u64, k_max: u64, big_k_max: u64) -> Result<BonferroniReport> {
    if u_max > CHECK_BOUND || k_max > CHECK_BOUND || big_k_max > CHECK_BOUND {
        return Err(invalid(format!(
            "check bounds must not exceed {CHECK_BOUND}"
        )));
    }
    let per_u: Vec<(u64, Vec<BonferroniViolation>)> = (0..=u_max)
        .into_par_iter()
        .map(|u| {
            let mut checked = 0;
            let mut bad = Vec::new();
            for k in 0..=k_max.min(big_k_max) {
                let exact = delta(u, k);
                // δ_K accumulated term by term as K grows
                let mut partial = BigInt::zero();
                for big_k in k..=big_k_max {
                    let term = binomial(big_k as i64, k) * binomial(u as i64, big_k);
                    if (big_k - k) % 2 == 0 {
                        partial += term;
                    } else {
                        partial -= term;
                    }
                    checked += 1;
                    let mut record = |failure| {
                        bad.push(BonferroniViolation {
                            u,
                            k,
                            big_k,
                            failure,
                            delta: exact.to_string(),
                            delta_k: partial.to_string(),
                        })
                    };
                    if (big_k - k) % 2 == 0 {
                        if exact > partial {
                            record(BonferroniFailure::UpperParity);
                        }
                    } else if exact < partial {
                        record(BonferroniFailure::LowerParity);
                    }
                    if exact != &partial + delta_remainder(u, k, big_k) {
                        record(BonferroniFailure::Remainder);
                    }
                }
            }
            (checked, bad)
        })
        .collect();
    let mut report = BonferroniReport {
        u_max,
        k_max,
        big_k_max,
        checked: 0,
        violations: Vec::new(),
    };
    for (c, v) in per_u {
        report.checked += c;
        report.violations.extend(v);
    }
    Ok(report)
}

/// Integer range `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfOpen {
    pub lo: u64,
    pub hi: u64,
}

impl HalfOpen {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(LabError::ReversedRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        Ok(HalfOpen { lo, hi })
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// Histogram of `ν(n) = |{h ∈ Ω : n + h ∈ A}|` over `n ∈ range`, optionally
/// restricted to `n ∈ A`. Entry `u` counts the `n` with `ν(n) = u`.
pub fn nu_histogram(
    set: &IntegerSet,
    range: HalfOpen,
    omega: &[u64],
    members_only: bool,
) -> Result<Vec<u64>> {
    let mut omega = omega.to_vec();
    omega.sort_unstable();
    omega.dedup();
    let reach = omega.last().copied().unwrap_or(0);
    set.require_prefix(range.hi.saturating_add(reach))?;
    const BLOCK: u64 = 1 << 14;
    let blocks = range.len().div_ceil(BLOCK);
    let width = omega.len() + 1;
    let hist = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut h = vec![0u64; width];
            let start = range.lo + 1 + b * BLOCK;
            let end = (start + BLOCK - 1).min(range.hi);
            for n in start..=end {
                if members_only && !set.contains(n) {
                    continue;
                }
                let nu = omega.iter().filter(|&&o| set.contains(n + o)).count();
                h[nu] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

fn check_budget(omega_len: usize, big_k: u64) -> Result<()> {
    let terms = binomial(omega_len as i64, big_k);
    if terms > BigInt::from(SUBSET_CAP) {
        return Err(LabError::EnumerationCap {
            requested: u128::try_from(terms).unwrap_or(u128::MAX),
            cap: SUBSET_CAP,
        });
    }
    Ok(())
}

fn aggregate(hist: &[u64], k: u64, big_k: u64) -> BigInt {
    hist.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(u, &c)| delta_k(u as u64, k, big_k) * c)
        .sum()
}

/// `U_K` for `ν` over offsets `Ω`, computed as `Σ_n δ_K(ν(n), k)`.
pub fn truncated_count_u(
    set: &IntegerSet,
    range: HalfOpen,
    omega: &[u64],
    k: u64,
    big_k: u64,
) -> Result<BigInt> {
    if big_k < k {
        return Err(invalid(format!("need K >= k, got K = {big_k}, k = {k}")));
    }
    check_budget(omega.len(), big_k)?;
    Ok(aggregate(
        &nu_histogram(set, range, omega, false)?,
        k,
        big_k,
    ))
}

/// `T = |{n ∈ range : ν(n) = k}|`, the count `U_K` approximates.
pub fn exact_count_t(set: &IntegerSet, range: HalfOpen, omega: &[u64], k: u64) -> Result<u64> {
    let hist = nu_histogram(set, range, omega, false)?;
    Ok(hist.get(k as usize).copied().unwrap_or(0))
}

/// `U'_K`: the fixed-point variant with `0` always in the tuple, i.e.
/// `Σ_{n ∈ range ∩ A} δ_K(ν(n), 0)` over `Ω = [1, y]`.
pub fn truncated_count_uprime(
    set: &IntegerSet,
    range: HalfOpen,
    y: u64,
    big_k: u64,
) -> Result<BigInt> {
    check_budget(y as usize, big_k)?;
    let omega: Vec<u64> = (1..=y).collect();
    Ok(aggregate(
        &nu_histogram(set, range, &omega, true)?,
        0,
        big_k,
    ))
}

/// Members `n ∈ range ∩ A` with no member in `[n+1, n+y]`.
pub fn fixed_point_count_t(set: &IntegerSet, range: HalfOpen, y: u64) -> Result<u64> {
    let omega: Vec<u64> = (1..=y).collect();
    Ok(nu_histogram(set, range, &omega, true)?[0])
}

/// `T` lies between `U_K` and `U_{K+1}`, in the order fixed by the parity
/// of `K - k`.
pub fn sandwiches(t: u64, u_k: &BigInt, u_next: &BigInt, k: u64, big_k: u64) -> bool {
    let t = BigInt::from(t);
    let (upper, lower) = if (big_k - k) % 2 == 0 {
        (u_k, u_next)
    } else {
        (u_next, u_k)
    };
    lower <= &t && &t <= upper
}
