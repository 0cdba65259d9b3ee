//! Rough numbers in short intervals: `S(x, y, z)` and its minimum over window
//! positions `S⁻(y, z)`, exactly by a wheel scan or heuristically by
//! optimizing a residue class per prime.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::keyed::{derive, tag, uniform_below};
use crate::params::EXP_NEG_GAMMA;
use crate::random_models::primes_upto;

/// Largest wheel period scanned exactly.
pub const PERIOD_CAP: u64 = 1_000_000_000;

/// `|{x < n <= x + y : every prime factor of n exceeds z}|`.
pub fn interval_count_s(x: u64, y: u64, z: f64) -> Result<u64> {
    if y == 0 {
        return Err(invalid("window length y must be at least 1"));
    }
    let end = x
        .checked_add(y)
        .ok_or_else(|| invalid("x + y overflows u64"))?;
    let mut rough = vec![true; y as usize];
    for p in primes_upto(z)? {
        // first multiple of p above x
        let mut m = (x / p + 1) * p;
        while m <= end {
            rough[(m - x - 1) as usize] = false;
            m += p;
        }
    }
    Ok(rough.iter().filter(|&&r| r).count() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// Window `(x, x + y]`.
    Offset(u64),
    /// Residue `α_p` removed modulo each prime `p <= z`, as `(p, α_p)`.
    Residues(Vec<(u64, u64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumMethod {
    ExactScan,
    TupleSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveExtremum {
    pub y: u64,
    pub z: f64,
    pub value: u64,
    pub witness: Witness,
    pub method: ExtremumMethod,
    pub certified: bool,
}

impl SieveExtremum {
    /// Recount the survivors described by the witness.
    pub fn replay(&self) -> Result<u64> {
        match &self.witness {
            Witness::Offset(x) => interval_count_s(*x, self.y, self.z),
            Witness::Residues(r) => {
                let primes = primes_upto(self.z)?;
                if primes.len() != r.len() || primes.iter().zip(r).any(|(&p, &(q, _))| p != q) {
                    return Err(invalid("witness does not list every prime up to z"));
                }
                Ok(count_with_residues(self.y, r))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("extremum serializes")
    }
}

fn count_with_residues(y: u64, residues: &[(u64, u64)]) -> u64 {
    let mut alive = vec![true; y as usize + 1];
    alive[0] = false;
    for &(p, a) in residues {
        let mut n = if a == 0 { p } else { a };
        while n <= y {
            alive[n as usize] = false;
            n += p;
        }
    }
    alive.iter().filter(|&&b| b).count() as u64
}

/// `∏_{p <= z} p`, or `None` above the cap.
pub fn primorial(z: f64) -> Result<Option<u64>> {
    let mut acc = 1u64;
    for p in primes_upto(z)? {
        match acc.checked_mul(p) {
            Some(v) if v <= PERIOD_CAP => acc = v,
            _ => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Bitset of residues `r mod P` coprime to `P = ∏_{p<=z} p`.
struct Wheel {
    period: u64,
    bits: Vec<u64>,
}

impl Wheel {
    fn new(period: u64, primes: &[u64]) -> Self {
        let mut bits = vec![u64::MAX; period.div_ceil(64) as usize];
        for &p in primes {
            let mut m = 0;
            while m < period {
                bits[(m / 64) as usize] &= !(1u64 << (m % 64));
                m += p;
            }
        }
        Wheel { period, bits }
    }

    #[inline]
    fn coprime(&self, n: u64) -> bool {
        let r = n % self.period;
        (self.bits[(r / 64) as usize] >> (r % 64)) & 1 == 1
    }
}

/// Exact `S⁻(y, z)` by scanning every offset in one wheel period.
pub fn s_minus_exact(y: u64, z: f64) -> Result<SieveExtremum> {
    if y == 0 {
        return Err(invalid("window length y must be at least 1"));
    }
    let primes = primes_upto(z)?;
    let period = primorial(z)?.ok_or_else(|| LabError::EnumerationCap {
        requested: primes.iter().map(|&p| p as u128).product(),
        cap: PERIOD_CAP as u128,
    })?;
    let wheel = Wheel::new(period, &primes);
    let full_periods = y / period;
    let per_period = (0..period).filter(|&r| wheel.coprime(r)).count() as u64;
    let rem = y % period;
    // S(x) = full_periods · φ(P) + |coprime ∩ (x, x + rem]|
    const BLOCK: u64 = 1 << 16;
    let blocks = period.div_ceil(BLOCK);
    let (x, partial) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = ((b + 1) * BLOCK).min(period);
            let mut s = (start + 1..=start + rem)
                .filter(|&n| wheel.coprime(n))
                .count() as u64;
            let mut best = (start, s);
            for x in start + 1..end {
                // slide (x-1, x-1+rem] to (x, x+rem]
                s = s + wheel.coprime(x + rem) as u64 - wheel.coprime(x) as u64;
                if s < best.1 {
                    best = (x, s);
                }
            }
            best
        })
        .reduce(
            || (u64::MAX, u64::MAX),
            |a, b| if (b.1, b.0) < (a.1, a.0) { b } else { a },
        );
    Ok(SieveExtremum {
        y,
        z,
        value: full_periods * per_period + partial,
        witness: Witness::Offset(x),
        method: ExtremumMethod::ExactScan,
        certified: true,
    })
}

/// Local-search state: how many chosen classes cover each `n ∈ [1, y]`.
struct Cover {
    y: u64,
    primes: Vec<u64>,
    alpha: Vec<u64>,
    cover: Vec<u32>,
    survivors: u64,
}

impl Cover {
    fn new(y: u64, primes: Vec<u64>, alpha: Vec<u64>) -> Self {
        let mut c = Cover {
            y,
            cover: vec![0; y as usize + 1],
            survivors: y,
            primes,
            alpha,
        };
        for i in 0..c.primes.len() {
            c.apply(i, 1);
        }
        c
    }

    fn class(&self, p: u64, a: u64) -> impl Iterator<Item = u64> {
        let first = if a == 0 { p } else { a };
        (first..=self.y).step_by(p as usize)
    }

    fn apply(&mut self, i: usize, sign: i32) {
        let (p, a) = (self.primes[i], self.alpha[i]);
        for n in self.class(p, a) {
            let c = &mut self.cover[n as usize];
            if sign > 0 {
                if *c == 0 {
                    self.survivors -= 1;
                }
                *c += 1;
            } else {
                *c -= 1;
                if *c == 0 {
                    self.survivors += 1;
                }
            }
        }
    }

    /// Best residue for prime `i` with the others fixed; ties prefer the
    /// current residue, then the smallest.
    fn best_residue(&mut self, i: usize) -> u64 {
        let p = self.primes[i];
        self.apply(i, -1);
        let mut uncovered = vec![0u64; p as usize];
        for n in 1..=self.y {
            if self.cover[n as usize] == 0 {
                uncovered[(n % p) as usize] += 1;
            }
        }
        let current = self.alpha[i];
        let mut best = current;
        for a in 0..p {
            let (ua, ub) = (uncovered[a as usize], uncovered[best as usize]);
            if ua > ub || (ua == ub && a < best && best != current) {
                best = a;
            }
        }
        self.alpha[i] = best;
        self.apply(i, 1);
        best
    }

    /// Coordinate descent until no single-prime change helps or the budget
    /// (counted in single-prime optimizations) runs out.
    fn descend(&mut self, budget: &mut u64) {
        loop {
            let before = self.survivors;
            for i in 0..self.primes.len() {
                if *budget == 0 {
                    return;
                }
                *budget -= 1;
                self.best_residue(i);
            }
            if self.survivors >= before {
                return;
            }
        }
    }
}

/// Heuristic upper bound for `S⁻(y, z)` in the residue formulation: greedy
/// construction, coordinate descent, then seeded random restarts while the
/// evaluation budget lasts.
pub fn s_minus_search(y: u64, z: f64, budget: u64, seed: u64) -> Result<SieveExtremum> {
    if !(z >= 2.0) {
        return Err(invalid(format!("z must be at least 2, got {z}")));
    }
    if y == 0 {
        return Err(invalid("window length y must be at least 1"));
    }
    let primes = primes_upto(z)?;
    let k = primes.len();

    // greedy: each prime removes a class holding the most remaining survivors
    let mut greedy = Cover::new(y, primes.clone(), vec![0; k]);
    for i in 0..k {
        greedy.apply(i, -1);
    }
    for i in 0..k {
        let p = primes[i];
        let mut counts = vec![0u64; p as usize];
        for n in 1..=y {
            if greedy.cover[n as usize] == 0 {
                counts[(n % p) as usize] += 1;
            }
        }
        let mut best = 0;
        for a in 1..p {
            if counts[a as usize] > counts[best as usize] {
                best = a;
            }
        }
        greedy.alpha[i] = best;
        greedy.apply(i, 1);
    }
    let mut left = budget;
    greedy.descend(&mut left);
    let mut best = (greedy.survivors, greedy.alpha.clone());

    let restart_key = derive(seed, tag::TRIAL);
    let mut restart = 0u64;
    while left > 0 {
        let key = derive(restart_key, restart);
        let alpha = primes
            .iter()
            .map(|&p| uniform_below(derive(key, p), p))
            .collect();
        let mut c = Cover::new(y, primes.clone(), alpha);
        c.descend(&mut left);
        if c.survivors < best.0 {
            best = (c.survivors, c.alpha.clone());
        }
        restart += 1;
    }
    Ok(SieveExtremum {
        y,
        z,
        value: best.0,
        witness: Witness::Residues(primes.into_iter().zip(best.1).collect()),
        method: ExtremumMethod::TupleSearch,
        certified: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum FHatMethod {
    Exact,
    Search { budget: u64, seed: u64 },
}

/// Finite-scale proxy `S⁻(⌊z^v⌋, z) / (e^{-γ} z^v / log z)` for the limits
/// defining `f⁺` and `f⁻`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FHatEstimate {
    pub v: f64,
    pub z: f64,
    pub y: u64,
    pub extremum: SieveExtremum,
    pub ratio: f64,
    /// Always `"proxy"`.
    pub label: String,
}

pub fn f_hat_estimate(v: f64, z: f64, method: FHatMethod) -> Result<FHatEstimate> {
    if !(v > 1.0) || !(z >= 2.0) {
        return Err(invalid(format!(
            "need v > 1 and z >= 2, got v = {v}, z = {z}"
        )));
    }
    let zv = z.powf(v);
    if !zv.is_finite() || zv >= u64::MAX as f64 {
        return Err(invalid(format!("z^v = {zv} is not representable")));
    }
    let y = zv.floor() as u64;
    let extremum = match method {
        FHatMethod::Exact => s_minus_exact(y, z)?,
        FHatMethod::Search { budget, seed } => s_minus_search(y, z, budget, seed)?,
    };
    let ratio = extremum.value as f64 / (EXP_NEG_GAMMA * zv / z.ln());
    Ok(FHatEstimate {
        v,
        z,
        y,
        extremum,
        ratio,
        label: "proxy".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(interval_count_s(0, 30, 5.0).unwrap(), 8);
        assert_eq!(interval_count_s(0, 10, 3.0).unwrap(), 3);
        for x in [1u64, 7, 29, 1000, 123_456_789] {
            assert_eq!(interval_count_s(x, 30, 5.0).unwrap(), 8);
        }
    }

    #[test]
    fn exact_small() {
        let e = s_minus_exact(10, 3.0).unwrap();
        assert_eq!(e.value, 3);
        assert!(e.certified);
        assert_eq!(e.replay().unwrap(), 3);
        // multiple of the period: constant count
        assert_eq!(s_minus_exact(60, 5.0).unwrap().value, 16);
    }

    #[test]
    fn search_replays() {
        let s = s_minus_search(40, 7.0, 500, 1).unwrap();
        assert_eq!(s.replay().unwrap(), s.value);
        assert!(!s.certified);
        assert!(s.value >= s_minus_exact(40, 7.0).unwrap().value);
    }

    #[test]
    fn period_cap() {
        assert!(primorial(29.0).unwrap().is_none());
        assert_eq!(primorial(23.0).unwrap(), Some(223_092_870));
        assert!(matches!(
            s_minus_exact(10, 29.0),
            Err(LabError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn json_report() {
        let e = s_minus_exact(10, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["method"], "exact-scan");
        assert_eq!(v["certified"], true);
        let Witness::Offset(x) = e.witness else {
            panic!()
        };
        assert_eq!(v["witness"]["offset"], x);
    }
}
