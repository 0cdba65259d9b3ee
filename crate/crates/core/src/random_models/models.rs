use rayon::prelude::*;

use super::keyed_residue;
use crate::error::{invalid, Result};
use crate::keyed::{derive, tag, unit_f64};
use crate::params::{cutoff_index, table};
use crate::prime_engine::{IntegerSet, SetKind};

const SEGMENT: u64 = 1 << 18;

/// First integer of the model `ℛ`: the least integer above `e^2`.
pub const BFT_FIRST: u64 = 8;

fn segments(lo: u64, hi_inclusive: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut s = lo;
    while s <= hi_inclusive {
        let e = (s + SEGMENT).min(hi_inclusive + 1);
        out.push((s, e));
        s = e;
    }
    out
}

/// Cramér's model on `[3, x_max]`: each `n` included with probability `1/log n`.
pub fn cramer_sample(x_max: u64, seed: u64) -> Result<IntegerSet> {
    if x_max < 3 {
        return Err(invalid("x_max must be at least 3"));
    }
    let key = derive(seed, tag::CRAMER);
    let parts: Vec<Vec<u64>> = segments(3, x_max)
        .into_par_iter()
        .map(|(s, e)| {
            (s..e)
                .filter(|&n| unit_f64(derive(key, n)) < 1.0 / (n as f64).ln())
                .collect()
        })
        .collect();
    Ok(IntegerSet::from_sorted_unchecked(
        SetKind::ModelSample,
        parts.concat(),
        0,
        x_max,
    ))
}

/// Does the cutoff `z(n)` reach the `i`-th prime of the shared table?
fn reaches(n: u64, i: usize) -> Result<bool> {
    Ok(cutoff_index((n as f64).ln())?.is_some_and(|j| j >= i))
}

/// Smallest `n >= 8` with `z(n) >= p`, i.e. the first integer at which the
/// prime `p` takes part in sieving `ℛ`.
pub fn bft_start(p: u64) -> Result<u64> {
    let primes = &table().primes;
    let i = primes
        .binary_search(&p)
        .map_err(|_| invalid(format!("{p} is not a tabulated prime")))?;
    if reaches(BFT_FIRST, i)? {
        return Ok(BFT_FIRST);
    }
    let mut lo = BFT_FIRST;
    let mut hi = BFT_FIRST * 2;
    while !reaches(hi, i)? {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| invalid(format!("z(n) never reaches {p} in u64")))?;
    }
    // reaches(lo) is false, reaches(hi) is true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid, i)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The model `ℛ` on `[8, x_max]`: `n` survives when `n ≢ α_p (mod p)` for every
/// prime `p <= z(n)`, with one residue assignment shared by all `n`.
pub fn bft_sample(x_max: u64, seed: u64) -> Result<IntegerSet> {
    if x_max < BFT_FIRST {
        return Err(invalid(format!("x_max must be at least {BFT_FIRST}")));
    }
    let top = cutoff_index((x_max as f64).ln())?.expect("z(8) = 2");
    let primes = &table().primes[..=top];
    let sieving: Vec<(u64, u64, u64)> = primes
        .iter()
        .map(|&p| Ok((p, keyed_residue(seed, p, false), bft_start(p)?)))
        .collect::<Result<_>>()?;
    let parts: Vec<Vec<u64>> = segments(BFT_FIRST, x_max)
        .into_par_iter()
        .map(|(s, e)| {
            let mut alive = vec![true; (e - s) as usize];
            for &(p, alpha, start) in &sieving {
                if start >= e {
                    continue;
                }
                let from = s.max(start);
                // first n >= from with n ≡ alpha (mod p)
                let mut n = from + (alpha + p - from % p) % p;
                while n < e {
                    alive[(n - s) as usize] = false;
                    n += p;
                }
            }
            alive
                .iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .map(|(i, _)| s + i as u64)
                .collect()
        })
        .collect();
    Ok(IntegerSet::from_sorted_unchecked(
        SetKind::ModelSample,
        parts.concat(),
        0,
        x_max,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::sieve_cutoff_from_log;

    #[test]
    fn starts_follow_the_cutoff() {
        assert_eq!(bft_start(2).unwrap(), 8);
        // z(n) >= 3 once log n >= 3
        assert_eq!(bft_start(3).unwrap(), 21);
        for p in [5u64, 7, 11, 101] {
            let s = bft_start(p).unwrap();
            assert!(sieve_cutoff_from_log((s as f64).ln()).unwrap() >= p);
            assert!(sieve_cutoff_from_log(((s - 1) as f64).ln()).unwrap() < p);
        }
    }

    #[test]
    fn bft_replays_definition() {
        let x = 200_000u64;
        let seed = 42;
        let r = bft_sample(x, seed).unwrap();
        for n in (BFT_FIRST..=x).step_by(997).chain(BFT_FIRST..200) {
            let z = sieve_cutoff_from_log((n as f64).ln()).unwrap();
            let survives = table()
                .primes
                .iter()
                .take_while(|&&p| p <= z)
                .all(|&p| n % p != keyed_residue(seed, p, false));
            assert_eq!(r.contains(n), survives, "n = {n}");
        }
    }

    #[test]
    fn cramer_small_values() {
        let c = cramer_sample(1000, 3).unwrap();
        assert!(c.elements().iter().all(|&n| n >= 3));
        assert_eq!(c, cramer_sample(1000, 3).unwrap());
        assert_ne!(c, cramer_sample(1000, 4).unwrap());
    }
}
