use rayon::prelude::*;

use super::set::{IntegerSet, SetKind};
use crate::error::{LabError, Result};

/// Largest sieve bound accepted unless configured otherwise.
pub const DEFAULT_MAX_SIEVE: u64 = 10_000_000_000;

/// Integers per segment.
pub const DEFAULT_SEGMENT: u64 = 1 << 20;

/// Environment variable that lowers (or raises) the sieve cap.
pub const MAX_X_ENV: &str = "SIEVELAB_MAX_X";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_size: u64,
    pub max: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_size: DEFAULT_SEGMENT,
            max: DEFAULT_MAX_SIEVE,
        }
    }
}

impl SieveConfig {
    /// Default configuration with the cap taken from `SIEVELAB_MAX_X` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = SieveConfig::default();
        if let Ok(raw) = std::env::var(MAX_X_ENV) {
            cfg.max = parse_cap(&raw)?;
        }
        Ok(cfg)
    }
}

fn parse_cap(raw: &str) -> Result<u64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 1.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(LabError::InvalidArgument(format!(
            "{MAX_X_ENV}={raw:?} is not a positive integer"
        ))),
    }
}

/// All primes `<= limit` by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(estimate_count(limit));
    let mut i = 2usize;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            if let Some(sq) = i.checked_mul(i) {
                let mut j = sq;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        i += 1;
    }
    out
}

fn estimate_count(limit: u64) -> usize {
    if limit < 17 {
        return 8;
    }
    let l = limit as f64;
    (1.26 * l / l.ln()) as usize + 8
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Primes in `(a, b]` with the default configuration.
pub fn primes_in(a: u64, b: u64) -> Result<IntegerSet> {
    primes_in_with(a, b, &SieveConfig::default())
}

/// Primes in `(a, b]` by a segmented odd-only sieve.
///
/// Segments are sieved in parallel and concatenated in order, so the output
/// does not depend on the segment size or the worker count.
pub fn primes_in_with(a: u64, b: u64, cfg: &SieveConfig) -> Result<IntegerSet> {
    if a > b {
        return Err(LabError::ReversedRange {
            lo: a as f64,
            hi: b as f64,
        });
    }
    if b > cfg.max {
        return Err(LabError::SieveLimit {
            requested: b,
            max: cfg.max,
        });
    }
    if cfg.segment_size < 2 {
        return Err(LabError::InvalidArgument(
            "segment size must be at least 2".into(),
        ));
    }
    let base = primes_up_to(isqrt(b));
    // half-open [lo, hi) in integers: (a, b] = [a+1, b+1)
    let lo = a + 1;
    let hi = b + 1;
    let seg = cfg.segment_size;
    let nseg = (hi - lo).div_ceil(seg);
    let parts: Vec<Vec<u64>> = (0..nseg)
        .into_par_iter()
        .map(|i| {
            let s = lo + i * seg;
            let e = (s + seg).min(hi);
            let mut out = Vec::new();
            sieve_segment(s, e, &base, &mut out);
            out
        })
        .collect();
    let total = parts.iter().map(Vec::len).sum();
    let mut elements = Vec::with_capacity(total);
    for p in parts {
        elements.extend_from_slice(&p);
    }
    Ok(IntegerSet::from_sorted_unchecked(
        SetKind::Primes,
        elements,
        a,
        b,
    ))
}

/// Push the primes in `[lo, hi)` onto `out`. `base` must contain every prime
/// up to `sqrt(hi - 1)`.
fn sieve_segment(lo: u64, hi: u64, base: &[u64], out: &mut Vec<u64>) {
    if lo <= 2 && 2 < hi {
        out.push(2);
    }
    let first_odd = if lo % 2 == 1 { lo } else { lo + 1 };
    if first_odd >= hi {
        return;
    }
    let len = ((hi - first_odd).div_ceil(2)) as usize;
    let mut composite = vec![false; len];
    for &p in base.iter().skip_while(|&&p| p == 2) {
        let sq = p * p;
        if sq >= hi {
            break;
        }
        let mut m = sq.max(first_odd.div_ceil(p) * p);
        if m % 2 == 0 {
            m += p;
        }
        let mut idx = ((m - first_odd) / 2) as usize;
        let step = p as usize;
        while idx < len {
            composite[idx] = true;
            idx += step;
        }
    }
    for (i, &c) in composite.iter().enumerate() {
        if !c {
            let n = first_odd + 2 * i as u64;
            if n > 1 {
                out.push(n);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_range() {
        let s = primes_in(0, 10).unwrap();
        assert_eq!(s.elements(), &[2, 3, 5, 7]);
    }

    #[test]
    fn half_open_endpoints() {
        assert_eq!(primes_in(7, 11).unwrap().elements(), &[11]);
        assert_eq!(primes_in(2, 3).unwrap().elements(), &[3]);
        assert!(primes_in(5, 5).unwrap().is_empty());
        assert!(primes_in(0, 1).unwrap().is_empty());
    }

    #[test]
    fn segment_size_does_not_matter() {
        let reference = primes_up_to(200_000);
        for seg in [2u64, 3, 64, 1000, 65_536] {
            let cfg = SieveConfig {
                segment_size: seg,
                ..SieveConfig::default()
            };
            let s = primes_in_with(0, 200_000, &cfg).unwrap();
            assert_eq!(s.elements(), reference.as_slice(), "segment {seg}");
        }
    }

    #[test]
    fn rejects_above_cap() {
        let cfg = SieveConfig {
            max: 1000,
            ..SieveConfig::default()
        };
        assert!(matches!(
            primes_in_with(0, 1001, &cfg),
            Err(LabError::SieveLimit { .. })
        ));
        assert!(primes_in(0, DEFAULT_MAX_SIEVE + 1).is_err());
    }

    #[test]
    fn reversed_range_rejected() {
        assert!(primes_in(10, 5).is_err());
    }

    #[test]
    fn cap_parsing() {
        assert_eq!(parse_cap("1000").unwrap(), 1000);
        assert_eq!(parse_cap("1e8").unwrap(), 100_000_000);
        assert!(parse_cap("-3").is_err());
        assert!(parse_cap("abc").is_err());
    }

    #[test]
    fn isqrt_exact() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, 99, 100, 101, u32::MAX as u64] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
