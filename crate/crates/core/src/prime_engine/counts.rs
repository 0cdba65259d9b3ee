//! Gap and window statistics of integer sets.
//!
//! A window of real length `y` starting after `n` is the integer range
//! `[n+1, n+floor(y)]`; it is empty when `y < 1`. Real `x` bounds are read as
//! `floor(x)`.

use serde::{Deserialize, Serialize};

use super::set::IntegerSet;
use crate::error::{invalid, Result};

/// Number of integers in a window of real length `y`.
pub fn window_len(y: f64) -> Result<u64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(invalid(format!(
            "window length must be a finite non-negative real, got {y}"
        )));
    }
    Ok(y.floor() as u64)
}

pub(crate) fn floor_x(x: f64) -> Result<u64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!(
            "x must be a finite non-negative real, got {x}"
        )));
    }
    Ok(x.floor() as u64)
}

/// `M_A(x; y)`: members `n <= x` of `A` followed by no member in `[n+1, n+y]`.
pub fn gap_count_m(set: &IntegerSet, x: f64, y: f64) -> Result<u64> {
    let xf = floor_x(x)?;
    let w = window_len(y)?;
    set.require_prefix(xf.saturating_add(w))?;
    let e = set.elements();
    let upto = set.count_up_to(xf);
    let mut count = 0u64;
    for i in 0..upto {
        let isolated = match e.get(i + 1) {
            Some(&next) => next - e[i] > w,
            None => true,
        };
        if isolated {
            count += 1;
        }
    }
    Ok(count)
}

/// Histogram of `|[n+1, n+y] ∩ A|` over `1 <= n <= x`; entry `k` is
/// `N_A(x; y, k)` and the vector has `floor(y) + 1` entries.
pub fn interval_histogram(set: &IntegerSet, x: f64, y: f64) -> Result<Vec<u64>> {
    let xf = floor_x(x)?;
    let w = window_len(y)?;
    set.require_prefix(xf.saturating_add(w))?;
    let mut hist = vec![0u64; w as usize + 1];
    if xf == 0 {
        return Ok(hist);
    }
    let e = set.elements();
    // members in [n+1, n+w] are e[lo..hi]
    let mut lo = e.partition_point(|&v| v < 2);
    let mut hi = e.partition_point(|&v| v <= 1 + w);
    for n in 1..=xf {
        while lo < e.len() && e[lo] < n + 1 {
            lo += 1;
        }
        while hi < e.len() && e[hi] <= n + w {
            hi += 1;
        }
        hist[hi - lo] += 1;
    }
    Ok(hist)
}

/// `N_A(x; y, k)`.
pub fn interval_count_n(set: &IntegerSet, x: f64, y: f64, k: u64) -> Result<u64> {
    let hist = interval_histogram(set, x, y)?;
    Ok(hist.get(k as usize).copied().unwrap_or(0))
}

/// `M_A(x; λ log x) · log x / (x e^{-λ})`.
pub fn tail_ratio(set: &IntegerSet, x: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(x > 1.0) {
        return Err(invalid(format!("x must exceed 1, got {x}")));
    }
    let lx = x.ln();
    let m = gap_count_m(set, x, lambda * lx)?;
    Ok(m as f64 * lx / (x * (-lambda).exp()))
}

/// `|{1 <= n <= x : n + h ∈ A for all h ∈ offsets}|`.
pub fn tuple_count(set: &IntegerSet, x: f64, offsets: &[u64]) -> Result<u64> {
    let xf = floor_x(x)?;
    let Some(&h0) = offsets.iter().min() else {
        return Ok(0);
    };
    let hmax = *offsets.iter().max().unwrap();
    set.require_prefix(xf.saturating_add(hmax))?;
    let mut count = 0u64;
    // n = e - h0 must satisfy 1 <= n <= x
    for &e in set.range(h0, xf + h0) {
        let n = e - h0;
        if offsets.iter().all(|&h| h == h0 || set.contains(n + h)) {
            count += 1;
        }
    }
    Ok(count)
}

/// Consecutive-gap histogram with bins measured in units of `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapHistogram {
    pub x: f64,
    /// Bin edges in units of `log x`, strictly increasing.
    pub edges: Vec<f64>,
    /// `counts[i]` counts normalized gaps in `[edges[i], edges[i+1])`; the last
    /// entry collects everything at or above the final edge.
    pub counts: Vec<u64>,
    /// Members of the set that are `<= x`.
    pub total: u64,
}

impl GapHistogram {
    /// Gaps `next - n` for members `n <= x` whose successor is known.
    pub fn build(set: &IntegerSet, x: f64, edges: Vec<f64>) -> Result<Self> {
        let xf = floor_x(x)?;
        if edges.is_empty() || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(
                "bin edges must be non-empty and strictly increasing",
            ));
        }
        if !(x > 1.0) {
            return Err(invalid("x must exceed 1"));
        }
        let lx = x.ln();
        let e = set.elements();
        let upto = set.count_up_to(xf);
        let mut counts = vec![0u64; edges.len()];
        for i in 0..upto {
            let Some(&next) = e.get(i + 1) else { break };
            let g = (next - e[i]) as f64 / lx;
            if g < edges[0] {
                continue;
            }
            let bin = edges.partition_point(|&edge| edge <= g) - 1;
            counts[bin] += 1;
        }
        Ok(GapHistogram {
            x,
            edges,
            counts,
            total: upto as u64,
        })
    }

    pub fn counted_gaps(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime_engine::primes_in;

    #[test]
    fn empty_set_has_no_gaps() {
        assert_eq!(gap_count_m(&IntegerSet::empty(), 100.0, 5.0).unwrap(), 0);
    }

    #[test]
    fn primes_to_100_window_7() {
        let p = primes_in(0, 200).unwrap();
        assert_eq!(gap_count_m(&p, 100.0, 7.0).unwrap(), 1);
    }

    #[test]
    fn coverage_is_enforced() {
        let p = primes_in(0, 100).unwrap();
        assert!(gap_count_m(&p, 100.0, 7.0).is_err());
        assert!(gap_count_m(&p, 93.0, 7.0).is_ok());
    }

    #[test]
    fn all_integers_always_hit() {
        let all = IntegerSet::explicit((1..=200).collect()).unwrap();
        assert_eq!(interval_count_n(&all, 100.0, 1.0, 0).unwrap(), 0);
        assert_eq!(interval_count_n(&all, 100.0, 1.0, 1).unwrap(), 100);
    }

    #[test]
    fn empty_window_counts_members() {
        let p = primes_in(0, 1000).unwrap();
        assert_eq!(gap_count_m(&p, 1000.0, 0.5).unwrap(), 168);
    }

    #[test]
    fn tuple_count_twins() {
        let p = primes_in(0, 200).unwrap();
        // (3,5) (5,7) (11,13) (17,19) (29,31) (41,43) (59,61) (71,73)
        assert_eq!(tuple_count(&p, 100.0, &[0, 2]).unwrap(), 8);
        assert_eq!(tuple_count(&p, 100.0, &[0, 1]).unwrap(), 1);
        // shifted by two: n = 99 now qualifies through (101, 103)
        assert_eq!(tuple_count(&p, 100.0, &[2, 4]).unwrap(), 9);
    }

    #[test]
    fn histogram_totals() {
        let p = primes_in(0, 100_000).unwrap();
        let h = GapHistogram::build(&p, 50_000.0, vec![0.0, 0.5, 1.0, 2.0]).unwrap();
        assert_eq!(h.total, p.count_up_to(50_000) as u64);
        assert_eq!(h.counted_gaps(), h.total);
    }
}
