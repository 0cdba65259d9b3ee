//! Hardy–Littlewood singular series, Gallagher averages and the pair sum.

use std::io::BufRead;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::keyed::{derive, tag};
use crate::params::{table, TABLE_LIMIT};
use crate::prime_engine::primes_in;
use crate::table::{Cell, Provenance, Table};

/// `∏_{p>2} (1 - 1/(p-1)^2)` doubled.
pub const TWIN_PRIME_CONSTANT: f64 = 1.320_323_631_693_739_1;

/// Largest number of subsets summed in exhaustive mode.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Upper constant in `π(t) <= 1.25506 t / log t`, used for the prime tail beyond the table.
const PI_UPPER: f64 = 1.255_06;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct OffsetTuple {
    offsets: Vec<u64>,
}

impl OffsetTuple {
    pub fn new(mut offsets: Vec<u64>) -> Result<Self> {
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.is_empty() {
            return Err(invalid("offset tuples need at least one element"));
        }
        Ok(OffsetTuple { offsets })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diameter(&self) -> u64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }

    pub fn shifted(&self, c: u64) -> Result<Self> {
        let offsets = self
            .offsets
            .iter()
            .map(|&h| {
                h.checked_add(c)
                    .ok_or_else(|| invalid("shift overflows u64"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OffsetTuple { offsets })
    }

    /// Parse `h1,h2,...`.
    pub fn parse(line: &str) -> Result<Self> {
        let offsets = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| invalid(format!("bad offset {:?}: {e}", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(offsets)
    }

    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.offsets.iter().map(u64::to_string).collect();
        parts.join(",")
    }
}

impl TryFrom<Vec<u64>> for OffsetTuple {
    type Error = LabError;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        OffsetTuple::new(v)
    }
}

impl From<OffsetTuple> for Vec<u64> {
    fn from(t: OffsetTuple) -> Self {
        t.offsets
    }
}

/// Read one comma-separated tuple per line; blank and `#` lines are skipped.
pub fn read_tuples<R: BufRead>(reader: R) -> Result<Vec<OffsetTuple>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(OffsetTuple::parse(t).map_err(|e| LabError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Number of distinct residues of `offsets` modulo `p`.
pub fn residues_mod(tuple: &OffsetTuple, p: u64) -> u64 {
    if p > tuple.diameter() {
        return tuple.len() as u64;
    }
    let mut r: Vec<u64> = tuple.offsets.iter().map(|&h| h % p).collect();
    r.sort_unstable();
    r.dedup();
    r.len() as u64
}

/// `log[(1 - nu/p)(1 - 1/p)^{-k}]`, or `None` when `nu = p`.
fn log_factor(nu: u64, k: u64, p: u64) -> Option<f64> {
    if nu >= p {
        return None;
    }
    let pf = p as f64;
    Some((-(nu as f64) / pf).ln_1p() - k as f64 * (-1.0 / pf).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSeriesValue {
    pub value: f64,
    pub truncation_prime: u64,
    /// Bound on `|true/value - 1|` from the primes above `truncation_prime`.
    pub tail_bound: f64,
    pub is_zero: bool,
    /// Interval certain to contain the full product (up to rounding).
    pub lower: f64,
    pub upper: f64,
}

impl SingularSeriesValue {
    fn zero(truncation_prime: u64) -> Self {
        SingularSeriesValue {
            value: 0.0,
            truncation_prime,
            tail_bound: 0.0,
            is_zero: true,
            lower: 0.0,
            upper: 0.0,
        }
    }

    pub fn converged(&self) -> bool {
        self.tail_bound < 1.0
    }
}

/// Suffix sums of `1/p^2` over the shared prime table.
fn inverse_square_suffix() -> &'static Vec<f64> {
    static SUFFIX: OnceLock<Vec<f64>> = OnceLock::new();
    SUFFIX.get_or_init(|| {
        let primes = &table().primes;
        let mut out = vec![0.0; primes.len() + 1];
        for i in (0..primes.len()).rev() {
            let p = primes[i] as f64;
            out[i] = out[i + 1] + 1.0 / (p * p);
        }
        out
    })
}

/// Enclosure `(nominal, lo, hi)` of `Σ_{p > t} 1/p^2`.
fn prime_inverse_square_tail(t: u64) -> (f64, f64, f64) {
    // beyond B: Σ_{p>B} 1/p^2 <= 2 ∫_B^∞ π(s)/s^3 ds <= 2·1.25506/(B log B)
    let beyond = |b: f64| -> (f64, f64) { (1.0 / (b * b.ln()), 2.0 * PI_UPPER / (b * b.ln())) };
    if t >= TABLE_LIMIT {
        let (nom, hi) = beyond(t as f64);
        return (nom, 0.0, hi);
    }
    let primes = &table().primes;
    let i = primes.partition_point(|&p| p <= t);
    let head = inverse_square_suffix()[i];
    let (nom, hi) = beyond(TABLE_LIMIT as f64);
    (head + nom, head, head + hi)
}

/// Smallest admissible truncation point.
pub fn minimum_truncation(tuple: &OffsetTuple) -> u64 {
    tuple.diameter().max(tuple.len() as u64) + 1
}

pub fn default_truncation(tuple: &OffsetTuple) -> u64 {
    10_000u64.max(tuple.diameter().saturating_mul(10))
}

fn primes_through(limit: u64) -> Result<Vec<u64>> {
    if limit <= TABLE_LIMIT {
        let primes = &table().primes;
        Ok(primes[..primes.partition_point(|&p| p <= limit)].to_vec())
    } else {
        Ok(primes_in(0, limit)?.into_elements())
    }
}

/// Analytic enclosure of `Σ_{p > t} log[(1 - k/p)(1 - 1/p)^{-k}]`
/// as `(nominal, lo, hi)`. Needs `t > k`.
fn tail_log_enclosure(k: u64, t: u64) -> (f64, f64, f64) {
    if k <= 1 {
        return (0.0, 0.0, 0.0);
    }
    let kf = k as f64;
    let pairs = kf * (kf - 1.0) / 2.0;
    let (nom, lo, hi) = prime_inverse_square_tail(t);
    // the series beyond the quadratic term is negative with size at most
    // k^3 / (3 (1 - k/t)) · Σ_{p>t} p^{-3} <= k^3 / (3 (1 - k/t)) / (2 t^2)
    let tf = t as f64;
    let cubic = kf.powi(3) / (3.0 * (1.0 - kf / tf)) / (2.0 * tf * tf);
    (-pairs * nom - cubic / 2.0, -pairs * hi - cubic, -pairs * lo)
}

/// `𝔖(ℋ)` with exact factors for `p <= trunc` and an analytic tail enclosure.
pub fn singular_series(tuple: &OffsetTuple, trunc: u64) -> Result<SingularSeriesValue> {
    let need = minimum_truncation(tuple);
    if trunc < need {
        return Err(LabError::Truncation {
            trunc,
            required: need,
        });
    }
    let k = tuple.len() as u64;
    // inadmissibility only needs p <= k
    for &p in table().primes.iter().take_while(|&&p| p <= k) {
        if residues_mod(tuple, p) == p {
            return Ok(SingularSeriesValue::zero(p));
        }
    }
    let primes = primes_through(trunc)?;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in &primes {
        let term = log_factor(residues_mod(tuple, p), k, p).expect("admissibility checked");
        let s = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - s) + term
        } else {
            (term - s) + sum
        };
        sum = s;
    }
    let head = sum + comp;
    let (nom, lo, hi) = tail_log_enclosure(k, trunc);
    let value = (head + nom).exp();
    let lower = (head + lo).exp();
    let upper = (head + hi).exp();
    let tail_bound = (upper / value - 1.0).max(1.0 - lower / value);
    Ok(SingularSeriesValue {
        value,
        truncation_prime: primes.last().copied().unwrap_or(0),
        tail_bound,
        is_zero: false,
        lower,
        upper,
    })
}

/// [`singular_series`] at the default truncation.
pub fn singular_series_default(tuple: &OffsetTuple) -> Result<SingularSeriesValue> {
    singular_series(tuple, default_truncation(tuple))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AverageMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagherAverage {
    pub y: u64,
    pub k: u64,
    pub ratio: f64,
    /// Zero in exhaustive mode.
    pub stderr: f64,
    pub subsets: u128,
}

pub fn binomial_u128(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Per-subset evaluator for `𝔖` on subsets of `{0..=y}` of size `k`.
struct SubsetSeries {
    k: u64,
    /// Primes `p <= y` (the only ones where residues can collide).
    small: Vec<u64>,
    /// Log of the common factor over `p > y`; `None` when it vanishes.
    common: Option<f64>,
}

impl SubsetSeries {
    fn new(y: u64, k: u64) -> Result<Self> {
        let small = primes_through(y)?;
        // p > y > k - 2 and the full tail start above max(y, k)
        let trunc = default_truncation_for(y, k);
        let mut common = Some(0.0f64);
        for p in primes_through(trunc)?.into_iter().filter(|&p| p > y) {
            common = match (common, log_factor(k, k, p)) {
                (Some(c), Some(f)) => Some(c + f),
                _ => None,
            };
        }
        let common = common.map(|c| c + tail_log_enclosure(k, trunc).0);
        Ok(SubsetSeries { k, small, common })
    }

    fn value(&self, subset: &[u64]) -> f64 {
        let Some(common) = self.common else {
            return 0.0;
        };
        let mut log = common;
        let mut seen = Vec::with_capacity(subset.len());
        for &p in &self.small {
            seen.clear();
            seen.extend(subset.iter().map(|&h| h % p));
            seen.sort_unstable();
            seen.dedup();
            match log_factor(seen.len() as u64, self.k, p) {
                Some(f) => log += f,
                None => return 0.0,
            }
        }
        log.exp()
    }
}

fn default_truncation_for(y: u64, k: u64) -> u64 {
    10_000u64.max(y.saturating_mul(10)).max(k + 1)
}

/// Advance `c` to the next `k`-subset of `{0..=n_max}` in lexicographic order.
fn next_combination(c: &mut [u64], n_max: u64) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n_max - (k - 1 - i) as u64 {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Mean of `𝔖(ℋ)` over the `k`-subsets `ℋ ⊂ {0,…,y}`.
pub fn gallagher_average(y: u64, k: u64, mode: AverageMode) -> Result<GallagherAverage> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if k > y + 1 {
        return Err(invalid(format!("no {k}-subsets of [0, {y}]")));
    }
    let total = binomial_u128(y + 1, k).ok_or_else(|| invalid("binomial overflows"))?;
    let series = SubsetSeries::new(y, k)?;
    match mode {
        AverageMode::Exhaustive => {
            if total > ENUMERATION_CAP {
                return Err(LabError::EnumerationCap {
                    requested: total,
                    cap: ENUMERATION_CAP,
                });
            }
            // one block per smallest element; blocks are summed in order
            let blocks: Vec<f64> = (0..=y + 1 - k)
                .into_par_iter()
                .map(|first| {
                    let mut c: Vec<u64> = (first..first + k).collect();
                    let mut acc = 0.0f64;
                    loop {
                        acc += series.value(&c);
                        if !next_combination(&mut c, y) || c[0] != first {
                            break;
                        }
                    }
                    acc
                })
                .collect();
            let sum: f64 = blocks.iter().sum();
            Ok(GallagherAverage {
                y,
                k,
                ratio: sum / total as f64,
                stderr: 0.0,
                subsets: total,
            })
        }
        AverageMode::Sampled { samples, seed } => {
            if samples < 2 {
                return Err(invalid("sampled mode needs at least two samples"));
            }
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive(derive(seed, tag::TRIAL), i));
                    let mut c: Vec<u64> =
                        rand::seq::index::sample(&mut rng, (y + 1) as usize, k as usize)
                            .into_iter()
                            .map(|v| v as u64)
                            .collect();
                    c.sort_unstable();
                    series.value(&c)
                })
                .collect();
            let n = samples as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(GallagherAverage {
                y,
                k,
                ratio: mean,
                stderr: (var / n).sqrt(),
                subsets: total,
            })
        }
    }
}

/// CSV table `(y, k, ratio, stderr)`.
pub fn averages_table(rows: &[GallagherAverage]) -> Table {
    let provenance = if rows.iter().any(|r| r.stderr > 0.0) {
        Provenance::MonteCarlo
    } else {
        Provenance::Exact
    };
    let mut t = Table::new("gallagher", provenance, &["y", "k", "ratio", "stderr"]);
    for r in rows {
        t.push(vec![
            Cell::from(r.y),
            Cell::from(r.k),
            Cell::from(r.ratio),
            Cell::from(r.stderr),
        ]);
    }
    t
}

/// `𝔖({0,k})` from the closed pair formula.
pub fn pair_series(k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k % 2 == 1 {
        return 0.0;
    }
    let mut m = k;
    while m % 2 == 0 {
        m /= 2;
    }
    let mut factor = 1.0;
    let mut p = 3u64;
    while p * p <= m {
        if m % p == 0 {
            factor *= (p - 1) as f64 / (p - 2) as f64;
            while m % p == 0 {
                m /= p;
            }
        }
        p += 2;
    }
    if m > 1 {
        factor *= (m - 1) as f64 / (m - 2) as f64;
    }
    TWIN_PRIME_CONSTANT * factor
}

/// `Σ_{1<=k<=w} 𝔖({0,k})`.
pub fn pair_series_sum(w: u64) -> f64 {
    (1..=w).map(pair_series).sum()
}
