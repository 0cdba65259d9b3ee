//! Scalar parameters shared by every module: iterated logarithms, the
//! λ thresholds, Mertens products and the random-sieve cutoff `z(t)`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::prime_engine::{primes_in, primes_up_to};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const EXP_GAMMA: f64 = 1.781_072_417_990_198;
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_2;

/// Primes covered by the shared product table.
pub const TABLE_LIMIT: u64 = 10_000_000;

/// Slack allowed when comparing a Mertens partial product with `log t`, so
/// that exact ties such as `t = e^2` resolve to include the prime.
const TIE_SLACK: f64 = 1e-12;

/// Prime list with cumulative logarithms of the inverse Mertens products.
pub(crate) struct MertensTable {
    pub primes: Vec<u64>,
    /// `log_inv[i] = Σ_{j<=i} -log(1 - 1/p_j)`.
    pub log_inv: Vec<f64>,
    /// `log_inv_hat[i] = Σ_{j<=i, p_j>2} -log(1 - 1/(p_j - 1))`.
    pub log_inv_hat: Vec<f64>,
}

impl MertensTable {
    fn build(limit: u64) -> Self {
        let primes = primes_up_to(limit);
        let log_inv = cumulative(primes.iter().map(|&p| -(-1.0 / p as f64).ln_1p()));
        let log_inv_hat = cumulative(primes.iter().map(|&p| {
            if p == 2 {
                0.0
            } else {
                -(-1.0 / (p - 1) as f64).ln_1p()
            }
        }));
        MertensTable {
            primes,
            log_inv,
            log_inv_hat,
        }
    }

    /// Number of tabulated primes `<= z`.
    fn index(&self, z: f64) -> usize {
        self.primes.partition_point(|&p| (p as f64) <= z)
    }
}

/// Neumaier-compensated running sums.
fn cumulative(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::new();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
        out.push(sum + comp);
    }
    out
}

pub(crate) fn table() -> &'static MertensTable {
    static TABLE: OnceLock<MertensTable> = OnceLock::new();
    TABLE.get_or_init(|| MertensTable::build(TABLE_LIMIT))
}

/// `Σ_{a < p <= b} -log(1 - 1/p)` (or the hat variant over `p > 2`).
fn log_inv_range(a: f64, b: f64, hat: bool) -> Result<f64> {
    let t = table();
    let cum = if hat { &t.log_inv_hat } else { &t.log_inv };
    let at = |z: f64| -> f64 {
        let i = t.index(z);
        if i == 0 {
            0.0
        } else {
            cum[i - 1]
        }
    };
    if b <= TABLE_LIMIT as f64 {
        return Ok(at(b) - at(a));
    }
    // beyond the table: sieve the overflow explicitly
    let lo = a.max(TABLE_LIMIT as f64);
    let extra = primes_in(lo.floor() as u64, b.floor() as u64)?;
    let tail: f64 = extra
        .elements()
        .iter()
        .map(|&p| {
            if hat {
                -(-1.0 / (p - 1) as f64).ln_1p()
            } else {
                -(-1.0 / p as f64).ln_1p()
            }
        })
        .sum();
    let head = if a < TABLE_LIMIT as f64 {
        at(TABLE_LIMIT as f64) - at(a)
    } else {
        0.0
    };
    Ok(head + tail)
}

/// `Θ_z = ∏_{p <= z} (1 - 1/p)`; equals 1 for `z < 2`.
pub fn mertens_theta(z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(invalid(format!(
            "z must be finite and non-negative, got {z}"
        )));
    }
    Ok((-log_inv_range(0.0, z, false)?).exp())
}

/// `Θ_{a,b} = ∏_{a<p<=b}(1-1/p)`, or with `hat` the product
/// `∏_{a<p<=b, p>2}(1 - 1/(p-1))`.
pub fn theta_range(a: f64, b: f64, hat: bool) -> Result<f64> {
    if !(a >= 0.0) || !b.is_finite() {
        return Err(invalid("theta_range needs 0 <= a <= b < inf"));
    }
    if a > b {
        return Err(LabError::ReversedRange { lo: a, hi: b });
    }
    Ok((-log_inv_range(a, b, hat)?).exp())
}

/// All three products at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaProducts {
    pub z: f64,
    pub theta: f64,
    pub theta_range: f64,
    pub theta_hat: f64,
}

impl ThetaProducts {
    /// `Θ_z`, `Θ_{a,z}` and `Θ̂_{a,z}`.
    pub fn new(a: f64, z: f64) -> Result<Self> {
        Ok(ThetaProducts {
            z,
            theta: mertens_theta(z)?,
            theta_range: theta_range(a, z, false)?,
            theta_hat: theta_range(a, z, true)?,
        })
    }
}

/// Index of the largest tabulated prime whose inverse Mertens product is at
/// most `log_t`, or `None` if even `p = 2` exceeds it.
pub(crate) fn cutoff_index(log_t: f64) -> Result<Option<usize>> {
    let t = table();
    let bound = log_t.ln() + TIE_SLACK;
    let n = t.log_inv.partition_point(|&l| l <= bound);
    if n == t.log_inv.len() {
        return Err(invalid(format!(
            "z(t) for log t = {log_t} exceeds the prime table (limit {TABLE_LIMIT})"
        )));
    }
    Ok(n.checked_sub(1))
}

/// `z(t)`: the largest prime `z` with `∏_{p<=z}(1-1/p)^{-1} <= log t`.
pub fn sieve_cutoff_z(t: f64) -> Result<u64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    sieve_cutoff_from_log(t.ln())
}

/// `z(t)` given `log t` directly.
pub fn sieve_cutoff_from_log(log_t: f64) -> Result<u64> {
    if !(log_t >= 2.0 - TIE_SLACK) || !log_t.is_finite() {
        return Err(invalid(format!("t must be at least e^2 (log t = {log_t})")));
    }
    let i = cutoff_index(log_t)?.expect("log t >= 2 admits p = 2");
    Ok(table().primes[i])
}

/// `x` through its logarithm, so that scales such as `exp(exp(10))` are representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub ln_x: f64,
}

impl Scale {
    pub fn from_x(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(invalid(format!("x must be positive and finite, got {x}")));
        }
        Ok(Scale { ln_x: x.ln() })
    }

    pub fn from_ln(ln_x: f64) -> Result<Self> {
        if !ln_x.is_finite() {
            return Err(invalid("log x must be finite"));
        }
        Ok(Scale { ln_x })
    }

    /// `x` itself; infinite when it overflows `f64`.
    pub fn x(&self) -> f64 {
        self.ln_x.exp()
    }

    /// `log_j x` with truncation at zero; `log_1 x = max(0, log x)`.
    pub fn iterated_log(&self, j: usize) -> f64 {
        assert!(j >= 1, "iterated logs start at j = 1");
        let mut v = self.ln_x.max(0.0);
        for _ in 1..j {
            v = if v > 0.0 { v.ln().max(0.0) } else { 0.0 };
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub scale: Scale,
    pub lambda: f64,
    /// `λ log x`.
    pub y: f64,
    pub k: u64,
    /// `log_1 x, …, log_4 x`.
    pub iterated_logs: Vec<f64>,
}

impl ExperimentParams {
    pub fn new(scale: Scale, lambda: f64, k: u64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ExperimentParams {
            scale,
            lambda,
            y: lambda * scale.ln_x,
            k,
            iterated_logs: (1..=4).map(|j| scale.iterated_log(j)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaThresholds {
    pub lambda_prime: f64,
    /// `None` when `log_4 x = 0`.
    pub lambda_double_prime: Option<f64>,
    pub lambda_k: f64,
    pub lambda_0: f64,
    /// `k² + floor(800 λ_k)`.
    pub big_k: u64,
    /// `log x_k = (1 - λ_k^{-21/20}) log x`.
    pub ln_x_k: f64,
}

impl LambdaThresholds {
    pub fn x_k(&self) -> f64 {
        self.ln_x_k.exp()
    }

    pub fn require_lambda_double_prime(&self) -> Result<f64> {
        self.lambda_double_prime
            .ok_or_else(|| LabError::Validity("λ'' needs log_4 x > 0".into()))
    }
}

/// `λ', λ'', λ_k, λ_0, 𝒦_k, x_k` at scale `x`.
pub fn thresholds(scale: Scale, lambda: f64, k: u64) -> Result<LambdaThresholds> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let l2 = scale.iterated_log(2);
    let l3 = scale.iterated_log(3);
    let l4 = scale.iterated_log(4);
    if !(l3 > 0.0) {
        return Err(invalid("thresholds need log_3 x > 0 (x > e^e)"));
    }
    let lambda_prime = ((l2 * l3).sqrt() / 7f64.sqrt()).exp();
    let lambda_double_prime = (l4 > 0.0).then(|| (4.0 * l2 * l4 / l3).exp());
    let kf = k as f64;
    // k log(k/λ) is taken as 0 at k = 0
    let klog = if k == 0 { 0.0 } else { kf * (kf / lambda).ln() };
    let floor_term = l2.powi(10);
    let lambda_0 = lambda.max(floor_term);
    let lambda_k = lambda_0.max(kf).max(klog);
    let big_k = k
        .checked_mul(k)
        .and_then(|kk| kk.checked_add((800.0 * lambda_k).floor() as u64))
        .ok_or_else(|| invalid("K_k overflows u64"))?;
    let ln_x_k = (1.0 - lambda_k.powf(-21.0 / 20.0)) * scale.ln_x;
    Ok(LambdaThresholds {
        lambda_prime,
        lambda_double_prime,
        lambda_k,
        lambda_0,
        big_k,
        ln_x_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `λ < 1/sqrt(log x)`.
    BelowRange,
    /// `1/sqrt(log x) <= λ <= λ'`.
    SlowGrowth,
    /// `λ' < λ <= λ''`: covered by neither asymptotic.
    Intermediate,
    /// `λ > λ''`.
    RapidGrowth,
}

/// Place `λ` in the regime table at scale `x`. The rapid regime is further
/// described by the exponent `log λ / log_2 x` (see [`power_exponent`]).
pub fn classify_regime(scale: Scale, lambda: f64) -> Result<Regime> {
    let th = thresholds(scale, lambda, 0)?;
    let lower = scale.ln_x.sqrt().recip();
    Ok(if lambda < lower {
        Regime::BelowRange
    } else if lambda <= th.lambda_prime {
        Regime::SlowGrowth
    } else if th.lambda_double_prime.is_some_and(|l2| lambda > l2) {
        Regime::RapidGrowth
    } else {
        Regime::Intermediate
    })
}

/// `c` with `λ = (log x)^c`.
pub fn power_exponent(scale: Scale, lambda: f64) -> f64 {
    lambda.ln() / scale.iterated_log(2)
}
