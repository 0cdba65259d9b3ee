//! Azuma-type tail bounds and Monte Carlo checks against simulated
//! martingales, including the sieve traces of [`crate::random_models`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::keyed::{derive, tag, unit_f64};
use crate::random_models::{martingale_trace, trial_seed, IncrementBounds, Normalization};

/// Increment bounds `c_i` and drift allowances `d_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementProfile {
    c: Vec<f64>,
    d: Vec<f64>,
}

impl IncrementProfile {
    pub fn new(c: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if c.len() != d.len() {
            return Err(invalid(format!(
                "profile lengths differ: {} increments, {} drifts",
                c.len(),
                d.len()
            )));
        }
        if c.iter().chain(&d).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("profile entries must be finite and non-negative"));
        }
        Ok(IncrementProfile { c, d })
    }

    /// Profile with every `d_i = 0`.
    pub fn driftless(c: Vec<f64>) -> Result<Self> {
        let d = vec![0.0; c.len()];
        Self::new(c, d)
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn sum_c_squared(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum()
    }

    pub fn sum_d(&self) -> f64 {
        self.d.iter().sum()
    }
}

impl From<IncrementBounds> for IncrementProfile {
    fn from(b: IncrementBounds) -> Self {
        IncrementProfile { c: b.c, d: b.d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sided {
    One,
    Two,
}

/// `exp(-ε² / (2 Σ c_i²))`, doubled when two-sided. Not clamped to 1.
pub fn azuma_bound(eps: f64, profile: &IncrementProfile, sided: Sided) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(invalid(format!("eps must be non-negative, got {eps}")));
    }
    if profile.d.iter().any(|&d| d != 0.0) {
        return Err(invalid(
            "profile has nonzero drift; use the generalized bound",
        ));
    }
    let one = gaussian_tail(eps, 2.0 * profile.sum_c_squared());
    Ok(match sided {
        Sided::One => one,
        Sided::Two => 2.0 * one,
    })
}

/// `2 exp(-t² / (8 Σ c_i²))`, valid for `t > 2 Σ d_i`. Not clamped to 1.
pub fn generalized_azuma_bound(t: f64, profile: &IncrementProfile) -> Result<f64> {
    let floor = 2.0 * profile.sum_d();
    if !(t > floor) {
        return Err(invalid(format!(
            "generalized bound needs t > 2 Σ d = {floor}, got {t}"
        )));
    }
    Ok(2.0 * gaussian_tail(t, 8.0 * profile.sum_c_squared()))
}

fn gaussian_tail(t: f64, denom: f64) -> f64 {
    if denom == 0.0 {
        // no movement possible: any positive deviation has probability zero
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    (-t * t / denom).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceProfile {
    /// Worst-case bounds valid for every residue choice.
    Analytic,
    /// `c_i` = largest observed `|X_{i+1} - X_i|` over the trials.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// `±1` steps with equal probability.
    FairWalk { steps: usize },
    /// `+1` with probability `(1 + drift) / 2`, else `-1`; mean step `drift`.
    DriftedWalk { steps: usize, drift: f64 },
    /// Sieve martingale between `w1` and `w2` on a window of length `y`.
    SieveTrace {
        y: f64,
        w1: f64,
        w2: f64,
        normalization: Normalization,
        profile: TraceProfile,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    AzumaTwoSided,
    GeneralizedAzuma,
}

/// Outcome of [`empirical_tail_check`] for the event `|X_n - X_0| >= t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub generator: Generator,
    pub threshold: f64,
    pub trials: u64,
    pub seed: u64,
    pub hits: u64,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub stderr: f64,
    pub bound: f64,
    pub bound_kind: BoundKind,
    pub sum_c_squared: f64,
    pub sum_d: f64,
    /// `frequency > bound + 5 stderr`.
    pub violation: bool,
}

impl TailReport {
    pub fn verdict(&self) -> &'static str {
        if self.violation {
            "violation"
        } else {
            "consistent"
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["verdict"] = self.verdict().into();
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

fn walk_change(key: u64, steps: usize, up_prob: f64) -> f64 {
    (0..steps as u64)
        .map(|i| {
            if unit_f64(derive(key, i)) < up_prob {
                1.0
            } else {
                -1.0
            }
        })
        .sum()
}

/// Simulates `trials` independent sequences and compares the frequency of
/// `|X_n - X_0| >= t` with the matching bound.
pub fn empirical_tail_check(
    generator: Generator,
    t: f64,
    trials: u64,
    seed: u64,
) -> Result<TailReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let walk_key = derive(seed, tag::WALK);
    let (changes, profile, kind) = match generator {
        Generator::FairWalk { steps } => {
            let changes: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|i| walk_change(derive(walk_key, i), steps, 0.5))
                .collect();
            let profile = IncrementProfile::driftless(vec![1.0; steps])?;
            (changes, profile, BoundKind::AzumaTwoSided)
        }
        Generator::DriftedWalk { steps, drift } => {
            if !(0.0..=1.0).contains(&drift) {
                return Err(invalid(format!("drift must lie in [0, 1], got {drift}")));
            }
            let changes: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|i| walk_change(derive(walk_key, i), steps, (1.0 + drift) / 2.0))
                .collect();
            let profile = IncrementProfile::new(vec![1.0; steps], vec![drift; steps])?;
            (changes, profile, BoundKind::GeneralizedAzuma)
        }
        Generator::SieveTrace {
            y,
            w1,
            w2,
            normalization,
            profile,
        } => {
            let analytic = IncrementBounds::analytic(y, w1, w2, normalization)?;
            let traces = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let tr = martingale_trace(y, w1, w2, trial_seed(walk_key, i), normalization)?;
                    let inc = tr.increments();
                    Ok((tr.total_change(), inc))
                })
                .collect::<Result<Vec<_>>>()?;
            let c = match profile {
                TraceProfile::Analytic => analytic.c.clone(),
                TraceProfile::Empirical => {
                    let mut c = vec![0.0f64; analytic.c.len()];
                    for (_, inc) in &traces {
                        for (ci, x) in c.iter_mut().zip(inc) {
                            *ci = ci.max(x.abs());
                        }
                    }
                    c
                }
            };
            let kind = match normalization {
                Normalization::Theta => BoundKind::AzumaTwoSided,
                Normalization::ThetaHat => BoundKind::GeneralizedAzuma,
            };
            let profile = IncrementProfile::new(c, analytic.d)?;
            (traces.into_iter().map(|(x, _)| x).collect(), profile, kind)
        }
    };
    let bound = match kind {
        BoundKind::AzumaTwoSided => azuma_bound(t, &profile, Sided::Two)?,
        BoundKind::GeneralizedAzuma => generalized_azuma_bound(t, &profile)?,
    };
    let hits = changes.iter().filter(|x| x.abs() >= t).count() as u64;
    let frequency = hits as f64 / trials as f64;
    let stderr = (frequency * (1.0 - frequency) / trials as f64).sqrt();
    Ok(TailReport {
        generator,
        threshold: t,
        trials,
        seed,
        hits,
        frequency,
        stderr,
        bound,
        bound_kind: kind,
        sum_c_squared: profile.sum_c_squared(),
        sum_d: profile.sum_d(),
        violation: frequency > bound + 5.0 * stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azuma_examples() {
        let p = IncrementProfile::driftless(vec![1.0; 100]).unwrap();
        assert_eq!(azuma_bound(0.0, &p, Sided::One).unwrap(), 1.0);
        let one = azuma_bound(20.0, &p, Sided::One).unwrap();
        assert!((one - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(azuma_bound(20.0, &p, Sided::Two).unwrap(), 2.0 * one);
    }

    #[test]
    fn generalized_examples() {
        let p = IncrementProfile::new(vec![1.0; 25], vec![0.1; 25]).unwrap();
        let b = generalized_azuma_bound(10.0, &p).unwrap();
        assert!((b - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(generalized_azuma_bound(5.0, &p).is_err());
        assert!(generalized_azuma_bound(5.0 + 1e-9, &p).unwrap().is_finite());
        assert!(azuma_bound(10.0, &p, Sided::Two).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(IncrementProfile::new(vec![1.0], vec![]).is_err());
        assert!(IncrementProfile::new(vec![-1.0], vec![0.0]).is_err());
        assert!(IncrementProfile::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn small_walk_report() {
        let r = empirical_tail_check(Generator::FairWalk { steps: 16 }, 6.0, 2_000, 3).unwrap();
        assert!(!r.violation);
        assert!(r.frequency > 0.0);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["verdict"], "consistent");
        assert_eq!(v["generator"]["kind"], "fair-walk");
    }
}
