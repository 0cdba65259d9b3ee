//! Buchstab's function `ω` and the linear sieve functions `f`, `F`.
//!
//! Point values come from a piecewise power-series solver in double-double
//! arithmetic, which also yields the deviations `1 - f` and `F - 1` with full
//! relative precision (they fall below `1e-20` by `v = 16`). [`DelayTable`]
//! is a separate trapezoid solution on a uniform grid, used for CSV export
//! and as an independent cross-check.

mod dd;
mod series;
mod table;

pub use series::SERIES_V_MAX;
pub use table::{DelayFunction, DelayTable, DEFAULT_STEP, TABLE_V_MAX};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{mertens_theta, EXP_GAMMA, EXP_NEG_GAMMA};
use series::solutions;

/// `ω(v)` for `v >= 1`; beyond the solver range `ω` equals `e^{-γ}` to far
/// below double precision.
pub fn buchstab_omega(v: f64) -> Result<f64> {
    Ok(omega_deviation(v)? + EXP_NEG_GAMMA)
}

/// `ω(v) - e^{-γ}` with double-double cancellation control.
pub fn omega_deviation(v: f64) -> Result<f64> {
    if !(v >= 1.0) || v.is_nan() {
        return Err(invalid(format!("ω is defined for v >= 1, got {v}")));
    }
    if v > SERIES_V_MAX {
        return Ok(0.0);
    }
    let w = solutions().omega.eval(v).expect("in range");
    Ok((w - series::EXP_NEG_GAMMA_DD).to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSieveValue {
    pub v: f64,
    pub f: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    /// `1 - f(v)`, computed directly rather than by subtraction.
    pub lower_deficit: f64,
    /// `F(v) - 1`, computed directly rather than by subtraction.
    pub upper_excess: f64,
}

/// `(f(v), F(v))` for `v > 0`.
pub fn linear_sieve_ff(v: f64) -> Result<LinearSieveValue> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("f and F are defined for v > 0, got {v}")));
    }
    let (psi, phi) = if v < 1.0 {
        (1.0, 2.0 * EXP_GAMMA / v - 1.0)
    } else if v > SERIES_V_MAX {
        (0.0, 0.0)
    } else {
        let s = solutions();
        (
            s.psi.eval(v).expect("in range").to_f64(),
            s.phi.eval(v).expect("in range").to_f64(),
        )
    };
    let (f, big_f) = if v <= 2.0 {
        (0.0, 2.0 * EXP_GAMMA / v)
    } else {
        (1.0 - psi, 1.0 + phi)
    };
    Ok(LinearSieveValue {
        v,
        f,
        big_f,
        lower_deficit: psi,
        upper_excess: phi,
    })
}

/// Grid step used to locate the minimum of `ω` before refinement.
const FPLUS_STEP: f64 = 1e-3;

/// Upper end of the search for `min_{u >= v} ω(u)`. Beyond it
/// `|ω - e^{-γ}| < 1e-25`.
pub const FPLUS_V_MAX: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPlusBound {
    pub v: f64,
    /// `e^γ · min_{v <= u <= v_max} ω(u)`.
    pub value: f64,
    pub argmin: f64,
    pub min_omega: f64,
    /// The same minimum found with half the grid step.
    pub refined_min_omega: f64,
    /// Coarse and refined minima agree to `1e-12`.
    pub certified: bool,
}

/// `e^γ · min_{u >= v} ω(u)`, an upper bound for `f⁺(v)`.
pub fn fplus_upper(v: f64) -> Result<f64> {
    Ok(fplus_upper_detail(v)?.value)
}

pub fn fplus_upper_detail(v: f64) -> Result<FPlusBound> {
    if !(v > 1.0) || !(v < FPLUS_V_MAX) {
        return Err(invalid(format!(
            "f⁺ bound needs 1 < v < {FPLUS_V_MAX}, got {v}"
        )));
    }
    let (arg, coarse) = minimize_omega(v, FPLUS_STEP)?;
    let (_, fine) = minimize_omega(v, FPLUS_STEP / 2.0)?;
    let min_omega = coarse.min(fine);
    // e^γ (e^{-γ} + δ) = 1 + e^γ δ, formed from the deviation δ directly
    Ok(FPlusBound {
        v,
        value: 1.0 + EXP_GAMMA * min_omega,
        argmin: arg,
        min_omega: min_omega + EXP_NEG_GAMMA,
        refined_min_omega: fine + EXP_NEG_GAMMA,
        certified: (coarse - fine).abs() < 1e-12,
    })
}

/// Minimum of `ω - e^{-γ}` over `[v, FPLUS_V_MAX]`: scan a grid, then refine
/// the lowest grid-local minima by golden-section search.
fn minimize_omega(v: f64, step: f64) -> Result<(f64, f64)> {
    let n = ((FPLUS_V_MAX - v) / step).ceil() as usize;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| (v + i as f64 * step).min(FPLUS_V_MAX))
        .collect();
    let vals = nodes
        .iter()
        .map(|&u| omega_deviation(u))
        .collect::<Result<Vec<_>>>()?;
    let mut local: Vec<usize> = (0..nodes.len())
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
            vals[i] <= left && vals[i] <= right
        })
        .collect();
    local.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    local.truncate(REFINED_CANDIDATES);
    let mut best = (nodes[local[0]], vals[local[0]]);
    for i in local {
        let lo = nodes[i.saturating_sub(1)];
        let hi = nodes[(i + 1).min(nodes.len() - 1)];
        let cand = golden_min(lo, hi)?;
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Grid-local minima refined per search; later ones sit far above the best.
const REFINED_CANDIDATES: usize = 8;

fn golden_min(mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = omega_deviation(c)?;
    let mut fd = omega_deviation(d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = omega_deviation(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = omega_deviation(d)?;
        }
    }
    let fa = omega_deviation(a)?;
    let fb = omega_deviation(b)?;
    let mut best = (a, fa);
    for cand in [(b, fb), (c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Nominal extremal-sieve curve `y Θ_z (1 - exp(-u log u))`, `u = log y / log z`,
/// with the `1 + o(1)` in the exponent dropped. A trend curve, not a bound.
pub fn maier_bound(y: f64, z: f64) -> Result<f64> {
    let u = maier_exponent(y, z)?;
    Ok(y * mertens_theta(z)? * (1.0 - (-u * u.ln()).exp()))
}

/// `u = log y / log z`, validating `2 <= y <= exp(sqrt z)` and `u >= 1`.
pub fn maier_exponent(y: f64, z: f64) -> Result<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return Err(invalid(format!("z must exceed 1, got {z}")));
    }
    if !(y >= 2.0) || y.ln() > z.sqrt() {
        return Err(invalid(format!(
            "need 2 <= y <= exp(sqrt z), got y = {y}, z = {z}"
        )));
    }
    let u = y.ln() / z.ln();
    if u < 1.0 {
        return Err(invalid(format!("need y >= z (u >= 1), got u = {u}")));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_domain() {
        assert!(buchstab_omega(0.99).is_err());
        assert!((buchstab_omega(1.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((buchstab_omega(50.0).unwrap() - EXP_NEG_GAMMA).abs() < 1e-16);
    }

    #[test]
    fn linear_closed_forms() {
        let a = linear_sieve_ff(1.5).unwrap();
        assert_eq!(a.f, 0.0);
        assert!((a.big_f - 2.0 * EXP_GAMMA / 1.5).abs() < 1e-15);
        let b = linear_sieve_ff(4.0).unwrap();
        assert!((b.f - EXP_GAMMA * 3f64.ln() / 2.0).abs() < 1e-15);
        assert!(linear_sieve_ff(0.0).is_err());
        let c = linear_sieve_ff(0.25).unwrap();
        assert!((c.big_f - 8.0 * EXP_GAMMA).abs() < 1e-13);
    }

    #[test]
    fn fplus_small_v() {
        // the minimum over [1.5, ∞) and [2, ∞) is ω(2) = 1/2
        let b = fplus_upper_detail(1.5).unwrap();
        assert!((b.value - EXP_GAMMA / 2.0).abs() < 1e-12);
        assert!((b.argmin - 2.0).abs() < 1e-6);
        assert!(b.certified);
        assert!(fplus_upper(3.0).unwrap() < 1.0);
        assert!(fplus_upper(1.0).is_err());
        assert!(fplus_upper(30.0).is_err());
    }

    #[test]
    fn maier_examples() {
        assert_eq!(maier_bound(100.0, 100.0).unwrap(), 0.0);
        let z: f64 = 100.0;
        let v = maier_bound(z * z, z).unwrap();
        let expected = z * z * mertens_theta(z).unwrap() * 0.75;
        assert!((v - expected).abs() < 1e-9 * expected);
        assert!(maier_bound(1.0, 100.0).is_err());
        assert!(maier_bound(1e6, 100.0).is_err());
        assert!(maier_bound(50.0, 100.0).is_err());
    }
}
