//! `∫ dt / log^k t` by composite Gauss-Legendre quadrature in `s = log t`.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

const ORDER: usize = 16;
/// Panel width in `s`.
const PANEL: f64 = 0.25;

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=n {
                        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let step = p1 / dp;
                    x -= step;
                    if step.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// `∫_a^b dt / log^k t` for `1 < a <= b`.
pub fn log_power_integral(k: u32, a: f64, b: f64) -> Result<f64> {
    if !(a > 1.0) || !(b >= a) || !b.is_finite() {
        return Err(invalid(format!("need 1 < a <= b, got a = {a}, b = {b}")));
    }
    let (sa, sb) = (a.ln(), b.ln());
    let panels = ((sb - sa) / PANEL).ceil().max(1.0) as usize;
    let h = (sb - sa) / panels as f64;
    let rule = gauss_legendre();
    let mut total = 0.0;
    for i in 0..panels {
        let mid = sa + (i as f64 + 0.5) * h;
        let mut part = 0.0;
        for &(x, w) in rule {
            let s = mid + 0.5 * h * x;
            // dt = e^s ds
            part += w * s.exp() / s.powi(k as i32);
        }
        total += 0.5 * h * part;
    }
    Ok(total)
}
