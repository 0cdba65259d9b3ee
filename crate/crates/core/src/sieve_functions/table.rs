use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::EXP_GAMMA;
use crate::table::{Cell, Provenance, Table};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const TABLE_V_MAX: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayFunction {
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "f")]
    LowerF,
    #[serde(rename = "F")]
    UpperF,
}

/// Trapezoid solution of the three delay equations on the grid `v = i h`.
///
/// The step must divide 1 so that the delayed argument `v - 1` is again a
/// grid node; values between nodes are linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayTable {
    pub h: f64,
    pub v_max: f64,
    /// Nodes per unit length.
    per_unit: usize,
    /// `ω(i h)` for `i >= per_unit`; entries below are unused.
    omega: Vec<f64>,
    /// `f(i h)`, `F(i h)` for `i >= 1`.
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DelayTable {
    pub fn build(h: f64, v_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(h <= 0.5) {
            return Err(invalid(format!("step must lie in (0, 1/2], got {h}")));
        }
        let per_unit = (1.0 / h).round() as usize;
        if ((per_unit as f64) * h - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("step {h} does not divide 1")));
        }
        if !(v_max >= 2.0) || !v_max.is_finite() {
            return Err(invalid(format!("v_max must be at least 2, got {v_max}")));
        }
        let h = 1.0 / per_unit as f64;
        let n = (v_max * per_unit as f64).round() as usize;
        let v = |i: usize| i as f64 / per_unit as f64;
        let m = per_unit;

        // ω: v ω(v) = 1 + ∫_1^{v-1} ω
        let mut omega = vec![f64::NAN; n + 1];
        let mut cum_omega = vec![0.0; n + 1]; // ∫_1^{v_i} ω for i >= m
        for i in m..=n {
            omega[i] = if i <= 2 * m {
                1.0 / v(i)
            } else {
                (1.0 + cum_omega[i - m]) / v(i)
            };
            if i > m {
                cum_omega[i] = cum_omega[i - 1] + 0.5 * h * (omega[i - 1] + omega[i]);
            }
        }

        // f, F: v f(v) = ∫_1^{v-1} F, v F(v) = 2e^γ + ∫_1^{v-1} f
        let mut lower = vec![0.0; n + 1];
        let mut upper = vec![f64::INFINITY; n + 1];
        let mut cum_lower = vec![0.0; n + 1];
        let mut cum_upper = vec![0.0; n + 1];
        for i in 1..=n {
            if i <= 2 * m {
                lower[i] = 0.0;
                upper[i] = 2.0 * EXP_GAMMA / v(i);
            } else {
                lower[i] = cum_upper[i - m] / v(i);
                upper[i] = (2.0 * EXP_GAMMA + cum_lower[i - m]) / v(i);
            }
            if i > m {
                cum_lower[i] = cum_lower[i - 1] + 0.5 * h * (lower[i - 1] + lower[i]);
                cum_upper[i] = cum_upper[i - 1] + 0.5 * h * (upper[i - 1] + upper[i]);
            }
        }
        Ok(DelayTable {
            h,
            v_max: v(n),
            per_unit,
            omega,
            lower,
            upper,
        })
    }

    pub fn standard() -> Self {
        Self::build(DEFAULT_STEP, TABLE_V_MAX).expect("default grid is valid")
    }

    fn nodes(&self, func: DelayFunction) -> &[f64] {
        match func {
            DelayFunction::Omega => &self.omega,
            DelayFunction::LowerF => &self.lower,
            DelayFunction::UpperF => &self.upper,
        }
    }

    /// Smallest `v` at which `func` is tabulated.
    pub fn v_min(&self, func: DelayFunction) -> f64 {
        match func {
            DelayFunction::Omega => 1.0,
            _ => self.h,
        }
    }

    /// Value at grid node `i` (`v = i h`).
    pub fn node(&self, func: DelayFunction, i: usize) -> Option<f64> {
        let v = i as f64 * self.h;
        if v < self.v_min(func) - 1e-12 {
            return None;
        }
        self.nodes(func).get(i).copied()
    }

    pub fn node_count(&self) -> usize {
        self.omega.len()
    }

    /// Linear interpolation between the neighbouring nodes.
    pub fn value(&self, func: DelayFunction, v: f64) -> Result<f64> {
        if !(v >= self.v_min(func)) || v > self.v_max + 1e-12 {
            return Err(invalid(format!(
                "v = {v} outside the table range [{}, {}]",
                self.v_min(func),
                self.v_max
            )));
        }
        let x = v * self.per_unit as f64;
        let i = (x.floor() as usize).min(self.node_count() - 2);
        let t = x - i as f64;
        let vals = self.nodes(func);
        if t == 0.0 {
            return Ok(vals[i]);
        }
        Ok(vals[i] * (1.0 - t) + vals[i + 1] * t)
    }

    /// Rows `(v, omega, f, F)` for every `stride`-th node with `v >= 1`.
    pub fn to_table(&self, stride: usize) -> Table {
        let mut t = Table::new("delay-table", Provenance::Exact, &["v", "omega", "f", "F"]);
        let stride = stride.max(1);
        for i in (self.per_unit..self.node_count()).step_by(stride) {
            t.push(vec![
                Cell::from(i as f64 * self.h),
                Cell::from(self.omega[i]),
                Cell::from(self.lower[i]),
                Cell::from(self.upper[i]),
            ]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W, stride: usize) -> Result<()> {
        self.to_table(stride).write_csv(w)
    }
}
