//! Piecewise power-series solution of the delay equations in double-double.
//!
//! On each unit interval `[n, n+1]` a function is stored as a polynomial in
//! `s = v - (n + 1/2)`. The delay integral over `[n, t]` of the previous piece
//! is again a polynomial in the same `s` once `v = t + 1`, so each new piece
//! is one polynomial integration followed by a product with the series of
//! `1/v` about `n + 3/2`.
//!
//! Every piece is analytic on a disc of radius at least `3/2` around its
//! center (the nearest singularities sit at integers two steps back, or at
//! `v = 0`), so the coefficients decay like `3^{-i}` on `|s| <= 1/2`.

use std::sync::OnceLock;

use super::dd::Dd;

/// Polynomial degree per piece.
const DEGREE: usize = 80;

/// Last interval end covered by the solver.
pub const SERIES_V_MAX: f64 = 40.0;

pub const EXP_GAMMA_DD: Dd = Dd::new(1.781_072_417_990_198, -1.275_802_401_983_757_8e-17);
pub const EXP_NEG_GAMMA_DD: Dd = Dd::new(0.561_459_483_566_885_1, 3.845_711_298_868_925e-17);

type Poly = Vec<Dd>;

fn inv_linear(c: f64) -> Poly {
    // 1/(c + s) = Σ (-1)^i s^i / c^{i+1}
    let inv = Dd::from_f64(c).recip();
    let mut out = Vec::with_capacity(DEGREE + 1);
    let mut term = inv;
    for _ in 0..=DEGREE {
        out.push(term);
        term = -(term * inv);
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Dd::ZERO; DEGREE + 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().take(DEGREE + 1 - i).enumerate() {
            out[i + j] = out[i + j] + ai * bj;
        }
    }
    out
}

fn scale(a: &Poly, k: Dd) -> Poly {
    a.iter().map(|&x| x * k).collect()
}

/// Antiderivative vanishing at `s = 0`, truncated to the working degree.
fn integrate(a: &Poly) -> Poly {
    let mut out = vec![Dd::ZERO; DEGREE + 1];
    for i in 0..DEGREE {
        out[i + 1] = a[i] / Dd::from_f64((i + 1) as f64);
    }
    out
}

fn eval(a: &Poly, s: Dd) -> Dd {
    let mut acc = Dd::ZERO;
    for &c in a.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// Pieces on `[1,2], [2,3], …` for one function.
#[derive(Debug, Clone)]
pub(crate) struct Piecewise {
    pieces: Vec<Poly>,
}

impl Piecewise {
    /// Piece covering `[n, n+1]` evaluated at `v`.
    pub(crate) fn eval(&self, v: f64) -> Option<Dd> {
        if !(v >= 1.0) || v > SERIES_V_MAX {
            return None;
        }
        let mut n = v.floor() as usize;
        if n as f64 == SERIES_V_MAX {
            n -= 1;
        }
        let piece = self.pieces.get(n - 1)?;
        Some(eval(piece, Dd::from_f64(v) - Dd::from_f64(n as f64 + 0.5)))
    }
}

/// Integral of a piece over its whole unit interval.
fn piece_integral(g: &Poly) -> Dd {
    let p = integrate(g);
    eval(&p, Dd::from_f64(0.5)) - eval(&p, Dd::from_f64(-0.5))
}

/// Given the previous piece `g` on `[n, n+1]` and `I = ∫_1^n g`, the series
/// of `∫_1^{v-1} g` for `v ∈ [n+1, n+2]`.
fn delayed_integral(g: &Poly, before: Dd) -> Poly {
    let mut p = integrate(g);
    let at_left = eval(&p, Dd::from_f64(-0.5));
    p[0] = p[0] + before - at_left;
    p
}

/// `v ω(v) = 1 + ∫_1^{v-1} ω`, `ω = 1/v` on `[1, 2]`.
fn solve_omega() -> Piecewise {
    let count = SERIES_V_MAX as usize - 1;
    let mut pieces = vec![inv_linear(1.5)];
    let mut acc = Dd::ZERO;
    for n in 1..count {
        let prev = &pieces[n - 1];
        let mut a = delayed_integral(prev, acc);
        a[0] = a[0] + Dd::ONE;
        let next = mul(&a, &inv_linear(n as f64 + 1.5));
        acc = acc + piece_integral(prev);
        pieces.push(next);
    }
    Piecewise { pieces }
}

/// Deviations `ψ = 1 - f` and `φ = F - 1` on `[1, ∞)`:
/// `v ψ(v) = 2 - ∫_1^{v-1} φ` and `v φ(v) = 2e^γ - 2 - ∫_1^{v-1} ψ` for `v >= 2`,
/// with `ψ = 1` and `φ = 2e^γ/v - 1` on `[1, 2]`.
fn solve_linear() -> (Piecewise, Piecewise) {
    let count = SERIES_V_MAX as usize - 1;
    let mut one = vec![Dd::ZERO; DEGREE + 1];
    one[0] = Dd::ONE;
    let mut phi0 = scale(&inv_linear(1.5), Dd::from_f64(2.0) * EXP_GAMMA_DD);
    phi0[0] = phi0[0] - Dd::ONE;
    let mut psi = vec![one];
    let mut phi = vec![phi0];
    let mut int_psi = Dd::ZERO;
    let mut int_phi = Dd::ZERO;
    let two = Dd::from_f64(2.0);
    for n in 1..count {
        let inv = inv_linear(n as f64 + 1.5);
        let mut a = delayed_integral(&phi[n - 1], int_phi);
        a = a.into_iter().map(|x| -x).collect();
        a[0] = a[0] + two;
        let mut b = delayed_integral(&psi[n - 1], int_psi);
        b = b.into_iter().map(|x| -x).collect();
        b[0] = b[0] + two * EXP_GAMMA_DD - two;
        int_psi = int_psi + piece_integral(&psi[n - 1]);
        int_phi = int_phi + piece_integral(&phi[n - 1]);
        psi.push(mul(&a, &inv));
        phi.push(mul(&b, &inv));
    }
    (Piecewise { pieces: psi }, Piecewise { pieces: phi })
}

pub(crate) struct Solutions {
    pub omega: Piecewise,
    pub psi: Piecewise,
    pub phi: Piecewise,
}

pub(crate) fn solutions() -> &'static Solutions {
    static S: OnceLock<Solutions> = OnceLock::new();
    S.get_or_init(|| {
        let (psi, phi) = solve_linear();
        Solutions {
            omega: solve_omega(),
            psi,
            phi,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let s = solutions();
        let w3 = s.omega.eval(3.0).unwrap().to_f64();
        assert!((w3 - (1.0 + 2f64.ln()) / 3.0).abs() < 1e-15);
        let w25 = s.omega.eval(2.5).unwrap().to_f64();
        assert!((w25 - (1.0 + 1.5f64.ln()) / 2.5).abs() < 1e-15);
        let f3 = 1.0 - s.psi.eval(3.0).unwrap().to_f64();
        assert!((f3 - 2.0 * EXP_GAMMA_DD.hi / 3.0 * 2f64.ln()).abs() < 1e-15);
        let big_f = 1.0 + s.phi.eval(2.5).unwrap().to_f64();
        assert!((big_f - 2.0 * EXP_GAMMA_DD.hi / 2.5).abs() < 1e-15);
    }

    #[test]
    fn pieces_join_continuously() {
        let s = solutions();
        for n in 3..39 {
            let v = n as f64;
            for f in [&s.omega, &s.psi, &s.phi] {
                let left = eval(&f.pieces[n - 2], Dd::from_f64(0.5));
                let right = eval(&f.pieces[n - 1], Dd::from_f64(-0.5));
                assert!(
                    (left - right).to_f64().abs() < 1e-29,
                    "jump at {v}: {left:?} vs {right:?}"
                );
            }
        }
    }
}
