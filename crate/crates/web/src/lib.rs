//! wasm-bindgen bindings for the browser demo. Each export takes plain
//! numbers and returns a JSON string; the `*_json` functions underneath are
//! ordinary Rust and are what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sievelab_core::params::mertens_theta;
use sievelab_core::prime_engine::{interval_histogram, primes_in};
use sievelab_core::random_models::survivor_distribution;
use sievelab_core::sieve_functions::{buchstab_omega, linear_sieve_ff};

/// Largest `x` the page may request.
pub const MAX_X: f64 = 5e6;
/// Largest trial count the page may request.
pub const MAX_TRIALS: u64 = 200_000;

#[derive(Serialize)]
struct Curves {
    v: Vec<f64>,
    omega: Vec<f64>,
    f: Vec<f64>,
    #[serde(rename = "F")]
    big_f: Vec<f64>,
}

/// `ω`, `f`, `F` on `[1, v_max]` at `points` equally spaced abscissae.
pub fn sieve_curves_json(v_max: f64, points: usize) -> Result<String, String> {
    if !(v_max > 1.0 && v_max <= 40.0) || !(2..=5000).contains(&points) {
        return Err("need 1 < v_max <= 40 and 2 <= points <= 5000".into());
    }
    let mut c = Curves {
        v: Vec::with_capacity(points),
        omega: Vec::with_capacity(points),
        f: Vec::with_capacity(points),
        big_f: Vec::with_capacity(points),
    };
    for i in 0..points {
        let v = 1.0 + (v_max - 1.0) * i as f64 / (points - 1) as f64;
        let ff = linear_sieve_ff(v).map_err(|e| e.to_string())?;
        c.v.push(v);
        c.omega.push(buchstab_omega(v).map_err(|e| e.to_string())?);
        c.f.push(ff.f);
        c.big_f.push(ff.big_f);
    }
    Ok(serde_json::to_string(&c).expect("curves serialize"))
}

#[derive(Serialize)]
struct Histogram {
    lambda: f64,
    window: f64,
    k: Vec<u64>,
    observed: Vec<f64>,
    poisson: Vec<f64>,
}

fn poisson_row(mean: f64, upto: usize) -> Vec<f64> {
    let mut p = (-mean).exp();
    let mut out = Vec::with_capacity(upto + 1);
    for k in 0..=upto {
        if k > 0 {
            p *= mean / k as f64;
        }
        out.push(p);
    }
    out
}

/// Frequencies of `k` primes in windows `[n+1, n + λ log x]`, `n <= x`,
/// next to the Poisson law with mean `λ`.
pub fn prime_windows_json(x: f64, lambda: f64) -> Result<String, String> {
    if !(x >= 100.0 && x <= MAX_X) || !(lambda > 0.0 && lambda <= 10.0) {
        return Err(format!("need 100 <= x <= {MAX_X} and 0 < lambda <= 10"));
    }
    let window = lambda * x.ln();
    let primes = primes_in(0, x as u64 + window as u64).map_err(|e| e.to_string())?;
    let hist = interval_histogram(&primes, x, window).map_err(|e| e.to_string())?;
    let total = x.floor();
    let upto = hist.iter().rposition(|&c| c > 0).unwrap_or(0).max(4);
    let h = Histogram {
        lambda,
        window,
        k: (0..=upto as u64).collect(),
        observed: (0..=upto)
            .map(|k| hist.get(k).copied().unwrap_or(0) as f64 / total)
            .collect(),
        poisson: poisson_row(lambda, upto),
    };
    Ok(serde_json::to_string(&h).expect("histogram serializes"))
}

#[derive(Serialize)]
struct SieveRun {
    mean_predicted: f64,
    mean_observed: f64,
    k: Vec<u64>,
    observed: Vec<f64>,
    stderr: Vec<f64>,
    poisson: Vec<f64>,
}

/// Survivor-count distribution of the random sieve on `[1, y]` up to `z`.
pub fn random_sieve_json(y: f64, z: f64, trials: u64, seed: u64) -> Result<String, String> {
    if !(y >= 1.0 && y <= 200.0) || !(z >= 2.0 && z <= 1e6) || !(1..=MAX_TRIALS).contains(&trials) {
        return Err(format!(
            "need 1 <= y <= 200, 2 <= z <= 1e6 and 1 <= trials <= {MAX_TRIALS}"
        ));
    }
    let d = survivor_distribution(y, z, trials, false, seed).map_err(|e| e.to_string())?;
    let mean = y.floor() * mertens_theta(z).map_err(|e| e.to_string())?;
    let upto = d.counts.iter().rposition(|&c| c > 0).unwrap_or(0).max(4);
    let ks: Vec<u64> = (0..=upto as u64).collect();
    let run = SieveRun {
        mean_predicted: mean,
        mean_observed: d.mean(),
        observed: ks.iter().map(|&k| d.frequency(k)).collect(),
        stderr: ks.iter().map(|&k| d.stderr(k)).collect(),
        poisson: poisson_row(mean, upto),
        k: ks,
    };
    Ok(serde_json::to_string(&run).expect("run serializes"))
}

#[wasm_bindgen]
pub fn sieve_curves(v_max: f64, points: usize) -> Result<String, JsValue> {
    sieve_curves_json(v_max, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn prime_windows(x: f64, lambda: f64) -> Result<String, JsValue> {
    prime_windows_json(x, lambda).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn random_sieve(y: f64, z: f64, trials: u32, seed: u32) -> Result<String, JsValue> {
    random_sieve_json(y, z, trials as u64, seed as u64).map_err(|e| JsValue::from_str(&e))
}
