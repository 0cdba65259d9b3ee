use crate::params::mertens_theta;
use crate::prime_engine::{
    gap_count_m, interval_count_n, interval_histogram, tail_ratio, tuple_count, SieveConfig,
};
use crate::random_models::survivor_distribution;
use crate::sieve_functions::{fplus_upper, linear_sieve_ff};
use crate::singular::{singular_series_default, OffsetTuple};
use crate::table::{Cell, Provenance, Table};

use super::{generate_set, log_power_integral, module, ExperimentConfig, Model, RunError};

type Output = Result<(Vec<Table>, Vec<String>), RunError>;

const NOMINAL_NOTE: &str =
    "columns prefixed nominal_ are asymptotic predictions with the o(1) terms dropped";

fn provenance(model: Model) -> Provenance {
    if model.is_random() {
        Provenance::MonteCarlo
    } else {
        Provenance::Exact
    }
}

fn seed_cell(seed: Option<u64>) -> Cell {
    match seed {
        Some(s) => Cell::from(s),
        None => Cell::from("-"),
    }
}

fn ratio_cell(num: f64, den: f64) -> Cell {
    if den == 0.0 {
        Cell::from("-")
    } else {
        Cell::from(num / den)
    }
}

fn floor_x(cfg: &ExperimentConfig) -> u64 {
    cfg.x().floor() as u64
}

/// Sieve bound covering windows of length up to `lambda_max · log x`.
fn reach(cfg: &ExperimentConfig, lambda_max: f64) -> u64 {
    floor_x(cfg) + (lambda_max * cfg.x().ln()).floor() as u64
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `(λ, M_A(x; λ log x), x e^{-λ}/log x, ratio)` per model, seed and `λ`.
pub fn run_gap_tail(cfg: &ExperimentConfig, sieve: &SieveConfig) -> Output {
    let x = cfg.x();
    let lx = x.ln();
    let mut tables = Vec::new();
    for &model in &cfg.models {
        let name = format!("gap-tail-{}", model.name());
        let mut t = Table::new(
            &name,
            provenance(model),
            &[
                "model",
                "seed",
                "lambda",
                "y",
                "count",
                "nominal_prediction",
                "ratio",
            ],
        );
        if !cfg.lambdas.is_empty() {
            let x_max = reach(cfg, max_of(&cfg.lambdas));
            let mut per_lambda: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.lambdas.len()];
            for seed in cfg.seeds_for(model) {
                let set = generate_set(model, seed, x_max, sieve)
                    .map_err(module(format!("{name}: generating the set")))?;
                for (i, &l) in cfg.lambdas.iter().enumerate() {
                    let y = l * lx;
                    let ctx = || format!("{name}: lambda = {l}");
                    let m = gap_count_m(&set, x, y).map_err(module(ctx()))?;
                    let ratio = tail_ratio(&set, x, l).map_err(module(ctx()))?;
                    let prediction = x * (-l).exp() / lx;
                    t.push(vec![
                        model.name().into(),
                        seed_cell(seed),
                        l.into(),
                        y.into(),
                        m.into(),
                        prediction.into(),
                        ratio.into(),
                    ]);
                    per_lambda[i].push((m as f64, ratio));
                }
            }
            if model.is_random() {
                for (i, &l) in cfg.lambdas.iter().enumerate() {
                    let rows = &per_lambda[i];
                    let counts: Vec<f64> = rows.iter().map(|r| r.0).collect();
                    let ratios: Vec<f64> = rows.iter().map(|r| r.1).collect();
                    t.push(vec![
                        model.name().into(),
                        "mean".into(),
                        l.into(),
                        (l * lx).into(),
                        mean(&counts).into(),
                        (x * (-l).exp() / lx).into(),
                        mean(&ratios).into(),
                    ]);
                }
            }
        }
        tables.push(t);
    }
    Ok((tables, vec![NOMINAL_NOTE.into()]))
}

/// Window-count frequencies `N_A(x; λ log x, k) / x` against Poisson
/// probabilities, with a chi-square summary per model, seed and `λ`.
pub fn run_poisson_fit(cfg: &ExperimentConfig, sieve: &SieveConfig) -> Output {
    let x = cfg.x();
    let xf = floor_x(cfg);
    let lx = x.ln();
    let k_top = cfg.ks.iter().copied().max().unwrap_or(0);
    let mut tables = Vec::new();
    for &model in &cfg.models {
        let name = format!("poisson-fit-{}", model.name());
        let mut t = Table::new(
            &name,
            provenance(model),
            &[
                "model",
                "seed",
                "lambda",
                "k",
                "count",
                "frequency",
                "nominal_poisson",
                "ratio",
            ],
        );
        let mut s = Table::new(
            &format!("{name}-summary"),
            provenance(model),
            &[
                "model",
                "seed",
                "lambda",
                "chi_square",
                "bins",
                "total_frequency",
            ],
        );
        if !cfg.lambdas.is_empty() {
            let x_max = reach(cfg, max_of(&cfg.lambdas));
            for seed in cfg.seeds_for(model) {
                let set = generate_set(model, seed, x_max, sieve)
                    .map_err(module(format!("{name}: generating the set")))?;
                for &l in &cfg.lambdas {
                    let hist = interval_histogram(&set, x, l * lx)
                        .map_err(module(format!("{name}: lambda = {l}")))?;
                    let mut poisson = Vec::with_capacity(k_top as usize + 1);
                    let mut p = (-l).exp();
                    for k in 0..=k_top {
                        if k > 0 {
                            p *= l / k as f64;
                        }
                        poisson.push(p);
                    }
                    let mut chi = 0.0;
                    for &k in &cfg.ks {
                        let count = hist.get(k as usize).copied().unwrap_or(0);
                        let freq = count as f64 / xf as f64;
                        let pk = poisson[k as usize];
                        let expected = xf as f64 * pk;
                        chi += (count as f64 - expected).powi(2) / expected;
                        t.push(vec![
                            model.name().into(),
                            seed_cell(seed),
                            l.into(),
                            k.into(),
                            count.into(),
                            freq.into(),
                            pk.into(),
                            ratio_cell(freq, pk),
                        ]);
                    }
                    let mass = hist.iter().sum::<u64>() as f64 / xf as f64;
                    s.push(vec![
                        model.name().into(),
                        seed_cell(seed),
                        l.into(),
                        chi.into(),
                        cfg.ks.len().into(),
                        mass.into(),
                    ]);
                }
            }
        }
        tables.push(t);
        tables.push(s);
    }
    Ok((tables, vec![NOMINAL_NOTE.into()]))
}

/// Tuple counts against the singular-series and Cramér predictions.
pub fn run_model_compare(cfg: &ExperimentConfig, sieve: &SieveConfig) -> Output {
    let x = cfg.x();
    let mut t = Table::new(
        "model-compare",
        if cfg.models.iter().any(|m| m.is_random()) {
            Provenance::MonteCarlo
        } else {
            Provenance::Exact
        },
        &[
            "tuple",
            "model",
            "seed",
            "count",
            "singular_series",
            "nominal_hl",
            "nominal_cramer",
            "ratio_hl",
            "ratio_cramer",
        ],
    );
    if cfg.tuples.is_empty() {
        return Ok((vec![t], vec![NOMINAL_NOTE.into()]));
    }
    let mut rows = Vec::new();
    for raw in &cfg.tuples {
        let tuple = OffsetTuple::new(raw.clone()).map_err(module("model-compare: tuple"))?;
        let series = singular_series_default(&tuple)
            .map_err(module(format!("model-compare: tuple {}", tuple.to_line())))?
            .value;
        let integral = log_power_integral(tuple.len() as u32, 2.0, x)
            .map_err(module("model-compare: quadrature"))?;
        rows.push((tuple, raw.clone(), series, integral));
    }
    let span = cfg.tuples.iter().flatten().copied().max().unwrap_or(0);
    let x_max = floor_x(cfg) + span;
    for &model in &cfg.models {
        let mut counts: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
        for seed in cfg.seeds_for(model) {
            let set = generate_set(model, seed, x_max, sieve).map_err(module(format!(
                "model-compare: generating {}",
                model.name()
            )))?;
            for (i, (tuple, raw, series, integral)) in rows.iter().enumerate() {
                let c = tuple_count(&set, x, raw).map_err(module("model-compare: counting"))?;
                counts[i].push(c as f64);
                let hl = series * integral;
                t.push(vec![
                    tuple.to_line().into(),
                    model.name().into(),
                    seed_cell(seed),
                    c.into(),
                    (*series).into(),
                    hl.into(),
                    (*integral).into(),
                    ratio_cell(c as f64, hl),
                    ratio_cell(c as f64, *integral),
                ]);
            }
        }
        if model.is_random() {
            for (i, (tuple, _, series, integral)) in rows.iter().enumerate() {
                let m = mean(&counts[i]);
                let hl = series * integral;
                t.push(vec![
                    tuple.to_line().into(),
                    model.name().into(),
                    "mean".into(),
                    m.into(),
                    (*series).into(),
                    hl.into(),
                    (*integral).into(),
                    ratio_cell(m, hl),
                    ratio_cell(m, *integral),
                ]);
            }
        }
    }
    Ok((vec![t], vec![NOMINAL_NOTE.into()]))
}

/// `exp(λ e^{-u log u})` with `u = log log x / log λ`; 1 when `λ <= 1`.
pub(crate) fn nominal_breakdown_factor(ln_x: f64, lambda: f64) -> (f64, f64) {
    if lambda <= 1.0 {
        return (f64::INFINITY, 1.0);
    }
    let u = ln_x.ln() / lambda.ln();
    (u, (lambda * (-u * u.ln()).exp()).exp())
}

/// Empty-window and gap frequencies relative to `e^{-λ}` over a `λ` grid,
/// with the nominal breakdown factor and the sieve-function exponents.
pub fn run_breakdown_scan(cfg: &ExperimentConfig, sieve: &SieveConfig) -> Output {
    let x = cfg.x();
    let xf = floor_x(cfg);
    let lx = x.ln();
    let c_lambdas: Vec<f64> = cfg.cs.iter().map(|c| lx.powf(*c)).collect();
    let x_max = reach(cfg, max_of(&cfg.lambdas).max(max_of(&c_lambdas)));
    let mut tables = Vec::new();
    let mut exps = Table::new(
        "breakdown-exponents",
        Provenance::Nominal,
        &[
            "c",
            "v",
            "f",
            "fplus_upper",
            "lambda",
            "model",
            "seed",
            "measured_exponent",
        ],
    );
    let mut sieve_values = Vec::new();
    for &c in &cfg.cs {
        let v = 1.0 + 1.0 / c;
        let ctx = || format!("breakdown-scan: c = {c}");
        let f = linear_sieve_ff(v).map_err(module(ctx()))?.f;
        let fp = fplus_upper(v).map_err(module(ctx()))?;
        sieve_values.push((c, v, f, fp));
    }
    for &model in &cfg.models {
        let name = format!("breakdown-scan-{}", model.name());
        let mut t = Table::new(
            &name,
            provenance(model),
            &[
                "model",
                "seed",
                "lambda",
                "y",
                "empty_windows",
                "ratio_empty",
                "gap_count",
                "ratio_gap",
                "u",
                "nominal_factor",
            ],
        );
        if cfg.lambdas.is_empty() && cfg.cs.is_empty() {
            tables.push(t);
            continue;
        }
        for seed in cfg.seeds_for(model) {
            let set = generate_set(model, seed, x_max, sieve)
                .map_err(module(format!("{name}: generating the set")))?;
            for &l in &cfg.lambdas {
                let y = l * lx;
                let ctx = || format!("{name}: lambda = {l}");
                let empty = interval_count_n(&set, x, y, 0).map_err(module(ctx()))?;
                let gaps = gap_count_m(&set, x, y).map_err(module(ctx()))?;
                let ratio_gap = tail_ratio(&set, x, l).map_err(module(ctx()))?;
                let (u, factor) = nominal_breakdown_factor(lx, l);
                t.push(vec![
                    model.name().into(),
                    seed_cell(seed),
                    l.into(),
                    y.into(),
                    empty.into(),
                    (empty as f64 / (xf as f64 * (-l).exp())).into(),
                    gaps.into(),
                    ratio_gap.into(),
                    u.into(),
                    factor.into(),
                ]);
            }
            for (&(c, v, f, fp), &l) in sieve_values.iter().zip(&c_lambdas) {
                let m = gap_count_m(&set, x, l * lx)
                    .map_err(module(format!("breakdown-scan: c = {c}")))?;
                let measured = if m == 0 {
                    Cell::from("-")
                } else {
                    Cell::from(-(m as f64 * lx / x).ln() / l)
                };
                exps.push(vec![
                    c.into(),
                    v.into(),
                    f.into(),
                    fp.into(),
                    l.into(),
                    model.name().into(),
                    seed_cell(seed),
                    measured,
                ]);
            }
        }
        tables.push(t);
    }
    tables.push(exps);
    Ok((
        tables,
        vec![
            NOMINAL_NOTE.into(),
            "breakdown-exponents is nominal throughout; f and fplus_upper are limits, the \
             measured exponent is -log(M log x / x) / lambda at finite x"
                .into(),
        ],
    ))
}

/// Distribution of the random-sieve survivor count against a Poisson law
/// with mean `⌊y⌋ Θ_z`.
pub fn run_random_sieve(cfg: &ExperimentConfig) -> Output {
    let (y, z, trials) = (
        cfg.y.expect("validated"),
        cfg.z.expect("validated"),
        cfg.trials.expect("validated"),
    );
    let lambda = y.floor() * mertens_theta(z).map_err(module("random-sieve"))?;
    let mut t = Table::new(
        "random-sieve",
        Provenance::MonteCarlo,
        &["seed", "k", "frequency", "stderr", "nominal_poisson"],
    );
    let mut notes = vec![format!(
        "poisson mean lambda = floor(y) * Theta_z = {lambda}"
    )];
    for &seed in &cfg.seeds {
        let d = survivor_distribution(y, z, trials, cfg.forbid_zero, seed)
            .map_err(module(format!("random-sieve: seed {seed}")))?;
        for &k in &cfg.ks {
            let mut p = (-lambda).exp();
            for i in 1..=k {
                p *= lambda / i as f64;
            }
            t.push(vec![
                seed.into(),
                k.into(),
                d.frequency(k).into(),
                d.stderr(k).into(),
                p.into(),
            ]);
        }
        notes.push(format!("seed {seed}: mean survivors {}", d.mean()));
    }
    Ok((vec![t], notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_factor_normalization() {
        // u log u = 0 at u = 1, i.e. λ = log x
        let lx = 100.0f64;
        let (u, f) = nominal_breakdown_factor(lx, lx);
        assert!((u - 1.0).abs() < 1e-15);
        assert!((f * (-lx).exp() - 1.0).abs() < 1e-12);
        assert_eq!(nominal_breakdown_factor(lx, 0.5).1, 1.0);
    }
}
