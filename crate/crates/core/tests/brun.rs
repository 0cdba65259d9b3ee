use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sievelab_core::brun::{
    bonferroni_check, delta, delta_k, delta_remainder, exact_count_t, fixed_point_count_t,
    sandwiches, truncated_count_u, truncated_count_uprime, HalfOpen,
};
use sievelab_core::prime_engine::{gap_count_m, primes_in, IntegerSet};

/// `U_K` straight from the definition: sum over subsets `H ⊂ Ω`, `|H| = ℓ`.
fn subset_definition(
    a: &IntegerSet,
    range: HalfOpen,
    omega: &[u64],
    k: u64,
    big_k: u64,
    fixed_zero: bool,
) -> BigInt {
    let m = omega.len();
    let mut total = BigInt::from(0);
    for mask in 0u32..(1 << m) {
        let l = mask.count_ones() as u64;
        if l < k || l > big_k {
            continue;
        }
        let h: Vec<u64> = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| omega[i])
            .collect();
        let hits = (range.lo + 1..=range.hi)
            .filter(|&n| (!fixed_zero || a.contains(n)) && h.iter().all(|&o| a.contains(n + o)))
            .count();
        let choose: u64 = (0..k).map(|i| l - i).product::<u64>() / (1..=k).product::<u64>();
        let term = BigInt::from(hits) * choose;
        if (l - k) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn random_set(rng: &mut ChaCha8Rng, density: f64, hi: u64) -> IntegerSet {
    let e = (1..=hi).filter(|_| rng.random::<f64>() < density).collect();
    IntegerSet::explicit(e).unwrap()
}

#[test]
fn remainder_identity_to_one_hundred() {
    let r = bonferroni_check(100, 100, 100).unwrap();
    assert!(r.passed(), "{}", r.to_json());
    assert_eq!(r.checked, 101 * (101 * 102 / 2));
}

#[test]
fn worked_examples() {
    assert_eq!(delta(3, 0), BigInt::from(0));
    assert!(delta(3, 0) <= delta_k(3, 0, 2));
    assert!(delta(3, 0) >= delta_k(3, 0, 1));
    assert_eq!(delta_remainder(3, 0, 2), BigInt::from(-1));
}

#[test]
fn histogram_matches_subset_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let a = random_set(&mut rng, 0.1 + 0.02 * trial as f64, 400);
        let range = HalfOpen::new(20, 300).unwrap();
        let omega: Vec<u64> = (0..12).map(|i| 1 + 3 * i + (trial % 3)).collect();
        for k in 0..3 {
            for big_k in k..=6 {
                assert_eq!(
                    truncated_count_u(&a, range, &omega, k, big_k).unwrap(),
                    subset_definition(&a, range, &omega, k, big_k, false),
                    "trial {trial}, k {k}, K {big_k}"
                );
            }
        }
        let y = 10;
        let omega: Vec<u64> = (1..=y).collect();
        for big_k in 0..=4 {
            assert_eq!(
                truncated_count_uprime(&a, range, y, big_k).unwrap(),
                subset_definition(&a, range, &omega, 0, big_k, true)
            );
        }
    }
}

#[test]
fn sandwich_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let density = 0.05 + 0.45 * (i as f64 / 199.0);
        let m = 1 + rng.random_range(0..15u64);
        let a = random_set(&mut rng, density, 1100);
        let range = HalfOpen::new(0, 1000).unwrap();
        let omega: Vec<u64> = (1..=m).map(|h| h * 5 - rng.random_range(0..5u64)).collect();
        for k in 0..=m.min(3) {
            let t = exact_count_t(&a, range, &omega, k).unwrap();
            for big_k in k..=m {
                let u = truncated_count_u(&a, range, &omega, k, big_k).unwrap();
                let bt = BigInt::from(t);
                if (big_k - k) % 2 == 0 {
                    assert!(bt <= u, "set {i}, k {k}, K {big_k}");
                } else {
                    assert!(bt >= u, "set {i}, k {k}, K {big_k}");
                }
            }
            // full inclusion-exclusion is exact
            let full = truncated_count_u(&a, range, &omega, k, m).unwrap();
            assert_eq!(full, BigInt::from(t));
        }
    }
}

#[test]
fn primes_sandwich() {
    let primes = primes_in(0, 20_000).unwrap();
    let range = HalfOpen::new(1_000, 10_000).unwrap();
    let omega: Vec<u64> = (1..=20).collect();
    for k in 0..=2 {
        let t = exact_count_t(&primes, range, &omega, k).unwrap();
        for big_k in 2..=4 {
            let u = truncated_count_u(&primes, range, &omega, k, big_k).unwrap();
            let next = truncated_count_u(&primes, range, &omega, k, big_k + 1).unwrap();
            assert!(sandwiches(t, &u, &next, k, big_k), "k {k}, K {big_k}");
        }
    }
}

#[test]
fn fixed_point_matches_gap_counter() {
    let primes = primes_in(0, 20_000).unwrap();
    let range = HalfOpen::new(1_000, 10_000).unwrap();
    let y = 10;
    let t = fixed_point_count_t(&primes, range, y).unwrap();
    let via_gaps = gap_count_m(&primes, 10_000.0, y as f64).unwrap()
        - gap_count_m(&primes, 1_000.0, y as f64).unwrap();
    assert_eq!(t, via_gaps);
    for big_k in [2u64, 3] {
        let u = truncated_count_uprime(&primes, range, y, big_k).unwrap();
        if big_k % 2 == 0 {
            assert!(BigInt::from(t) <= u);
        } else {
            assert!(BigInt::from(t) >= u);
        }
    }
    assert_eq!(
        truncated_count_uprime(&primes, range, y, y).unwrap(),
        BigInt::from(t)
    );
}

proptest! {
    #[test]
    fn parity_inequalities(u in 0u64..80, k in 0u64..20, extra in 0u64..30) {
        let big_k = k + extra;
        let d = delta(u, k);
        let dk = delta_k(u, k, big_k);
        if extra % 2 == 0 {
            prop_assert!(d <= dk);
        } else {
            prop_assert!(d >= dk);
        }
        prop_assert_eq!(d, dk + delta_remainder(u, k, big_k));
        if big_k >= u {
            prop_assert_eq!(delta_k(u, k, big_k), delta(u, k));
        }
    }
}
