//! Stateless keyed randomness.
//!
//! Every random quantity in the models is a pure function of a master seed
//! and an integer label (a prime, an integer `n`, a trial index). Any subset
//! of labels can therefore be drawn in any order, by any number of workers,
//! and give the same values.

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child key from `(key, label)`.
#[inline]
pub fn derive(key: u64, label: u64) -> u64 {
    mix64(key ^ mix64(label ^ 0x6a09_e667_f3bc_c909))
}

/// Domain tags so that different uses of one master seed never collide.
pub mod tag {
    pub const RESIDUE: u64 = 0x7265_7369_6475_6500;
    pub const TRIAL: u64 = 0x7472_6961_6c00_0000;
    pub const CRAMER: u64 = 0x6372_616d_6572_0000;
    pub const WALK: u64 = 0x7761_6c6b_0000_0000;
}

/// Uniform integer in `[0, n)` determined by `key`.
///
/// Lemire's multiply-shift with rejection; rejected draws re-derive from a
/// counter so the result stays a function of `key` alone.
#[inline]
pub fn uniform_below(key: u64, n: u64) -> u64 {
    debug_assert!(n > 0);
    let threshold = n.wrapping_neg() % n;
    let mut word = mix64(key);
    let mut counter = 0u64;
    loop {
        let m = (word as u128) * (n as u128);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
        counter += 1;
        word = mix64(key ^ counter.wrapping_mul(0xd1b5_4a32_d192_ed03));
    }
}

/// Uniform real in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64(key: u64) -> f64 {
    (mix64(key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_below_stays_in_range() {
        for n in [1u64, 2, 3, 7, 1000, u64::MAX / 3] {
            for k in 0..200 {
                assert!(uniform_below(derive(9, k), n) < n);
            }
        }
    }

    #[test]
    fn derive_is_label_sensitive() {
        assert_ne!(derive(1, 2), derive(1, 3));
        assert_ne!(derive(1, 2), derive(2, 2));
        assert_eq!(derive(5, 11), derive(5, 11));
    }

    #[test]
    fn unit_f64_is_half_open() {
        for k in 0..1000 {
            let u = unit_f64(k);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
