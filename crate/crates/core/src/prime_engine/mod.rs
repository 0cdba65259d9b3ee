//! Segmented prime generation and gap/window statistics over integer sets.

mod counts;
mod set;
mod sieve;

pub use counts::{
    gap_count_m, interval_count_n, interval_histogram, tail_ratio, tuple_count, window_len,
    GapHistogram,
};
pub use set::{IntegerSet, SetKind};
#[allow(unused_imports)]
pub(crate) use sieve::isqrt;
pub use sieve::{
    primes_in, primes_in_with, primes_up_to, SieveConfig, DEFAULT_MAX_SIEVE, DEFAULT_SEGMENT,
    MAX_X_ENV,
};
