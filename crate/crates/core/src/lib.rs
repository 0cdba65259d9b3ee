//! Number-theoretic sieve laboratory: prime and model-set generation, gap and
//! interval statistics, singular series, random sieve simulation, sieve
//! special functions, extremal interval sieves, Bonferroni combinatorics and
//! martingale concentration checks.

pub mod brun;
pub mod concentration;
pub mod error;
pub mod interval_sieve;
pub mod keyed;
pub mod lab;
pub mod params;
pub mod prime_engine;
pub mod random_models;
pub mod sieve_functions;
pub mod singular;
pub mod table;

pub use error::{LabError, Result};
