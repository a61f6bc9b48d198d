//! Computational laboratory for the multiplicative structure of the natural
//! numbers, seen as a weighted bipartite network: composites link to their
//! prime factors with exponent weights.
//!
//! The crate provides:
//! - prime sieving, counting, and streaming up to 10^9 ([`primes`]);
//! - exact arithmetic functions and their analytic approximations ([`arith`]);
//! - the real bipartite network, its closed-form degree/strength laws, and
//!   the prime–prime one-mode projection with clustering ([`bipartite`],
//!   [`projection`]);
//! - a parameter-free stochastic growth model that generates random primes
//!   and factorizations, plus a hard-core variant ([`model`]);
//! - mean-field prime-probability curves and a Poisson limit for the number
//!   of distinct factors ([`meanfield`]);
//! - extreme-value statistics of prime gaps per square interval, with
//!   normalization, tail laws, and threshold-exceedance counts ([`gaps`]).

pub mod arith;
pub mod bipartite;
pub mod dist;
pub mod error;
pub mod factor;
pub mod gaps;
pub mod meanfield;
pub mod model;
pub mod primes;
pub mod projection;
pub mod seed;

pub use error::{Error, Result};
pub use primes::{logarithmic_integral, PrimeStream, PrimeTable};
