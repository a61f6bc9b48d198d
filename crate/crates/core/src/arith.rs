//! Arithmetic functions expressed through prime counts: divisibility
//! indicators, the distinct-factor count ω and its summatory identity,
//! prime-power sums τ_r, divisor-power sums σ_r, and analytic
//! approximations.

use crate::error::{Error, Result};
use crate::factor::FactorSieve;
use crate::primes::{logarithmic_integral, PrimeTable};

/// 1 iff n/k is an integer and prime, via the count difference
/// π(n/k) − π((n−1)/k).
pub fn phi_indicator(k: u64, n: u64, table: &PrimeTable) -> Result<u64> {
    debug_assert!(k >= 1 && n >= 2);
    let hi = table.prime_count(n as f64 / k as f64)?;
    let lo = table.prime_count((n - 1) as f64 / k as f64)?;
    Ok(hi - lo)
}

/// 1 iff k divides n, via ⌊n/k⌋ − ⌊(n−1)/k⌋.
pub fn psi_indicator(k: u64, n: u64) -> u64 {
    debug_assert!(k >= 1 && n >= 2);
    n / k - (n - 1) / k
}

/// Number of distinct prime factors of n, computed as the full indicator sum
/// Σ_{k=1}^{⌊n/2⌋} [π(n/k) − π((n−1)/k)].
///
/// O(n) count queries per call; this is the tested contract form. Use
/// [`FactorSieve::distinct_factors`] for bulk statistics.
pub fn omega(n: u64, table: &PrimeTable) -> Result<u64> {
    if n as f64 > table.limit() as f64 {
        return Err(Error::OutOfRange {
            value: n as f64,
            limit: table.limit(),
        });
    }
    let mut acc = 0;
    for k in 1..=(n / 2) {
        acc += phi_indicator(k, n, table)?;
    }
    Ok(acc)
}

/// Both sides of the summatory identity
/// Σ_{n=2}^{N} ω(n) = Σ_{i=1}^{⌊N/2⌋} π(N/i),
/// evaluated by independent routes: the left by direct factor counting over
/// a factor sieve, the right by count queries at rational points.
pub fn omega_sum_identity(n: u64, table: &PrimeTable) -> Result<(u64, u64)> {
    if n > table.limit() {
        return Err(Error::OutOfRange {
            value: n as f64,
            limit: table.limit(),
        });
    }
    let fs = FactorSieve::build(n)?;
    let lhs: u64 = (2..=n).map(|m| fs.distinct_factors(m) as u64).sum();
    let mut rhs = 0;
    for i in 1..=(n / 2) {
        rhs += table.prime_count(n as f64 / i as f64)?;
    }
    Ok((lhs, rhs))
}

/// Sum of the distinct prime factors of n, each raised to the r-th power.
/// τ_0 = ω. Fails with an overflow error when p^r or the sum leaves u64.
pub fn tau_r(n: u64, r: u32, table: &PrimeTable) -> Result<u64> {
    if n > table.limit() {
        return Err(Error::OutOfRange {
            value: n as f64,
            limit: table.limit(),
        });
    }
    debug_assert!(n >= 2);
    let mut acc: u64 = 0;
    let mut m = n;
    for p in table.primes() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            acc = add_pow(acc, p, r)?;
            while m % p == 0 {
                m /= p;
            }
        }
    }
    if m > 1 {
        acc = add_pow(acc, m, r)?;
    }
    Ok(acc)
}

fn add_pow(acc: u64, base: u64, r: u32) -> Result<u64> {
    let term = base
        .checked_pow(r)
        .ok_or(Error::Overflow("prime power p^r"))?;
    acc.checked_add(term)
        .ok_or(Error::Overflow("prime power sum"))
}

/// Sum of all divisors of n raised to the r-th power; σ_0 counts divisors.
/// Equal by construction to Σ_{k=1}^{n} k^r ψ(k; n).
pub fn sigma_r(n: u64, r: u32) -> Result<u64> {
    debug_assert!(n >= 2);
    let mut acc: u64 = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            acc = add_div_pow(acc, d, r)?;
            let q = n / d;
            if q != d {
                acc = add_div_pow(acc, q, r)?;
            }
        }
        d += 1;
    }
    Ok(acc)
}

fn add_div_pow(acc: u64, d: u64, r: u32) -> Result<u64> {
    let term = d
        .checked_pow(r)
        .ok_or(Error::Overflow("divisor power d^r"))?;
    acc.checked_add(term)
        .ok_or(Error::Overflow("divisor power sum"))
}

/// Analytic approximation of τ_r: ln ln n − ln ln 2 for r = 0, otherwise the
/// definite integral of 1/ln t from 2^r to n^r.
pub fn tau_r_approx(n: u64, r: u32) -> Result<f64> {
    if r == 0 {
        if n < 3 {
            return Err(Error::Domain(format!(
                "tau_0 approximation needs n ≥ 3, got {n}"
            )));
        }
        return Ok((n as f64).ln().ln() - 2f64.ln().ln());
    }
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    let hi = (n as f64).powi(r as i32);
    let lo = 2f64.powi(r as i32);
    Ok(logarithmic_integral(hi)? - logarithmic_integral(lo)?)
}
