//! Smallest-prime-factor sieve for bulk factorization. The linear sieve
//! marks each integer exactly once, so construction is O(N).

use crate::error::{Error, Result};

/// Factorization table over `[2, limit]`: O(log n) factorization queries
/// backed by a smallest-prime-factor array.
pub struct FactorSieve {
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "factor sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "factor sieve limit {limit} exceeds u32 range"
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                if p > spf[i] || (i as u64) * (p as u64) > limit {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        self.spf.len() as u64 - 1
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        debug_assert!(n >= 2);
        self.spf[n as usize] as u64
    }

    /// Prime factorization as ascending `(prime, multiplicity)` pairs.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        out
    }

    /// Number of distinct prime factors.
    pub fn distinct_factors(&self, n: u64) -> u32 {
        let mut m = n;
        let mut count = 0;
        while m > 1 {
            let p = self.spf[m as usize];
            count += 1;
            while m % p as u64 == 0 {
                m /= p as u64;
            }
        }
        count
    }

    /// Number of prime factors with multiplicity.
    pub fn total_factors(&self, n: u64) -> u32 {
        let mut m = n;
        let mut count = 0;
        while m > 1 {
            m /= self.spf[m as usize] as u64;
            count += 1;
        }
        count
    }
}
