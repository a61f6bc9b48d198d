//! Prime generation and counting: a bit-packed sieve table with O(1) count
//! queries, a memory-flat streaming prime iterator, and the offset
//! logarithmic integral.

use crate::error::{Error, Result};

/// Default segment size in 64-bit words (one word covers 128 integers).
/// 1 << 15 words = 32 KiB per segment, sized for L1 residency.
pub const DEFAULT_SEGMENT_WORDS: usize = 1 << 15;

const DEFAULT_BUDGET_BYTES: u64 = 4 << 30;

/// Queryable primality and prime-counting structure over `[2, limit]`.
///
/// Storage is odd-only: bit `i` of the bitmap stands for the odd number
/// `2i + 1`, set when prime. Per-word cumulative counts give
/// `prime_count` in O(1).
pub struct PrimeTable {
    limit: u64,
    bits: Vec<u64>,
    // counts[w] = number of set bits in bits[..w], i.e. odd primes < 128w + 1
    counts: Vec<u32>,
}

impl PrimeTable {
    /// Sieve `[2, limit]` with the default memory budget.
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_budget(limit, DEFAULT_BUDGET_BYTES)
    }

    /// Sieve `[2, limit]`, failing with the required size if the bitmap plus
    /// count index would exceed `budget_bytes`.
    pub fn build_with_budget(limit: u64, budget_bytes: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "table limit must be at least 2, got {limit}"
            )));
        }
        let words = (limit / 128 + 1) as usize;
        let required = (words as u64) * 12; // 8 bytes bitmap + 4 bytes counts per word
        if required > budget_bytes {
            return Err(Error::Resource {
                required,
                budget: budget_bytes,
            });
        }

        let mut bits = vec![0u64; words];
        sieve_range_odd(&mut bits, 0, limit);

        let mut counts = Vec::with_capacity(words);
        let mut acc = 0u32;
        for &w in &bits {
            counts.push(acc);
            acc += w.count_ones();
        }

        Ok(Self {
            limit,
            bits,
            counts,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Primality of `n`.
    ///
    /// Panics if `n > limit`; use [`PrimeTable::prime_count`] for checked
    /// range handling.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "is_prime({n}) beyond table limit {}", self.limit);
        if n == 2 {
            return true;
        }
        if n < 2 || n % 2 == 0 {
            return false;
        }
        let i = ((n - 1) / 2) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// π(⌊x⌋): number of primes ≤ x. Real-valued argument because the
    /// closed-form network expressions evaluate counts at rationals like N/k.
    pub fn prime_count(&self, x: f64) -> Result<u64> {
        if x > self.limit as f64 {
            return Err(Error::OutOfRange {
                value: x,
                limit: self.limit,
            });
        }
        if x < 2.0 {
            return Ok(0);
        }
        Ok(self.pi(x as u64))
    }

    /// π(n) for integer n ≤ limit (panics beyond; hot-path form).
    pub fn pi(&self, n: u64) -> u64 {
        assert!(n <= self.limit, "pi({n}) beyond table limit {}", self.limit);
        if n < 2 {
            return 0;
        }
        if n == 2 {
            return 1;
        }
        // largest odd ≤ n
        let i = ((n - 1) / 2) as usize;
        let (w, b) = (i / 64, i % 64);
        let partial = (self.bits[w] & (u64::MAX >> (63 - b))).count_ones();
        // +1 for the prime 2
        self.counts[w] as u64 + partial as u64 + 1
    }

    /// Ascending primes of the table.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(2).chain(
            self.bits
                .iter()
                .enumerate()
                .flat_map(|(w, &word)| BitIter { word, base: w * 64 })
                .map(|i| 2 * i as u64 + 1),
        )
    }
}

struct BitIter {
    word: u64,
    base: usize,
}

impl Iterator for BitIter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let tz = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(self.base + tz)
    }
}

/// Sieve the odd numbers covered by `bits[word_lo..]`, which represent
/// `2(64·word_lo + j) + 1`, up to `limit`. Sets bits for primes.
fn sieve_range_odd(bits: &mut [u64], word_lo: usize, limit: u64) {
    let lo_idx = 64 * word_lo as u64; // bit index of first covered odd
    let hi_idx = lo_idx + 64 * bits.len() as u64;
    // start all-set, clear composites and the non-prime 1
    for w in bits.iter_mut() {
        *w = u64::MAX;
    }
    // mask out indices beyond limit: odd 2i+1 ≤ limit ⇔ i ≤ (limit-1)/2
    let max_idx = (limit - 1) / 2;
    if word_lo == 0 {
        bits[0] &= !1u64; // n = 1
    }
    let root = limit.isqrt();
    let base = simple_odd_primes(root);
    for &p in &base {
        // first odd multiple of p at or above max(p², first covered number)
        let start = {
            let lo_n = 2 * lo_idx + 1;
            let mut m = p * p;
            if m < lo_n {
                m = lo_n.div_ceil(p) * p;
                if m % 2 == 0 {
                    m += p;
                }
            }
            m
        };
        let mut idx = (start - 1) / 2;
        while idx < hi_idx {
            let local = (idx - 64 * word_lo as u64) as usize;
            bits[local / 64] &= !(1u64 << (local % 64));
            idx += p; // odd multiples step by 2p, i.e. p in index space
        }
    }
    if max_idx < hi_idx.saturating_sub(1) {
        for idx in (max_idx + 1).max(lo_idx)..hi_idx {
            let local = (idx - 64 * word_lo as u64) as usize;
            bits[local / 64] &= !(1u64 << (local % 64));
        }
    }
}

/// Odd primes ≤ n by a plain sieve (base primes for the segmented passes).
fn simple_odd_primes(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let m = ((n - 1) / 2) as usize; // odd 2i+1 for i in 1..=m
    let mut comp = vec![false; m + 1];
    let mut out = Vec::new();
    for i in 1..=m {
        if comp[i] {
            continue;
        }
        let p = 2 * i as u64 + 1;
        out.push(p);
        let mut j = (p * p - 1) / 2;
        while j <= m as u64 {
            comp[j as usize] = true;
            j += p;
        }
    }
    out
}

/// Ascending prime iterator over `[2, limit]` in flat memory: one segment of
/// the sieve is materialized at a time.
pub struct PrimeStream {
    limit: u64,
    segment_words: usize,
    base: Vec<u64>, // odd primes ≤ √limit
    buf: Vec<u64>,
    buf_pos: usize,
    next_word: u64, // next uncovered word index
    started: bool,
}

impl PrimeStream {
    pub fn new(limit: u64) -> Self {
        Self::with_segment_words(limit, DEFAULT_SEGMENT_WORDS)
    }

    pub fn with_segment_words(limit: u64, segment_words: usize) -> Self {
        assert!(segment_words > 0);
        Self {
            limit,
            segment_words,
            base: simple_odd_primes(limit.isqrt()),
            buf: Vec::new(),
            buf_pos: 0,
            next_word: 0,
            started: false,
        }
    }

    fn fill(&mut self) {
        self.buf.clear();
        self.buf_pos = 0;
        if !self.started {
            self.started = true;
            if self.limit >= 2 {
                self.buf.push(2);
            }
        }
        let total_words = self.limit / 128 + 1;
        while self.buf.is_empty() && self.next_word < total_words {
            let lo = self.next_word as usize;
            let n_words = self.segment_words.min((total_words - self.next_word) as usize);
            let mut seg = vec![0u64; n_words];
            sieve_segment(&mut seg, lo, self.limit, &self.base);
            for (w, &word) in seg.iter().enumerate() {
                let base_idx = (lo + w) * 64;
                let mut word = word;
                while word != 0 {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    self.buf.push(2 * (base_idx + tz) as u64 + 1);
                }
            }
            self.next_word += n_words as u64;
        }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.buf_pos >= self.buf.len() {
            self.fill();
            if self.buf.is_empty() {
                return None;
            }
        }
        let p = self.buf[self.buf_pos];
        self.buf_pos += 1;
        Some(p)
    }
}

/// Segmented inner sieve against precomputed base primes.
fn sieve_segment(bits: &mut [u64], word_lo: usize, limit: u64, base: &[u64]) {
    let lo_idx = 64 * word_lo as u64;
    let hi_idx = lo_idx + 64 * bits.len() as u64;
    for w in bits.iter_mut() {
        *w = u64::MAX;
    }
    if word_lo == 0 {
        bits[0] &= !1u64;
    }
    let lo_n = 2 * lo_idx + 1;
    for &p in base {
        let mut m = p * p;
        if m >= 2 * hi_idx + 1 {
            break;
        }
        if m < lo_n {
            m = lo_n.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
        }
        let mut idx = (m - 1) / 2;
        while idx < hi_idx {
            let local = (idx - lo_idx) as usize;
            bits[local / 64] &= !(1u64 << (local % 64));
            idx += p;
        }
        // the base prime itself may fall inside this segment; restore it
        if p >= lo_n && p <= 2 * hi_idx {
            let pi = (p - 1) / 2;
            if pi >= lo_idx && pi < hi_idx {
                let local = (pi - lo_idx) as usize;
                bits[local / 64] |= 1u64 << (local % 64);
            }
        }
    }
    let max_idx = (limit.max(1) - 1) / 2;
    if max_idx + 1 < hi_idx {
        for idx in (max_idx + 1).max(lo_idx)..hi_idx {
            let local = (idx - lo_idx) as usize;
            bits[local / 64] &= !(1u64 << (local % 64));
        }
    }
}

/// Offset logarithmic integral Li(x) = ∫₂ˣ dt/ln t, adaptive Simpson on the
/// substitution u = ln t (integrand eᵘ/u), relative tolerance ~1e-9.
pub fn logarithmic_integral(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "logarithmic integral defined for x ≥ 2, got {x}"
        )));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let f = |u: f64| u.exp() / u;
    Ok(adaptive_simpson(
        &f,
        2f64.ln(),
        x.ln(),
        1e-9 * x / x.ln(),
        40,
    ))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
