//! The weighted bipartite graph of the integers in `[2, N]`: every composite
//! links to each of its prime factors with the factor's exponent as edge
//! weight. Closed-form degree/strength laws in terms of prime counts are
//! provided next to the measured quantities so both routes can be compared
//! exactly.

use std::collections::BTreeMap;

use crate::dist::{Ccdf, DiscretePmf};
use crate::error::{Error, Result};
use crate::factor::FactorSieve;
use crate::primes::PrimeTable;

const MAX_NETWORK_SIZE: u64 = 10_000_000;

/// Where a network's edges came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    Real,
    Model { seed: u64 },
}

/// One weighted composite→prime edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub composite: u64,
    pub prime: u64,
    pub weight: u32,
}

/// Weighted bipartite factor graph over `[2, N]`.
///
/// Primes are nodes even when isolated (a prime > N/2 has degree 0).
/// Composite degree k_c is the number of distinct primes attached; strength
/// s_c is the total weight. For the real network the weighted product over a
/// composite's edges reconstructs the composite exactly.
pub struct BipartiteNetwork {
    n: u64,
    kind: NetworkKind,
    primes: Vec<u64>,
    prime_degree: Vec<u32>,
    prime_strength: Vec<u64>,
    composites: Vec<u64>,
    comp_degree: Vec<u32>,
    comp_strength: Vec<u32>,
    edges: Vec<Edge>,
}

/// The four empirical tail functions of a bipartite network.
pub struct NetworkTails {
    pub prime_degree: Ccdf,
    pub comp_degree: Ccdf,
    pub prime_strength: Ccdf,
    pub comp_strength: Ccdf,
}

impl BipartiteNetwork {
    /// Factor every composite ≤ N over a smallest-factor sieve.
    pub fn build_real(n: u64, table: &PrimeTable) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!(
                "network needs N ≥ 4, got {n}"
            )));
        }
        if n > MAX_NETWORK_SIZE {
            return Err(Error::Resource {
                required: n.saturating_mul(30),
                budget: MAX_NETWORK_SIZE * 30,
            });
        }
        if n > table.limit() {
            return Err(Error::OutOfRange {
                value: n as f64,
                limit: table.limit(),
            });
        }
        let fs = FactorSieve::build(n)?;
        let mut edges = Vec::new();
        let mut comps = Vec::new();
        for c in 4..=n {
            if fs.is_prime(c) {
                continue;
            }
            comps.push(c);
            for (p, a) in fs.factorize(c) {
                edges.push(Edge {
                    composite: c,
                    prime: p,
                    weight: a,
                });
            }
        }
        Ok(Self::assemble(n, NetworkKind::Real, table, comps, edges))
    }

    /// Build from externally produced edges (one entry per composite), e.g. a
    /// stochastic realization. `prime_nodes` must list every prime node
    /// ascending; edges may only reference those.
    pub fn from_edges(
        n: u64,
        kind: NetworkKind,
        prime_nodes: Vec<u64>,
        mut edges: Vec<Edge>,
    ) -> Self {
        edges.sort_by_key(|e| (e.composite, e.prime));
        let composites: Vec<u64> = {
            let mut cs: Vec<u64> = edges.iter().map(|e| e.composite).collect();
            cs.dedup();
            cs
        };
        let mut s = Self {
            n,
            kind,
            primes: prime_nodes,
            prime_degree: Vec::new(),
            prime_strength: Vec::new(),
            composites,
            comp_degree: Vec::new(),
            comp_strength: Vec::new(),
            edges,
        };
        s.recompute_caches();
        s
    }

    fn assemble(
        n: u64,
        kind: NetworkKind,
        table: &PrimeTable,
        composites: Vec<u64>,
        edges: Vec<Edge>,
    ) -> Self {
        let primes: Vec<u64> = table.primes().take_while(|&p| p <= n).collect();
        let mut s = Self {
            n,
            kind,
            primes,
            prime_degree: Vec::new(),
            prime_strength: Vec::new(),
            composites,
            comp_degree: Vec::new(),
            comp_strength: Vec::new(),
            edges,
        };
        s.recompute_caches();
        s
    }

    fn recompute_caches(&mut self) {
        self.prime_degree = vec![0; self.primes.len()];
        self.prime_strength = vec![0; self.primes.len()];
        self.comp_degree = vec![0; self.composites.len()];
        self.comp_strength = vec![0; self.composites.len()];
        let mut ci = 0;
        for e in &self.edges {
            let pi = self
                .primes
                .binary_search(&e.prime)
                .expect("edge references a non-node prime");
            while self.composites[ci] != e.composite {
                ci += 1;
            }
            self.prime_degree[pi] += 1;
            self.prime_strength[pi] += e.weight as u64;
            self.comp_degree[ci] += 1;
            self.comp_strength[ci] += e.weight;
        }
    }

    pub fn size(&self) -> u64 {
        self.n
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn prime_nodes(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.primes
            .iter()
            .zip(&self.prime_degree)
            .zip(&self.prime_strength)
            .map(|((&p, &d), &s)| (p, d, s))
    }

    pub fn composite_nodes(&self) -> impl Iterator<Item = (u64, u32, u32)> + '_ {
        self.composites
            .iter()
            .zip(&self.comp_degree)
            .zip(&self.comp_strength)
            .map(|((&c, &d), &s)| (c, d, s))
    }

    pub fn degree_of_prime(&self, p: u64) -> Option<u32> {
        self.primes
            .binary_search(&p)
            .ok()
            .map(|i| self.prime_degree[i])
    }

    pub fn strength_of_prime(&self, p: u64) -> Option<u64> {
        self.primes
            .binary_search(&p)
            .ok()
            .map(|i| self.prime_strength[i])
    }

    /// Measured prime-degree histogram as an exact pmf over all prime nodes.
    pub fn measured_prime_degree_pmf(&self) -> DiscretePmf {
        DiscretePmf::from_values(self.prime_degree.iter().map(|&d| d as u64))
    }

    /// Measured composite-degree histogram.
    pub fn measured_composite_degree_pmf(&self) -> DiscretePmf {
        DiscretePmf::from_values(self.comp_degree.iter().map(|&d| d as u64))
    }

    /// Both sides of the exact edge-balance identity: total composite degree
    /// (counted composite-side) and total prime degree (counted prime-side).
    pub fn edge_balance(&self) -> (u64, u64) {
        let lhs: u64 = self.comp_degree.iter().map(|&d| d as u64).sum();
        let rhs: u64 = self.prime_degree.iter().map(|&d| d as u64).sum();
        (lhs, rhs)
    }

    /// Empirical tail functions for degrees and strengths of both classes.
    pub fn measure_tails(&self) -> NetworkTails {
        NetworkTails {
            prime_degree: Ccdf::from_values(self.prime_degree.iter().map(|&d| d as f64)),
            comp_degree: Ccdf::from_values(self.comp_degree.iter().map(|&d| d as f64)),
            prime_strength: Ccdf::from_values(self.prime_strength.iter().map(|&s| s as f64)),
            comp_strength: Ccdf::from_values(self.comp_strength.iter().map(|&s| s as f64)),
        }
    }
}

/// Closed-form degree of a prime in the real network: ⌊N/p⌋ − 1 multiples of
/// p in `[4, N]` excluding p itself.
pub fn prime_degree(p: u64, n: u64, table: &PrimeTable) -> Result<u64> {
    check_prime_arg(p, table)?;
    Ok(n / p - 1)
}

/// Closed-form strength of a prime in the real network: total multiplicity
/// of p over all composites ≤ N, Σ_k ⌊N/p^k⌋ − 1.
pub fn prime_strength(p: u64, n: u64, table: &PrimeTable) -> Result<u64> {
    check_prime_arg(p, table)?;
    let mut acc: u64 = 0;
    let mut q = p;
    loop {
        acc += n / q;
        match q.checked_mul(p) {
            Some(next) if next <= n => q = next,
            _ => break,
        }
    }
    Ok(acc - 1)
}

fn check_prime_arg(p: u64, table: &PrimeTable) -> Result<()> {
    if p > table.limit() || !table.is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not a prime")));
    }
    Ok(())
}

/// Exact prime-degree pmf: P(k) = [π(N/(k+1)) − π(N/(k+2))]/π(N) as integer
/// counts over π(N). Matches the measured histogram of the real network.
pub fn prime_degree_distribution(n: u64, table: &PrimeTable) -> Result<DiscretePmf> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "distribution needs N ≥ 4, got {n}"
        )));
    }
    let total = table.prime_count(n as f64)?;
    let mut counts = BTreeMap::new();
    // degree k belongs to primes in (N/(k+2), N/(k+1)]; the largest degree
    // is N/2 − 1, attained by p = 2
    for k in 0..=(n / 2) {
        let hi = table.prime_count(n as f64 / (k + 1) as f64)?;
        let lo = table.prime_count(n as f64 / (k + 2) as f64)?;
        if hi > lo {
            counts.insert(k, hi - lo);
        }
    }
    Ok(DiscretePmf::from_counts(counts, total))
}

/// Closed-form tail of the prime-strength distribution,
/// π(N/(s+1) + 1)/π(N) ≈ Prob{S > s}. The count argument is clamped to the
/// table limit (only reachable at s = 0 when the table stops exactly at N).
pub fn strength_ccdf_closed_form(s: u64, n: u64, table: &PrimeTable) -> Result<f64> {
    let total = table.prime_count(n as f64)? as f64;
    let x = (n as f64 / (s + 1) as f64 + 1.0).min(table.limit() as f64);
    Ok(table.prime_count(x)? as f64 / total)
}

/// Exact composite-degree pmf over k_c ≥ 1: the count of n ≤ N with ω(n) = k
/// minus the primes at k = 1, over N − 1 − π(N) composites.
pub fn composite_degree_distribution(n: u64, table: &PrimeTable) -> Result<DiscretePmf> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "distribution needs N ≥ 4, got {n}"
        )));
    }
    let fs = FactorSieve::build(n)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for m in 2..=n {
        *counts.entry(fs.distinct_factors(m) as u64).or_insert(0) += 1;
    }
    let pi = table.prime_count(n as f64)?;
    let k1 = counts.get_mut(&1).expect("primes have one factor");
    *k1 -= pi;
    Ok(DiscretePmf::from_counts(counts, n - 1 - pi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: u64) -> PrimeTable {
        PrimeTable::build(n).unwrap()
    }

    #[test]
    fn small_network_edges() {
        let t = table(20);
        let net = BipartiteNetwork::build_real(20, &t).unwrap();
        // 12 = 2² · 3
        let e12: Vec<Edge> = net
            .edges()
            .iter()
            .copied()
            .filter(|e| e.composite == 12)
            .collect();
        assert_eq!(
            e12,
            vec![
                Edge { composite: 12, prime: 2, weight: 2 },
                Edge { composite: 12, prime: 3, weight: 1 }
            ]
        );
        let (c, d, s) = net.composite_nodes().find(|&(c, _, _)| c == 12).unwrap();
        assert_eq!((c, d, s), (12, 2, 3));
        assert_eq!(net.degree_of_prime(2), Some(9));

        let t4 = table(4);
        let n4 = BipartiteNetwork::build_real(4, &t4).unwrap();
        assert_eq!(
            n4.edges(),
            &[Edge { composite: 4, prime: 2, weight: 2 }]
        );
    }

    #[test]
    fn product_reconstructs_composites() {
        let t = table(5_000);
        let net = BipartiteNetwork::build_real(5_000, &t).unwrap();
        let mut product: BTreeMap<u64, u64> = BTreeMap::new();
        for e in net.edges() {
            assert!(t.is_prime(e.prime), "edge endpoint {} not prime", e.prime);
            assert!(!t.is_prime(e.composite));
            *product.entry(e.composite).or_insert(1) *= e.prime.pow(e.weight);
        }
        for (c, prod) in product {
            assert_eq!(c, prod);
        }
        // strength dominates degree on every node
        for (_, d, s) in net.prime_nodes() {
            assert!(s >= d as u64);
        }
        for (_, d, s) in net.composite_nodes() {
            assert!(s >= d);
        }
    }

    #[test]
    fn degree_examples() {
        let t = table(20);
        assert_eq!(prime_degree(7, 20, &t).unwrap(), 1);
        assert_eq!(prime_degree(11, 20, &t).unwrap(), 0);
        assert_eq!(prime_degree(2, 20, &t).unwrap(), 9);
        assert!(prime_degree(6, 20, &t).is_err());
    }

    #[test]
    fn strength_examples() {
        let t = table(20);
        assert_eq!(prime_strength(2, 20, &t).unwrap(), 17);
        assert_eq!(prime_strength(11, 20, &t).unwrap(), 0);
        assert_eq!(prime_strength(3, 20, &t).unwrap(), 7);
    }

    #[test]
    fn degree_pmf_examples() {
        let t = table(20);
        let pmf = prime_degree_distribution(20, &t).unwrap();
        assert_eq!(pmf.count(0), 4); // primes 11, 13, 17, 19
        assert_eq!(pmf.prob(0), 0.5);
        assert_eq!(pmf.count(9), 1); // p = 2
        assert_eq!(pmf.prob(9), 0.125);
        assert!((pmf.mass_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_pmf_matches_histogram() {
        let t = table(3_000);
        for n in [20, 21, 100, 1_000, 2_999] {
            let net = BipartiteNetwork::build_real(n, &t).unwrap();
            assert_eq!(
                prime_degree_distribution(n, &t).unwrap(),
                net.measured_prime_degree_pmf(),
                "pmf mismatch at N = {n}"
            );
        }
    }

    #[test]
    fn composite_degree_pmf() {
        let t = table(20);
        let pmf = composite_degree_distribution(20, &t).unwrap();
        assert_eq!(pmf.count(1), 4); // 4, 8, 9, 16
        assert_eq!(pmf.count(2), 7); // 6, 10, 12, 14, 15, 18, 20
        assert_eq!(pmf.total(), 11);
        assert!((pmf.mass_sum() - 1.0).abs() < 1e-12);

        let net = BipartiteNetwork::build_real(20, &t).unwrap();
        assert_eq!(pmf, net.measured_composite_degree_pmf());
    }

    #[test]
    fn strength_tail_closed_form() {
        let t1k = table(1_000);
        // s = 0 captures all mass
        let v = strength_ccdf_closed_form(0, 1_000, &t1k).unwrap();
        assert!((v - 1.0).abs() < 0.01);
        // tracks the measured strength tail under the ≥ convention
        let n = 100_000;
        let t = table(n);
        let net = BipartiteNetwork::build_real(n, &t).unwrap();
        let tails = net.measure_tails();
        let mut worst: f64 = 0.0;
        for s in 0..2_000u64 {
            let formula = strength_ccdf_closed_form(s, n, &t).unwrap();
            let measured = tails.prime_strength.eval(s as f64);
            worst = worst.max((formula - measured).abs());
        }
        assert!(worst <= 0.05, "sup distance {worst}");
        // tail falls off like 1/s over the decades s ∈ [10, 10^3]
        let t6 = table(1_000_000);
        let pts: Vec<(f64, f64)> = crate::dist::log_spaced_integers(10, 1_000, 25)
            .into_iter()
            .map(|s| {
                let v = strength_ccdf_closed_form(s, 1_000_000, &t6).unwrap();
                (s as f64, v)
            })
            .collect();
        let slope = crate::dist::loglog_slope(&pts);
        assert!((slope + 1.0).abs() <= 0.15, "slope {slope}");
    }

    #[test]
    fn edge_balance_exact() {
        let t = table(2_000);
        for n in [4, 5, 100, 2_000] {
            let net = BipartiteNetwork::build_real(n, &t).unwrap();
            let (lhs, rhs) = net.edge_balance();
            assert_eq!(lhs, rhs, "edge balance at N = {n}");
        }
    }

    #[test]
    fn resource_guard() {
        let t = table(100);
        assert!(matches!(
            BipartiteNetwork::build_real(100_000_000, &t),
            Err(Error::Resource { .. })
        ));
    }
}
