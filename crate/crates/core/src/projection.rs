//! One-mode projection of the factor graph onto the primes: p and q are
//! linked with weight equal to their number of shared composites, and a
//! prime carries a self-loop when some composite contains it at least
//! twice. For the real network both quantities collapse to floor
//! divisions, which gives closed forms for degree, strength and
//! clustering; the same measurements run on any projected graph so model
//! realizations can be compared against the formulas.

use std::collections::{BTreeMap, HashMap};

use crate::bipartite::{BipartiteNetwork, NetworkKind};
use crate::dist::DiscretePmf;
use crate::error::{Error, Result};
use crate::primes::PrimeTable;

const MAX_PROJECTION_SIZE: u64 = 10_000_000;

/// Undirected weighted edge with `p ≤ q`; `p == q` is a self-loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjEdge {
    pub p: u64,
    pub q: u64,
    pub weight: u64,
}

/// Point of a clustering-vs-degree curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub degree: u64,
    pub mean_clustering: f64,
    pub count: u64,
}

/// Weighted prime graph with self-loops. Adjacency lists are rank-sorted;
/// a self-loop appears once in its own list, so `adj[i].len()` is the
/// degree convention used throughout (self-loop counted once).
pub struct ProjectionGraph {
    n: u64,
    kind: NetworkKind,
    primes: Vec<u64>,
    adj: Vec<Vec<(u32, u64)>>,
}

impl ProjectionGraph {
    pub fn size(&self) -> u64 {
        self.n
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.primes.len()
    }

    pub fn prime(&self, rank: usize) -> u64 {
        self.primes[rank]
    }

    pub fn degree(&self, rank: usize) -> u64 {
        self.adj[rank].len() as u64
    }

    pub fn strength(&self, rank: usize) -> u64 {
        self.adj[rank].iter().map(|&(_, w)| w).sum()
    }

    /// Edges with p ≤ q, ascending; self-loops included once.
    pub fn edges(&self) -> Vec<ProjEdge> {
        let mut out = Vec::new();
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, w) in list {
                if j as usize >= i {
                    out.push(ProjEdge {
                        p: self.primes[i],
                        q: self.primes[j as usize],
                        weight: w,
                    });
                }
            }
        }
        out
    }

    /// Clustering of one node under the self-loop-aware link count: with m
    /// proper neighbors the universe is the m(m+1)/2 neighbor pairs plus
    /// neighbor self-loops. None when the degree is below 2.
    pub fn measured_clustering(&self, rank: usize) -> Option<f64> {
        let mut marked = vec![false; self.primes.len()];
        self.clustering_with_buf(rank, &mut marked)
    }

    fn clustering_with_buf(&self, rank: usize, marked: &mut [bool]) -> Option<f64> {
        if self.adj[rank].len() < 2 {
            return None;
        }
        let nbrs: Vec<u32> = self.adj[rank]
            .iter()
            .map(|&(r, _)| r)
            .filter(|&r| r as usize != rank)
            .collect();
        let m = nbrs.len() as u64;
        for &q in &nbrs {
            marked[q as usize] = true;
        }
        let mut links = 0u64;
        for &q in &nbrs {
            for &(r, _) in &self.adj[q as usize] {
                if r == q || (r > q && r as usize != rank && marked[r as usize]) {
                    links += 1;
                }
            }
        }
        for &q in &nbrs {
            marked[q as usize] = false;
        }
        Some(links as f64 / (m * (m + 1) / 2) as f64)
    }

    /// Mean measured clustering grouped by degree, ascending in degree.
    /// Degree-0 and degree-1 nodes are skipped.
    pub fn clustering_curve(&self) -> Vec<CurvePoint> {
        let mut marked = vec![false; self.primes.len()];
        let mut acc: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
        for i in 0..self.primes.len() {
            if let Some(c) = self.clustering_with_buf(i, &mut marked) {
                let e = acc.entry(self.adj[i].len() as u64).or_insert((0.0, 0));
                e.0 += c;
                e.1 += 1;
            }
        }
        acc.into_iter()
            .map(|(degree, (sum, count))| CurvePoint {
                degree,
                mean_clustering: sum / count as f64,
                count,
            })
            .collect()
    }

    pub fn measured_degree_pmf(&self) -> DiscretePmf {
        DiscretePmf::from_values((0..self.primes.len()).map(|i| self.degree(i)))
    }
}

/// Project the real factor graph of `[2, N]`: p and q are linked iff
/// pq ≤ N with weight ⌊N/(pq)⌋, and p loops on itself iff p² ≤ N.
pub fn project(n: u64, table: &PrimeTable) -> Result<ProjectionGraph> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "projection needs N ≥ 4, got {n}"
        )));
    }
    if n > MAX_PROJECTION_SIZE {
        return Err(Error::Resource {
            required: n,
            budget: MAX_PROJECTION_SIZE,
        });
    }
    if n > table.limit() {
        return Err(Error::OutOfRange {
            value: n as f64,
            limit: table.limit(),
        });
    }
    let primes: Vec<u64> = table.primes().take_while(|&p| p <= n).collect();
    let mut adj: Vec<Vec<(u32, u64)>> = vec![Vec::new(); primes.len()];
    for i in 0..primes.len() {
        let p = primes[i];
        if p * p > n {
            break;
        }
        for j in i..primes.len() {
            let q = primes[j];
            if p * q > n {
                break;
            }
            let w = n / (p * q);
            adj[i].push((j as u32, w));
            if j != i {
                adj[j].push((i as u32, w));
            }
        }
    }
    Ok(ProjectionGraph {
        n,
        kind: NetworkKind::Real,
        primes,
        adj,
    })
}

/// Project any bipartite factor graph by counting shared composites per
/// prime pair; a composite holding p with multiplicity ≥ 2 feeds p's
/// self-loop. On the real network this reproduces `project` exactly.
pub fn project_network(net: &BipartiteNetwork) -> ProjectionGraph {
    let primes: Vec<u64> = net.prime_nodes().map(|(p, _, _)| p).collect();
    let rank: HashMap<u64, u32> = primes
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i as u32))
        .collect();
    let mut weights: HashMap<(u32, u32), u64> = HashMap::new();
    let edges = net.edges();
    let mut lo = 0;
    while lo < edges.len() {
        let c = edges[lo].composite;
        let mut hi = lo;
        while hi < edges.len() && edges[hi].composite == c {
            hi += 1;
        }
        let group = &edges[lo..hi];
        for (a, ea) in group.iter().enumerate() {
            let ra = rank[&ea.prime];
            if ea.weight >= 2 {
                *weights.entry((ra, ra)).or_insert(0) += 1;
            }
            for eb in &group[a + 1..] {
                let rb = rank[&eb.prime];
                let key = if ra <= rb { (ra, rb) } else { (rb, ra) };
                *weights.entry(key).or_insert(0) += 1;
            }
        }
        lo = hi;
    }
    let mut adj: Vec<Vec<(u32, u64)>> = vec![Vec::new(); primes.len()];
    for (&(a, b), &w) in &weights {
        adj[a as usize].push((b, w));
        if a != b {
            adj[b as usize].push((a, w));
        }
    }
    for list in &mut adj {
        list.sort_unstable_by_key(|&(r, _)| r);
    }
    ProjectionGraph {
        n: net.size(),
        kind: net.kind(),
        primes,
        adj,
    }
}

/// Projected degree of p in the real graph: π(N/p), self-loop included.
pub fn om_degree(p: u64, n: u64, table: &PrimeTable) -> Result<u64> {
    check_prime(p, n, table)?;
    table.prime_count(n as f64 / p as f64)
}

/// Projected strength of p in the real graph: Σ_{i ≤ π(N/p)} ⌊N/(p·p_i)⌋.
pub fn om_strength(p: u64, n: u64, table: &PrimeTable) -> Result<u64> {
    check_prime(p, n, table)?;
    let mut acc = 0;
    for q in table.primes() {
        if p * q > n {
            break;
        }
        acc += n / (p * q);
    }
    Ok(acc)
}

/// Exact degree pmf of the real projection: the count at degree k ≥ 1 is
/// π(N/p_k) − π(N/p_{k+1}) over the k-th and (k+1)-th primes, and the
/// count at k = 0 is π(N) − π(N/2).
pub fn om_degree_distribution(n: u64, table: &PrimeTable) -> Result<DiscretePmf> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "distribution needs N ≥ 4, got {n}"
        )));
    }
    let total = table.prime_count(n as f64)?;
    let ps: Vec<u64> = table.primes().take_while(|&p| p <= n / 2).collect();
    let next = table
        .primes()
        .find(|&p| p > n / 2)
        .expect("a prime always exists in (N/2, N]");
    let mut counts = BTreeMap::new();
    let c0 = total - table.prime_count(n as f64 / 2.0)?;
    if c0 > 0 {
        counts.insert(0, c0);
    }
    for (idx, &pk) in ps.iter().enumerate() {
        let pk1 = ps.get(idx + 1).copied().unwrap_or(next);
        let hi = table.prime_count(n as f64 / pk as f64)?;
        let lo = table.prime_count(n as f64 / pk1 as f64)?;
        if hi > lo {
            counts.insert((idx + 1) as u64, hi - lo);
        }
    }
    Ok(DiscretePmf::from_counts(counts, total))
}

/// Closed-form clustering of p in the real projection. Above √N every
/// neighbor pair multiplies below N, so the neighborhood is fully linked;
/// below √N the realized links split into neighbor self-loops, links from
/// neighbors smaller than p, and links among neighbors larger than p.
/// None when the degree is below 2.
pub fn clustering(p: u64, n: u64, table: &PrimeTable) -> Result<Option<f64>> {
    check_prime(p, n, table)?;
    let deg = table.prime_count(n as f64 / p as f64)?;
    if deg < 2 {
        return Ok(None);
    }
    if p * p >= n {
        return Ok(Some(1.0));
    }
    let sqrt_pi = table.prime_count((n as f64).sqrt())?;
    let rank_p = table.prime_count(p as f64)?;
    let l_sl = sqrt_pi - 1;
    let l_less = (rank_p - 1) * (2 * (deg - 1) - rank_p) / 2;
    let mut l_greater = 0;
    for (j, q) in table.primes().enumerate() {
        let j = j as u64 + 1;
        if j > sqrt_pi {
            break;
        }
        if j > rank_p {
            l_greater += table.prime_count(n as f64 / q as f64)? - j;
        }
    }
    let kk = deg - 1;
    let l_max = kk * (kk + 1) / 2;
    Ok(Some((l_sl + l_less + l_greater) as f64 / l_max as f64))
}

/// Closed-form clustering-vs-degree curve of the real projection.
pub fn clustering_vs_degree(n: u64, table: &PrimeTable) -> Result<Vec<CurvePoint>> {
    if n > 1_000_000 {
        return Err(Error::Resource {
            required: n,
            budget: 1_000_000,
        });
    }
    let mut acc: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for p in table.primes().take_while(|&p| p <= n / 3) {
        let deg = table.prime_count(n as f64 / p as f64)?;
        if let Some(c) = clustering(p, n, table)? {
            let e = acc.entry(deg).or_insert((0.0, 0));
            e.0 += c;
            e.1 += 1;
        }
    }
    Ok(acc
        .into_iter()
        .map(|(degree, (sum, count))| CurvePoint {
            degree,
            mean_clustering: sum / count as f64,
            count,
        })
        .collect())
}

/// Largest pointwise gap between two curves over their common degrees.
pub fn curve_sup_distance(a: &[CurvePoint], b: &[CurvePoint]) -> f64 {
    let bm: BTreeMap<u64, f64> = b.iter().map(|c| (c.degree, c.mean_clustering)).collect();
    let mut sup: f64 = 0.0;
    for c in a {
        if let Some(&v) = bm.get(&c.degree) {
            sup = sup.max((c.mean_clustering - v).abs());
        }
    }
    sup
}

fn check_prime(p: u64, n: u64, table: &PrimeTable) -> Result<()> {
    if p > n || p > table.limit() || !table.is_prime(p) {
        return Err(Error::InvalidArgument(format!(
            "{p} is not a prime within range"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: u64) -> PrimeTable {
        PrimeTable::build(n).unwrap()
    }

    fn edge_weight(g: &ProjectionGraph, p: u64, q: u64) -> Option<u64> {
        g.edges()
            .into_iter()
            .find(|e| (e.p, e.q) == (p.min(q), p.max(q)))
            .map(|e| e.weight)
    }

    #[test]
    fn small_projection_edges() {
        let t = table(20);
        let g = project(20, &t).unwrap();
        assert_eq!(edge_weight(&g, 2, 3), Some(3)); // 6, 12, 18
        assert_eq!(edge_weight(&g, 3, 7), None); // 21 > 20
        assert_eq!(edge_weight(&g, 2, 2), Some(5)); // 4, 8, 12, 16, 20
        assert_eq!(edge_weight(&g, 3, 3), Some(2)); // 9, 18
        assert_eq!(edge_weight(&g, 5, 5), None); // 25 > 20
    }

    #[test]
    fn clique_below_sqrt() {
        let t = table(289);
        let g = project(289, &t).unwrap();
        let small: Vec<u64> = t.primes().take_while(|&p| p * p <= 289).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17]);
        for (a, &p) in small.iter().enumerate() {
            for &q in &small[a..] {
                assert!(edge_weight(&g, p, q).is_some(), "missing ({p},{q})");
            }
        }
    }

    #[test]
    fn degree_examples() {
        let t = table(20);
        assert_eq!(om_degree(2, 20, &t).unwrap(), 4);
        assert_eq!(om_degree(19, 20, &t).unwrap(), 0);
        assert_eq!(om_degree(5, 20, &t).unwrap(), 2);
        assert!(om_degree(4, 20, &t).is_err());
    }

    #[test]
    fn strength_examples() {
        let t = table(20);
        assert_eq!(om_strength(2, 20, &t).unwrap(), 11);
        assert_eq!(om_strength(19, 20, &t).unwrap(), 0);
        assert_eq!(om_strength(3, 20, &t).unwrap(), 6);
    }

    #[test]
    fn degree_strength_match_graph() {
        let t = table(500);
        let g = project(500, &t).unwrap();
        for i in 0..g.node_count() {
            let p = g.prime(i);
            assert_eq!(om_degree(p, 500, &t).unwrap(), g.degree(i), "degree of {p}");
            assert_eq!(
                om_strength(p, 500, &t).unwrap(),
                g.strength(i),
                "strength of {p}"
            );
        }
    }

    #[test]
    fn degree_pmf() {
        let t = table(300);
        let pmf = om_degree_distribution(20, &t).unwrap();
        assert_eq!(pmf.count(0), 4); // 11, 13, 17, 19
        assert_eq!(pmf.prob(0), 0.5);
        assert!((pmf.mass_sum() - 1.0).abs() < 1e-12);
        for n in [20, 21, 100, 299] {
            let g = project(n, &t).unwrap();
            assert_eq!(
                om_degree_distribution(n, &t).unwrap(),
                g.measured_degree_pmf(),
                "pmf vs measured at N = {n}"
            );
        }
        let t289 = table(289);
        let pmf = om_degree_distribution(289, &t289).unwrap();
        assert_eq!(pmf.count(7), 1); // p = 17 alone has π(289/17) = 7
    }

    #[test]
    fn weights_count_shared_composites() {
        let n = 300;
        let t = table(n);
        let g = project(n, &t).unwrap();
        for e in g.edges() {
            let brute = (2..=n)
                .filter(|&c| !t.is_prime(c) && c % e.p == 0 && c % e.q == 0)
                .count() as u64;
            let brute = if e.p == e.q {
                (2..=n)
                    .filter(|&c| !t.is_prime(c) && c % (e.p * e.p) == 0)
                    .count() as u64
            } else {
                brute
            };
            assert_eq!(e.weight, brute, "weight of ({}, {})", e.p, e.q);
        }
    }

    #[test]
    fn clustering_examples() {
        let t20 = table(20);
        let c = clustering(2, 20, &t20).unwrap().unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);

        let t169 = table(169);
        assert_eq!(clustering(13, 169, &t169).unwrap(), Some(1.0));
        let t289 = table(289);
        assert_eq!(clustering(17, 289, &t289).unwrap(), Some(1.0));

        // degree below 2 is undefined
        assert_eq!(clustering(19, 20, &t20).unwrap(), None); // degree 0
        assert_eq!(clustering(7, 20, &t20).unwrap(), None); // only neighbor 2
    }

    #[test]
    fn clustering_closed_form_matches_measured() {
        for n in [20, 100, 500, 1000] {
            let t = table(n);
            let g = project(n, &t).unwrap();
            for i in 0..g.node_count() {
                let p = g.prime(i);
                let formula = clustering(p, n, &t).unwrap();
                let measured = g.measured_clustering(i);
                match (formula, measured) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        assert!((a - b).abs() < 1e-12, "C({p}) at N={n}: {a} vs {b}");
                        assert!((0.0..=1.0).contains(&a));
                    }
                    _ => panic!("definedness mismatch for p={p}, N={n}"),
                }
            }
        }
    }

    #[test]
    fn projection_routes_agree() {
        for n in [20, 100, 1000] {
            let t = table(n);
            let direct = project(n, &t).unwrap();
            let via_network =
                project_network(&BipartiteNetwork::build_real(n, &t).unwrap());
            assert_eq!(direct.edges(), via_network.edges(), "edges at N = {n}");
        }
    }

    #[test]
    fn curve_shape() {
        let t = table(500);
        let curve = clustering_vs_degree(500, &t).unwrap();
        assert!(!curve.is_empty());
        // primes above √N close every triangle
        for pt in &curve {
            assert!(pt.mean_clustering > 0.0 && pt.mean_clustering <= 1.0);
        }
        // degree 2 nodes here are small-k primes above √N, fully linked
        let d2 = curve.iter().find(|pt| pt.degree == 2).unwrap();
        assert_eq!(d2.mean_clustering, 1.0);

        // identical call is identical output
        assert_eq!(curve, clustering_vs_degree(500, &t).unwrap());

        // measured curve of the same graph matches the closed-form curve
        let g = project(500, &t).unwrap();
        let measured = g.clustering_curve();
        assert_eq!(curve.len(), measured.len());
        assert!(curve_sup_distance(&curve, &measured) < 1e-12);
    }
}
