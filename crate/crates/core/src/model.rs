//! Sequential random factor-graph growth. Numbers arrive in order; each new
//! n tries to connect to the primes found so far and becomes a new prime
//! exactly when every trial fails. A successful first connection at p opens
//! a divide-and-retry sweep over the residual n/p that emits further factor
//! edges, and whatever residual survives is attached to the nearest known
//! prime. The whole history conditions every later step, so one realization
//! is inherently sequential; independent realizations parallelize freely.
//!
//! The hardcore variant keeps only the primality sequence: n is prime with
//! probability min(1, 1/(ln n − 1)) unless n−1 was prime, in which case
//! never. One uniform is drawn per n ≥ 3 regardless of the n−1 flag, so a
//! flag at n never shifts the draws used by later numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bipartite::{BipartiteNetwork, Edge, NetworkKind, NetworkTails};
use crate::dist::{Ccdf, DiscretePmf};
use crate::error::{Error, Result};
use crate::seed;

const RECORD_EDGE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Hardcore,
}

#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub n: u64,
    pub seed: u64,
    pub variant: Variant,
    pub record_edges: bool,
}

impl GrowthConfig {
    pub fn new(n: u64, seed: u64) -> Self {
        Self {
            n,
            seed,
            variant: Variant::Standard,
            record_edges: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidArgument(format!(
                "growth needs N ≥ 3, got {}",
                self.n
            )));
        }
        if self.record_edges && self.variant == Variant::Standard && self.n > RECORD_EDGE_LIMIT {
            return Err(Error::Resource {
                required: self.n,
                budget: RECORD_EDGE_LIMIT,
            });
        }
        Ok(())
    }
}

/// Factor edges of one composite: exponents of the swept primes plus the
/// terminal residual attachment (weight 1, merged with a factor when equal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeRecord {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
    pub terminal: u64,
}

impl CompositeRecord {
    /// Product of all attached primes with multiplicity.
    pub fn product(&self) -> f64 {
        let mut acc = self.terminal as f64;
        for &(p, m) in &self.factors {
            acc *= (p as f64).powi(m as i32);
        }
        acc
    }

    /// Number of distinct attached primes, terminal included.
    pub fn distinct_count(&self) -> u32 {
        let extra = !self.factors.iter().any(|&(p, _)| p == self.terminal);
        self.factors.len() as u32 + extra as u32
    }
}

/// One full realization: primality flags over [2, N] plus optional
/// composite edge records.
pub struct ModelRealization {
    n: u64,
    seed: u64,
    variant: Variant,
    flag_words: Vec<u64>,
    primes: Vec<u64>,
    composites: Option<Vec<CompositeRecord>>,
}

impl ModelRealization {
    pub fn size(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn is_model_prime(&self, k: u64) -> bool {
        debug_assert!(k <= self.n);
        self.flag_words[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn composites(&self) -> Option<&[CompositeRecord]> {
        self.composites.as_deref()
    }

    /// Π at one point: how many model primes are ≤ k.
    pub fn prime_count(&self, k: u64) -> u64 {
        self.primes.partition_point(|&p| p <= k) as u64
    }

    /// Mean and standard deviation of x = (factor product)/composite over
    /// all recorded composites.
    pub fn factorization_stats(&self) -> Result<(f64, f64)> {
        let recs = self.composites.as_ref().ok_or(Error::MissingEdges)?;
        let mut acc = MeanVar::default();
        for r in recs {
            acc.push(r.product() / r.n as f64);
        }
        Ok((acc.mean(), acc.std()))
    }

    /// View the realization as a bipartite factor graph. The terminal
    /// attachment merges into an existing factor edge when it repeats one.
    pub fn to_network(&self) -> Result<BipartiteNetwork> {
        let recs = self.composites.as_ref().ok_or(Error::MissingEdges)?;
        let mut edges = Vec::new();
        for r in recs {
            let mut merged = false;
            for &(p, m) in &r.factors {
                let w = m + (p == r.terminal) as u32;
                merged |= p == r.terminal;
                edges.push(Edge {
                    composite: r.n,
                    prime: p,
                    weight: w,
                });
            }
            if !merged {
                edges.push(Edge {
                    composite: r.n,
                    prime: r.terminal,
                    weight: 1,
                });
            }
        }
        Ok(BipartiteNetwork::from_edges(
            self.n,
            NetworkKind::Model { seed: self.seed },
            self.primes.clone(),
            edges,
        ))
    }
}

/// The error between composites and their attached factorizations:
/// ε = 1 − ⟨x⟩ and σ_x with x_i = (product of attached primes)/c_i.
/// ε of a single realization may come out negative.
pub fn factorization_error(real: &ModelRealization) -> Result<(f64, f64)> {
    let (mean, std) = real.factorization_stats()?;
    Ok((1.0 - mean, std))
}

/// Π at each checkpoint (checkpoints must not exceed the realization size).
pub fn model_prime_count(real: &ModelRealization, checkpoints: &[u64]) -> Result<Vec<(u64, u64)>> {
    for &c in checkpoints {
        if c > real.size() {
            return Err(Error::InvalidArgument(format!(
                "checkpoint {c} beyond realization size {}",
                real.size()
            )));
        }
    }
    Ok(checkpoints
        .iter()
        .map(|&c| (c, real.prime_count(c)))
        .collect())
}

/// Probability that n is flagged prime in the hardcore variant when n−1
/// was not: min(1, 1/(ln n − 1)). Equals 1 up to n = 15.
pub fn hardcore_prime_probability(n: u64) -> f64 {
    debug_assert!(n >= 3);
    (1.0 / ((n as f64).ln() - 1.0)).min(1.0)
}

/// Streaming hardcore primality sequence, O(1) memory; yields (n, flag)
/// for n = 2..=limit.
pub struct HardcoreStream {
    rng: ChaCha8Rng,
    next_n: u64,
    limit: u64,
    prev: bool,
}

impl HardcoreStream {
    pub fn new(seed: u64, limit: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_n: 2,
            limit,
            prev: false,
        }
    }
}

impl Iterator for HardcoreStream {
    type Item = (u64, bool);

    fn next(&mut self) -> Option<(u64, bool)> {
        if self.next_n > self.limit {
            return None;
        }
        let n = self.next_n;
        self.next_n += 1;
        if n == 2 {
            self.prev = true;
            return Some((2, true));
        }
        let u: f64 = self.rng.gen();
        let flag = !self.prev && u < hardcore_prime_probability(n);
        self.prev = flag;
        Some((n, flag))
    }
}

/// Run the growth process configured by `config`.
pub fn grow(config: &GrowthConfig) -> Result<ModelRealization> {
    config.validate()?;
    match config.variant {
        Variant::Standard => Ok(grow_standard(config, &mut NoStats)),
        Variant::Hardcore => Ok(grow_hardcore(config)),
    }
}

/// Hardcore variant materialized as flags only (no composite records).
pub fn grow_hardcore(config: &GrowthConfig) -> ModelRealization {
    let n = config.n;
    let mut flag_words = vec![0u64; (n / 64 + 1) as usize];
    let mut primes = Vec::new();
    for (k, flag) in HardcoreStream::new(config.seed, n) {
        if flag {
            flag_words[(k / 64) as usize] |= 1 << (k % 64);
            primes.push(k);
        }
    }
    ModelRealization {
        n,
        seed: config.seed,
        variant: Variant::Hardcore,
        flag_words,
        primes,
        composites: None,
    }
}

/// Existing prime nearest to the (real-valued) residual; ties go to the
/// smaller prime.
fn closest_prime(primes: &[u64], residual: f64) -> u64 {
    let j = primes.partition_point(|&p| (p as f64) < residual);
    let below = j.checked_sub(1).map(|i| primes[i]);
    let above = primes.get(j).copied();
    match (below, above) {
        // strict comparison keeps the smaller prime on a tie
        (Some(a), Some(b)) => {
            if b as f64 - residual < residual - a as f64 {
                b
            } else {
                a
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("prime list is never empty"),
    }
}

/// Streaming observer over the growth loop; lets ensemble statistics be
/// collected without storing composite records.
trait GrowObserver {
    fn composite(&mut self, n: u64, x: f64, distinct: u32);
}

struct NoStats;

impl GrowObserver for NoStats {
    fn composite(&mut self, _: u64, _: f64, _: u32) {}
}

fn grow_standard<O: GrowObserver>(config: &GrowthConfig, obs: &mut O) -> ModelRealization {
    let n_max = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut primes: Vec<u64> = vec![2];
    let mut flag_words = vec![0u64; (n_max / 64 + 1) as usize];
    flag_words[0] |= 1 << 2;
    let mut records = config.record_edges.then(Vec::new);

    for n in 3..=n_max {
        let mut first = None;
        for &p in &primes {
            if p * p > n {
                break;
            }
            if rng.gen::<f64>() < 1.0 / p as f64 {
                first = Some(p);
                break;
            }
        }
        let Some(first) = first else {
            flag_words[(n / 64) as usize] |= 1 << (n % 64);
            primes.push(n);
            continue;
        };

        let mut factors: Vec<(u64, u32)> = vec![(first, 1)];
        let mut nprime = n as f64 / first as f64;
        let mut rm = first;
        loop {
            let mut connected = false;
            let start = primes.partition_point(|&p| p < rm);
            for &q in &primes[start..] {
                if (q * q) as f64 > nprime {
                    break;
                }
                if rng.gen::<f64>() < 1.0 / q as f64 {
                    match factors.last_mut() {
                        Some(last) if last.0 == q => last.1 += 1,
                        _ => factors.push((q, 1)),
                    }
                    nprime /= q as f64;
                    rm = q;
                    connected = true;
                    break;
                }
            }
            if !connected || (rm * rm) as f64 > nprime {
                break;
            }
        }
        let terminal = closest_prime(&primes, nprime);

        let mut x = terminal as f64;
        let mut distinct = factors.len() as u32;
        let mut seen_terminal = false;
        for &(p, m) in &factors {
            x *= (p as f64).powi(m as i32);
            seen_terminal |= p == terminal;
        }
        distinct += !seen_terminal as u32;
        obs.composite(n, x / n as f64, distinct);

        if let Some(recs) = &mut records {
            recs.push(CompositeRecord {
                n,
                factors,
                terminal,
            });
        }
    }

    ModelRealization {
        n: n_max,
        seed: config.seed,
        variant: Variant::Standard,
        flag_words,
        primes,
        composites: records,
    }
}

#[derive(Default, Clone, Copy)]
struct MeanVar {
    sum: f64,
    sumsq: f64,
    count: u64,
}

impl MeanVar {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sumsq += x * x;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    fn std(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let m = self.mean();
        (self.sumsq / self.count as f64 - m * m).max(0.0).sqrt()
    }
}

/// Ensemble request: per-run statistics are taken at `checkpoints`
/// (ascending), primality frequencies at `probes`, and full degree and
/// strength tails at the final N when `collect_distributions` is set.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub base: GrowthConfig,
    pub runs: u32,
    pub checkpoints: Vec<u64>,
    pub probes: Vec<u64>,
    pub collect_distributions: bool,
}

/// Per-checkpoint ensemble aggregates. Composite statistics (eps, sigma_x,
/// omega) are empty for the hardcore variant, which tracks no composites.
pub struct EnsembleStats {
    pub runs: u32,
    pub checkpoints: Vec<u64>,
    pub pi_mean: Vec<f64>,
    pub pi_std: Vec<f64>,
    pub eps_mean: Vec<f64>,
    pub eps_std: Vec<f64>,
    pub sigma_x_mean: Vec<f64>,
    pub probes: Vec<u64>,
    pub probe_prime_fraction: Vec<f64>,
    pub omega_pmf: DiscretePmf,
    pub tails: Option<MeanTails>,
}

/// Pointwise means of the four tail functions over all runs.
pub struct MeanTails {
    pub prime_degree: Ccdf,
    pub comp_degree: Ccdf,
    pub prime_strength: Ccdf,
    pub comp_strength: Ccdf,
}

struct CheckpointObserver<'a> {
    checkpoints: &'a [u64],
    next: usize,
    acc: MeanVar,
    eps: Vec<f64>,
    sigma: Vec<f64>,
    omega_counts: Vec<u64>,
}

impl<'a> CheckpointObserver<'a> {
    fn new(checkpoints: &'a [u64]) -> Self {
        Self {
            checkpoints,
            next: 0,
            acc: MeanVar::default(),
            eps: Vec::with_capacity(checkpoints.len()),
            sigma: Vec::with_capacity(checkpoints.len()),
            omega_counts: Vec::new(),
        }
    }

    fn snapshot_until(&mut self, n: u64) {
        while self.next < self.checkpoints.len() && n > self.checkpoints[self.next] {
            self.eps.push(1.0 - self.acc.mean());
            self.sigma.push(self.acc.std());
            self.next += 1;
        }
    }

    fn finish(&mut self) {
        self.snapshot_until(u64::MAX);
    }
}

impl GrowObserver for CheckpointObserver<'_> {
    fn composite(&mut self, n: u64, x: f64, distinct: u32) {
        self.snapshot_until(n);
        self.acc.push(x);
        let k = distinct as usize;
        if self.omega_counts.len() <= k {
            self.omega_counts.resize(k + 1, 0);
        }
        self.omega_counts[k] += 1;
    }
}

struct RunOutcome {
    pi: Vec<u64>,
    eps: Vec<f64>,
    sigma: Vec<f64>,
    probe_flags: Vec<bool>,
    omega_counts: Vec<u64>,
    tails: Option<NetworkTails>,
}

fn run_one(spec: &EnsembleSpec, run: u32) -> Result<RunOutcome> {
    let mut config = spec.base.clone();
    config.seed = seed::substream(spec.base.seed, "model-run", run as u64);
    config.record_edges = spec.collect_distributions;
    let (real, eps, sigma, omega_counts) = match config.variant {
        Variant::Standard => {
            let mut obs = CheckpointObserver::new(&spec.checkpoints);
            let real = grow_standard(&config, &mut obs);
            obs.finish();
            (real, obs.eps, obs.sigma, obs.omega_counts)
        }
        Variant::Hardcore => (grow_hardcore(&config), Vec::new(), Vec::new(), Vec::new()),
    };
    let pi = spec
        .checkpoints
        .iter()
        .map(|&c| real.prime_count(c))
        .collect();
    let probe_flags = spec
        .probes
        .iter()
        .map(|&p| real.is_model_prime(p))
        .collect();
    let tails = if spec.collect_distributions {
        Some(real.to_network()?.measure_tails())
    } else {
        None
    };
    Ok(RunOutcome {
        pi,
        eps,
        sigma,
        probe_flags,
        omega_counts,
        tails,
    })
}

/// Run `spec.runs` independent realizations in parallel and aggregate.
/// Per-run seeds derive from the base seed and the run index alone, and
/// aggregation folds runs in index order, so the result is byte-identical
/// regardless of worker count or scheduling.
pub fn ensemble_run(spec: &EnsembleSpec) -> Result<EnsembleStats> {
    spec.base.validate()?;
    if spec.runs == 0 {
        return Err(Error::InvalidArgument("ensemble needs ≥ 1 run".into()));
    }
    if spec.collect_distributions && spec.base.variant == Variant::Hardcore {
        return Err(Error::InvalidArgument(
            "hardcore variant has no composite edges to measure".into(),
        ));
    }
    if spec.collect_distributions && spec.base.n > RECORD_EDGE_LIMIT {
        return Err(Error::Resource {
            required: spec.base.n,
            budget: RECORD_EDGE_LIMIT,
        });
    }
    for &c in spec.checkpoints.iter().chain(&spec.probes) {
        if c < 2 || c > spec.base.n {
            return Err(Error::InvalidArgument(format!(
                "checkpoint {c} outside [2, {}]",
                spec.base.n
            )));
        }
    }
    if spec.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be strictly ascending".into(),
        ));
    }

    let outcomes: Vec<RunOutcome> = (0..spec.runs)
        .into_par_iter()
        .map(|r| run_one(spec, r))
        .collect::<Result<_>>()?;

    let nc = spec.checkpoints.len();
    let track_composites = spec.base.variant == Variant::Standard;
    let mut pi_acc = vec![MeanVar::default(); nc];
    let mut eps_acc = vec![MeanVar::default(); nc];
    let mut sigma_acc = vec![MeanVar::default(); nc];
    let mut probe_acc = vec![0u64; spec.probes.len()];
    let mut omega_counts: Vec<u64> = Vec::new();
    let mut tail_sets: [Vec<Ccdf>; 4] = Default::default();
    for out in outcomes {
        for (i, &v) in out.pi.iter().enumerate() {
            pi_acc[i].push(v as f64);
        }
        for (i, &v) in out.eps.iter().enumerate() {
            eps_acc[i].push(v);
        }
        for (i, &v) in out.sigma.iter().enumerate() {
            sigma_acc[i].push(v);
        }
        for (i, &f) in out.probe_flags.iter().enumerate() {
            probe_acc[i] += f as u64;
        }
        if omega_counts.len() < out.omega_counts.len() {
            omega_counts.resize(out.omega_counts.len(), 0);
        }
        for (i, &c) in out.omega_counts.iter().enumerate() {
            omega_counts[i] += c;
        }
        if let Some(t) = out.tails {
            tail_sets[0].push(t.prime_degree);
            tail_sets[1].push(t.comp_degree);
            tail_sets[2].push(t.prime_strength);
            tail_sets[3].push(t.comp_strength);
        }
    }

    let total_omega: u64 = omega_counts.iter().sum();
    let omega_pmf = DiscretePmf::from_counts(
        omega_counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(k, &c)| (k as u64, c))
            .collect(),
        total_omega,
    );
    let tails = spec.collect_distributions.then(|| {
        let mut it = tail_sets.into_iter().map(|set| Ccdf::mean_of(&set));
        MeanTails {
            prime_degree: it.next().unwrap(),
            comp_degree: it.next().unwrap(),
            prime_strength: it.next().unwrap(),
            comp_strength: it.next().unwrap(),
        }
    });

    Ok(EnsembleStats {
        runs: spec.runs,
        checkpoints: spec.checkpoints.clone(),
        pi_mean: pi_acc.iter().map(MeanVar::mean).collect(),
        pi_std: pi_acc.iter().map(MeanVar::std).collect(),
        eps_mean: if track_composites {
            eps_acc.iter().map(MeanVar::mean).collect()
        } else {
            Vec::new()
        },
        eps_std: if track_composites {
            eps_acc.iter().map(MeanVar::std).collect()
        } else {
            Vec::new()
        },
        sigma_x_mean: if track_composites {
            sigma_acc.iter().map(MeanVar::mean).collect()
        } else {
            Vec::new()
        },
        probes: spec.probes.clone(),
        probe_prime_fraction: probe_acc
            .iter()
            .map(|&c| c as f64 / spec.runs as f64)
            .collect(),
        omega_pmf,
        tails,
    })
}
