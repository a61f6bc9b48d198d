//! Subcommand implementations. Every command resolves its output location
//! (honoring the NATNET_OUT_DIR override for relative paths), writes its
//! CSVs through the shared 12-digit formatter, and finishes by digesting
//! the outputs into a manifest file.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use natnet::bipartite::{BipartiteNetwork, NetworkKind};
use natnet::dist::{self, Ccdf};
use natnet::error::Error as NetError;
use natnet::factor::FactorSieve;
use natnet::gaps::{self, GapSource};
use natnet::meanfield;
use natnet::model::{self, EnsembleSpec, GrowthConfig, Variant};
use natnet::primes::{logarithmic_integral, PrimeStream, PrimeTable};
use natnet::projection;
use natnet::seed::substream;

use crate::fmt::real;
use crate::manifest::Manifest;
use crate::{Failure, FACTOR_SIEVE_CAP};

pub type CmdResult = Result<(), Failure>;

/// Relative paths land under NATNET_OUT_DIR when it is set.
fn resolve(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("NATNET_OUT_DIR") {
        Some(base) => PathBuf::from(base).join(path),
        None => path.to_path_buf(),
    }
}

fn ensure_dir(dir: &Path) -> CmdResult {
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    Ok(())
}

fn open_csv(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Failure::io(path, e))?,
    ))
}

fn finish(
    mut w: BufWriter<File>,
    path: &Path,
    man: &mut Manifest,
) -> CmdResult {
    w.flush().map_err(|e| Failure::io(path, e))?;
    drop(w);
    man.record_file(path).map_err(|e| Failure::io(path, e))?;
    Ok(())
}

/// Powers of ten from `lo` to `limit`, with `limit` appended when it is
/// not itself a power of ten; collapses to just `limit` when limit < lo.
fn decade_checkpoints(lo: u64, limit: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut d = lo;
    while d <= limit {
        v.push(d);
        match d.checked_mul(10) {
            Some(next) => d = next,
            None => break,
        }
    }
    if v.last() != Some(&limit) {
        v.push(limit);
    }
    v
}

/// One streaming sieve pass; returns π at each ascending checkpoint.
fn pi_at_checkpoints(limit: u64, checkpoints: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut count = 0u64;
    let mut next = 0;
    for p in PrimeStream::new(limit) {
        while next < checkpoints.len() && p > checkpoints[next] {
            out.push(count);
            next += 1;
        }
        count += 1;
    }
    while next < checkpoints.len() {
        out.push(count);
        next += 1;
    }
    out
}

pub fn sieve(limit: u64, segment_size: Option<u64>, out: &Path) -> CmdResult {
    if limit < 2 {
        return Err(Failure::Usage("sieve needs --limit ≥ 2".into()));
    }
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("sieve");
    man.param("limit", limit);
    if let Some(s) = segment_size {
        man.param("segment_size", s);
    }

    // segment granularity is one 64-bit word of odd candidates = 128 numbers
    let stream = match segment_size {
        Some(s) => PrimeStream::with_segment_words(limit, ((s / 128).max(1)) as usize),
        None => PrimeStream::new(limit),
    };
    let mut w = open_csv(&out)?;
    writeln!(w, "n,is_prime").map_err(|e| Failure::io(&out, e))?;
    let mut primes = stream.peekable();
    for n in 2..=limit {
        let is_prime = primes.peek() == Some(&n);
        if is_prime {
            primes.next();
        }
        writeln!(w, "{n},{}", u8::from(is_prime)).map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn pi_cmd(limit: u64, points: usize, out: &Path) -> CmdResult {
    if limit < 2 {
        return Err(Failure::Usage("pi needs --limit ≥ 2".into()));
    }
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("pi");
    man.param("limit", limit);
    man.param("points", points);

    let checkpoints = if points <= 1 || limit <= 10 {
        vec![limit]
    } else {
        dist::log_spaced_integers(10, limit, points)
    };
    let counts = pi_at_checkpoints(limit, &checkpoints);
    let mut w = open_csv(&out)?;
    writeln!(w, "N,pi,li,n_over_ln_n").map_err(|e| Failure::io(&out, e))?;
    for (&n, &pi) in checkpoints.iter().zip(&counts) {
        let li = logarithmic_integral(n as f64)?;
        let pnt = n as f64 / (n as f64).ln();
        writeln!(w, "{n},{pi},{},{}", real(li), real(pnt)).map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn arith_dump(limit: u64, out: &Path) -> CmdResult {
    if limit < 2 {
        return Err(Failure::Usage("arith needs --limit ≥ 2".into()));
    }
    if limit > FACTOR_SIEVE_CAP {
        return Err(Failure::Resource(format!(
            "arith dump factorizes every n ≤ N and is capped at N = {FACTOR_SIEVE_CAP}; \
             rerun with a smaller --limit"
        )));
    }
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("arith");
    man.param("limit", limit);

    let sieve = FactorSieve::build(limit)?;
    let mut w = open_csv(&out)?;
    writeln!(w, "n,omega,tau1,sigma1").map_err(|e| Failure::io(&out, e))?;
    for n in 2..=limit {
        let factors = sieve.factorize(n);
        let omega = factors.len();
        let tau1: u64 = factors.iter().map(|&(p, _)| p).sum();
        let mut sigma1: u64 = 1;
        for &(p, m) in &factors {
            // geometric sum 1 + p + ... + p^m
            let mut term = 1u64;
            let mut acc = 1u64;
            for _ in 0..m {
                term *= p;
                acc += term;
            }
            sigma1 *= acc;
        }
        writeln!(w, "{n},{omega},{tau1},{sigma1}").map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn arith_identity(limit: u64) -> CmdResult {
    if limit < 2 {
        return Err(Failure::Usage("arith identity needs --limit ≥ 2".into()));
    }
    let table = PrimeTable::build(limit)?;
    let (lhs, rhs) = natnet::arith::omega_sum_identity(limit, &table)?;
    println!("lhs={lhs} rhs={rhs}");
    let dir = resolve(Path::new(""));
    ensure_dir(&dir)?;
    let mut man = Manifest::new("arith_identity");
    man.param("limit", limit);
    man.param("lhs", lhs);
    man.param("rhs", rhs);
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

fn write_edge_list(
    net: &BipartiteNetwork,
    path: &Path,
    man: &mut Manifest,
) -> CmdResult {
    let mut w = open_csv(path)?;
    let (kind, seed) = match net.kind() {
        NetworkKind::Real => ("real", "NA".to_string()),
        NetworkKind::Model { seed } => ("model", seed.to_string()),
    };
    writeln!(w, "# N={} kind={kind} seed={seed}", net.size()).map_err(|e| Failure::io(path, e))?;
    writeln!(w, "composite,prime,weight").map_err(|e| Failure::io(path, e))?;
    for e in net.edges() {
        writeln!(w, "{},{},{}", e.composite, e.prime, e.weight).map_err(|e| Failure::io(path, e))?;
    }
    finish(w, path, man)
}

fn write_ccdf(path: &Path, ccdf: &Ccdf, man: &mut Manifest) -> CmdResult {
    let mut w = open_csv(path)?;
    writeln!(w, "value,tail_fraction").map_err(|e| Failure::io(path, e))?;
    for (v, tail) in ccdf.points() {
        writeln!(w, "{},{}", real(v), real(tail)).map_err(|e| Failure::io(path, e))?;
    }
    finish(w, path, man)
}

pub fn network(limit: u64, out_dir: &Path) -> CmdResult {
    let dir = resolve(out_dir);
    ensure_dir(&dir)?;
    let mut man = Manifest::new("network");
    man.param("limit", limit);

    let table = PrimeTable::build(limit)?;
    let net = BipartiteNetwork::build_real(limit, &table)?;
    write_edge_list(&net, &dir.join("edges.csv"), &mut man)?;
    let tails = net.measure_tails();
    write_ccdf(&dir.join("kp_ccdf.csv"), &tails.prime_degree, &mut man)?;
    write_ccdf(&dir.join("kc_ccdf.csv"), &tails.comp_degree, &mut man)?;
    write_ccdf(&dir.join("sp_ccdf.csv"), &tails.prime_strength, &mut man)?;
    write_ccdf(&dir.join("sc_ccdf.csv"), &tails.comp_strength, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn project_cmd(limit: u64, out: &Path) -> CmdResult {
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("project");
    man.param("limit", limit);

    let table = PrimeTable::build(limit)?;
    let graph = projection::project(limit, &table)?;
    let mut w = open_csv(&out)?;
    writeln!(w, "p,q,weight").map_err(|e| Failure::io(&out, e))?;
    for e in graph.edges() {
        writeln!(w, "{},{},{}", e.p, e.q, e.weight).map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn clustering_cmd(limit: u64, out: &Path) -> CmdResult {
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("clustering");
    man.param("limit", limit);

    let table = PrimeTable::build(limit)?;
    let curve = projection::clustering_vs_degree(limit, &table)?;
    let mut w = open_csv(&out)?;
    writeln!(w, "k,mean_C,count").map_err(|e| Failure::io(&out, e))?;
    for pt in &curve {
        writeln!(w, "{},{},{}", pt.degree, real(pt.mean_clustering), pt.count)
            .map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn model_run(
    limit: u64,
    runs: u32,
    seed: u64,
    variant: Variant,
    record_edges: bool,
    out_dir: &Path,
) -> CmdResult {
    if record_edges && variant == Variant::Hardcore {
        return Err(Failure::Usage(
            "--record-edges needs the standard variant; the hardcore variant tracks no composites"
                .into(),
        ));
    }
    let dir = resolve(out_dir);
    ensure_dir(&dir)?;
    let mut man = Manifest::new("model_run");
    man.param("limit", limit);
    man.param("runs", runs);
    man.param(
        "variant",
        match variant {
            Variant::Standard => "standard",
            Variant::Hardcore => "hardcore",
        },
    );
    man.param("record_edges", record_edges);
    man.seed(seed);

    let checkpoints = decade_checkpoints(1_000.min(limit), limit);
    let spec = EnsembleSpec {
        base: GrowthConfig {
            n: limit,
            seed,
            variant,
            record_edges: false,
        },
        runs,
        checkpoints: checkpoints.clone(),
        probes: Vec::new(),
        collect_distributions: false,
    };
    let stats = model::ensemble_run(&spec)?;
    let pi_real = pi_at_checkpoints(limit, &checkpoints);

    let path = dir.join("pi_curve.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "N,mean_Pi,std_Pi,pi_real,li").map_err(|e| Failure::io(&path, e))?;
    for (i, &n) in checkpoints.iter().enumerate() {
        let li = logarithmic_integral(n as f64)?;
        writeln!(
            w,
            "{n},{},{},{},{}",
            real(stats.pi_mean[i]),
            real(stats.pi_std[i]),
            pi_real[i],
            real(li)
        )
        .map_err(|e| Failure::io(&path, e))?;
    }
    finish(w, &path, &mut man)?;

    let path = dir.join("epsilon.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "N,mean_eps,std_x").map_err(|e| Failure::io(&path, e))?;
    if variant == Variant::Standard {
        for (i, &n) in checkpoints.iter().enumerate() {
            writeln!(
                w,
                "{n},{},{}",
                real(stats.eps_mean[i]),
                real(stats.sigma_x_mean[i])
            )
            .map_err(|e| Failure::io(&path, e))?;
        }
    }
    finish(w, &path, &mut man)?;

    if record_edges {
        for run in 0..runs {
            let config = GrowthConfig {
                n: limit,
                seed: substream(seed, "model-run", run as u64),
                variant,
                record_edges: true,
            };
            let net = model::grow(&config)?.to_network()?;
            write_edge_list(&net, &dir.join(format!("run_{run}_edges.csv")), &mut man)?;
        }
    }
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn meanfield_cmd(limit: u64, out: &Path) -> CmdResult {
    if limit < 2 {
        return Err(Failure::Usage("meanfield needs --limit ≥ 2".into()));
    }
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("meanfield");
    man.param("limit", limit);

    let rec = meanfield::recurrence_curve(limit)?;
    let (ode, warning) = meanfield::ode_curve(limit.max(4))?;
    if warning {
        eprintln!("note: ODE step-size check flagged reduced accuracy");
    }
    man.param("step_warning", warning);
    let mut w = open_csv(&out)?;
    writeln!(w, "n,P_recurrence,P_ode,one_over_ln_n").map_err(|e| Failure::io(&out, e))?;
    for n in 2..=limit {
        let p_ode = if n >= 4 { ode.value(n) } else { rec.value(n) };
        writeln!(
            w,
            "{n},{},{},{}",
            real(rec.value(n)),
            real(p_ode),
            real(1.0 / (n as f64).ln())
        )
        .map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn erdoskac_cmd(limit: u64, out: &Path) -> CmdResult {
    if limit < 4 {
        return Err(Failure::Usage("erdoskac needs --limit ≥ 4".into()));
    }
    if limit > FACTOR_SIEVE_CAP {
        return Err(Failure::Resource(format!(
            "erdoskac factorizes every composite ≤ N and is capped at N = {FACTOR_SIEVE_CAP}"
        )));
    }
    let out = resolve(out);
    let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
    ensure_dir(&dir)?;
    let mut man = Manifest::new("erdoskac");
    man.param("limit", limit);

    let sieve = FactorSieve::build(limit)?;
    let mut counts: Vec<u64> = Vec::new();
    let mut total = 0u64;
    for n in 4..=limit {
        if sieve.is_prime(n) {
            continue;
        }
        let omega = sieve.distinct_factors(n) as usize;
        if counts.len() <= omega {
            counts.resize(omega + 1, 0);
        }
        counts[omega] += 1;
        total += 1;
    }
    let observed_max = counts.len().saturating_sub(1) as u32;

    // widen the truncation window until the dropped tail is negligible
    let mut omega_max = observed_max.max(8);
    let pmf = loop {
        match meanfield::erdos_kac_pmf(limit, omega_max) {
            Ok(p) => break p,
            Err(NetError::TruncatedMass { .. }) if omega_max < observed_max + 200 => {
                omega_max += 10;
            }
            Err(e) => return Err(e.into()),
        }
    };

    let mut w = open_csv(&out)?;
    writeln!(w, "omega,pmf,empirical").map_err(|e| Failure::io(&out, e))?;
    for omega in 1..=omega_max as usize {
        let empirical = counts.get(omega).copied().unwrap_or(0) as f64 / total as f64;
        writeln!(w, "{omega},{},{}", real(pmf[omega]), real(empirical))
            .map_err(|e| Failure::io(&out, e))?;
    }
    finish(w, &out, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SourceArg {
    Real,
    Model,
    Hardcore,
}

/// The three prime feeds share one shape: an ascending iterator plus a tag.
/// The model source keeps its realization alive across the two passes.
enum Feed {
    Real(u64),
    Model(Box<model::ModelRealization>),
    Hardcore { seed: u64, limit: u64 },
}

impl Feed {
    fn build(source: SourceArg, limit: u64, seed: u64) -> Result<Self, Failure> {
        match source {
            SourceArg::Real => Ok(Feed::Real(limit)),
            SourceArg::Model => {
                if limit > 10_000_000 {
                    return Err(Failure::Resource(format!(
                        "full-model gap series is capped at N = 10^7 (asked {limit}); \
                         use --source hardcore for larger N"
                    )));
                }
                let config = GrowthConfig::new(limit, seed);
                Ok(Feed::Model(Box::new(model::grow(&config)?)))
            }
            SourceArg::Hardcore => Ok(Feed::Hardcore { seed, limit }),
        }
    }

    fn tag(&self, seed: u64) -> GapSource {
        match self {
            Feed::Real(_) => GapSource::Real,
            Feed::Model(_) => GapSource::Model { seed },
            Feed::Hardcore { .. } => GapSource::Hardcore { seed },
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            Feed::Real(limit) => Box::new(PrimeStream::new(*limit)),
            Feed::Model(real) => Box::new(real.primes().iter().copied()),
            Feed::Hardcore { seed, limit } => Box::new(
                model::HardcoreStream::new(*seed, *limit)
                    .filter(|&(_, flag)| flag)
                    .map(|(n, _)| n),
            ),
        }
    }
}

pub fn gaps_cmd(limit: u64, source: SourceArg, seed: u64, out_dir: &Path) -> CmdResult {
    if limit < 9 {
        return Err(Failure::Usage("gaps needs --limit ≥ 9".into()));
    }
    let dir = resolve(out_dir);
    ensure_dir(&dir)?;
    let mut man = Manifest::new("gaps");
    man.param("limit", limit);
    man.param(
        "source",
        match source {
            SourceArg::Real => "real",
            SourceArg::Model => "model",
            SourceArg::Hardcore => "hardcore",
        },
    );
    if source != SourceArg::Real {
        man.seed(seed);
    }

    let feed = Feed::build(source, limit, seed)?;
    let series = gaps::largest_gaps(feed.iter(), limit, feed.tag(seed))?;
    let norm = gaps::normalize(&series, true, true)?;
    write_gap_series(&dir.join("gap_series.csv"), &series, &norm, &mut man)?;

    let window_lo = ((limit as f64) * 0.9) as u64;
    let (ccdf, few) = gaps::gap_ccdf(&norm, window_lo, limit)?;
    if few {
        eprintln!("note: fewer than 100 intervals in the CCDF window; statistics are noisy");
    }
    man.param("ccdf_window_lo", window_lo);
    man.param("two_c", real(norm.two_c));
    let n_g = gaps::gap_count_scale(limit as f64);
    let path = dir.join("gap_ccdf.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "g,empirical_tail,theory_tail").map_err(|e| Failure::io(&path, e))?;
    for (g, tail) in ccdf.points() {
        writeln!(
            w,
            "{},{},{}",
            real(g),
            real(tail),
            real(gaps::theory_gap_tail(g, n_g))
        )
        .map_err(|e| Failure::io(&path, e))?;
    }
    finish(w, &path, &mut man)?;

    let alphas = [1.2, 1.4, 3.0];
    let checkpoints = decade_checkpoints(100_000.min(limit), limit);
    let c = norm.two_c / 2.0;
    let counts = gaps::exceedance_counts(feed.iter(), &alphas, &checkpoints, c)?;
    let path = dir.join("exceed.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "alpha,N,empirical,predicted").map_err(|e| Failure::io(&path, e))?;
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &n) in checkpoints.iter().enumerate() {
            let predicted = gaps::predicted_exceedances(alpha, n)?;
            writeln!(w, "{},{n},{},{}", real(alpha), counts[i][j], real(predicted))
                .map_err(|e| Failure::io(&path, e))?;
        }
    }
    finish(w, &path, &mut man)?;
    man.write(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(())
}

pub fn figure(
    which: &str,
    limit: Option<u64>,
    runs: Option<u32>,
    seed: u64,
    out_dir: &Path,
) -> CmdResult {
    let dir = resolve(out_dir);
    ensure_dir(&dir)?;
    let key = which.to_ascii_uppercase();
    match key.as_str() {
        "2" => fig_pnt(limit.unwrap_or(1_000_000), runs.unwrap_or(100), seed, &dir, true),
        "3" => fig_pnt(limit.unwrap_or(1_000_000), runs.unwrap_or(100), seed, &dir, false),
        "4" => fig_tails(limit.unwrap_or(1_000_000), runs.unwrap_or(100), seed, &dir),
        "5" => fig_gaps(limit.unwrap_or(1_000_000_000), seed, &dir),
        "6" => fig_exceed(limit.unwrap_or(1_000_000_000), &dir),
        "B2" => fig_projection_pmf(limit.unwrap_or(100_000), seed, &dir),
        "B3" => fig_clustering(limit.unwrap_or(100_000), seed, &dir),
        _ => Err(Failure::Usage(format!(
            "unknown figure {which:?}; expected one of 2, 3, 4, 5, 6, B2, B3"
        ))),
    }
}

fn fig_pnt(limit: u64, runs: u32, seed: u64, dir: &Path, counting: bool) -> CmdResult {
    let name = if counting { "figure2" } else { "figure3" };
    let mut man = Manifest::new(name);
    man.param("limit", limit);
    man.param("runs", runs);
    man.seed(seed);

    let checkpoints = decade_checkpoints(1_000.min(limit), limit);
    let spec = EnsembleSpec {
        base: GrowthConfig::new(limit, seed),
        runs,
        checkpoints: checkpoints.clone(),
        probes: Vec::new(),
        collect_distributions: false,
    };
    let stats = model::ensemble_run(&spec)?;

    if counting {
        let pi_real = pi_at_checkpoints(limit, &checkpoints);
        let path = dir.join("fig2.csv");
        let mut w = open_csv(&path)?;
        writeln!(w, "N,pi,Pi_mean,Pi_std,N_over_lnN,relerr_model,relerr_pnt")
            .map_err(|e| Failure::io(&path, e))?;
        for (i, &n) in checkpoints.iter().enumerate() {
            let pi = pi_real[i] as f64;
            let pnt = n as f64 / (n as f64).ln();
            writeln!(
                w,
                "{n},{},{},{},{},{},{}",
                pi_real[i],
                real(stats.pi_mean[i]),
                real(stats.pi_std[i]),
                real(pnt),
                real((stats.pi_mean[i] / pi - 1.0).abs()),
                real((pnt / pi - 1.0).abs())
            )
            .map_err(|e| Failure::io(&path, e))?;
        }
        finish(w, &path, &mut man)?;
    } else {
        let path = dir.join("fig3.csv");
        let mut w = open_csv(&path)?;
        writeln!(w, "N,eps_mean,sigma_x").map_err(|e| Failure::io(&path, e))?;
        for (i, &n) in checkpoints.iter().enumerate() {
            writeln!(
                w,
                "{n},{},{}",
                real(stats.eps_mean[i]),
                real(stats.sigma_x_mean[i])
            )
            .map_err(|e| Failure::io(&path, e))?;
        }
        finish(w, &path, &mut man)?;
    }
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}

/// Union of jump points of several tail curves, ascending.
fn union_points(curves: &[&Ccdf]) -> Vec<f64> {
    let mut values: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points().map(|(v, _)| v))
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

fn fig_tails(limit: u64, runs: u32, seed: u64, dir: &Path) -> CmdResult {
    let mut man = Manifest::new("figure4");
    man.param("limit", limit);
    man.param("runs", runs);
    man.seed(seed);

    let spec = EnsembleSpec {
        base: GrowthConfig::new(limit, seed),
        runs,
        checkpoints: vec![limit],
        probes: Vec::new(),
        collect_distributions: true,
    };
    let stats = model::ensemble_run(&spec)?;
    let model_tails = stats.tails.expect("distributions requested");
    let table = PrimeTable::build(limit)?;
    let real_tails = BipartiteNetwork::build_real(limit, &table)?.measure_tails();

    let pairs = [
        ("fig4_kp.csv", &real_tails.prime_degree, &model_tails.prime_degree),
        ("fig4_kc.csv", &real_tails.comp_degree, &model_tails.comp_degree),
        ("fig4_sp.csv", &real_tails.prime_strength, &model_tails.prime_strength),
        ("fig4_sc.csv", &real_tails.comp_strength, &model_tails.comp_strength),
    ];
    for (name, real_c, model_c) in pairs {
        let path = dir.join(name);
        let mut w = open_csv(&path)?;
        writeln!(w, "value,real_tail,model_tail").map_err(|e| Failure::io(&path, e))?;
        for v in union_points(&[real_c, model_c]) {
            writeln!(
                w,
                "{},{},{}",
                real(v),
                real(real_c.eval(v)),
                real(model_c.eval(v))
            )
            .map_err(|e| Failure::io(&path, e))?;
        }
        finish(w, &path, &mut man)?;
    }
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}

fn write_gap_series(
    path: &Path,
    series: &gaps::GapSeries,
    norm: &gaps::NormalizedSeries,
    man: &mut Manifest,
) -> CmdResult {
    let mut w = open_csv(path)?;
    writeln!(w, "m,n,G,G_norm,G_rescaled").map_err(|e| Failure::io(path, e))?;
    let rescaled = norm.rescaled.as_ref().expect("rescale requested");
    let by_m: HashMap<u64, (f64, f64)> = norm
        .m
        .iter()
        .zip(norm.normalized.iter().zip(rescaled))
        .map(|(&m, (&g, &r))| (m, (g, r)))
        .collect();
    for e in &series.entries {
        let Some(g) = e.gap else { continue };
        match by_m.get(&e.m) {
            Some(&(gn, gr)) => writeln!(w, "{},{},{g},{},{}", e.m, e.m * e.m, real(gn), real(gr)),
            None => writeln!(w, "{},{},{g},,", e.m, e.m * e.m),
        }
        .map_err(|e| Failure::io(path, e))?;
    }
    finish(w, path, man)
}

fn fig_gaps(limit: u64, seed: u64, dir: &Path) -> CmdResult {
    let mut man = Manifest::new("figure5");
    man.param("limit", limit);
    man.seed(seed);

    let real_series = gaps::largest_gaps(PrimeStream::new(limit), limit, GapSource::Real)?;
    let real_norm = gaps::normalize(&real_series, true, true)?;
    let hc_iter = model::HardcoreStream::new(seed, limit)
        .filter(|&(_, flag)| flag)
        .map(|(n, _)| n);
    let hc_series = gaps::largest_gaps(hc_iter, limit, GapSource::Hardcore { seed })?;
    let hc_norm = gaps::normalize(&hc_series, true, true)?;
    man.param("two_c_real", real(real_norm.two_c));
    man.param("two_c_hardcore", real(hc_norm.two_c));

    write_gap_series(&dir.join("fig5_series_real.csv"), &real_series, &real_norm, &mut man)?;
    write_gap_series(
        &dir.join("fig5_series_hardcore.csv"),
        &hc_series,
        &hc_norm,
        &mut man,
    )?;

    let window_lo = ((limit as f64) * 0.9) as u64;
    let (real_ccdf, _) = gaps::gap_ccdf(&real_norm, window_lo, limit)?;
    let (hc_ccdf, _) = gaps::gap_ccdf(&hc_norm, window_lo, limit)?;
    let n_g = gaps::gap_count_scale(limit as f64);
    let n_g_15 = gaps::gap_count_scale(1e15);
    let n_g_25 = gaps::gap_count_scale(1e25);
    let path = dir.join("fig5_ccdf.csv");
    let mut w = open_csv(&path)?;
    writeln!(
        w,
        "g,real_tail,hardcore_tail,theory_tail,theory_tail_1e15,theory_tail_1e25"
    )
    .map_err(|e| Failure::io(&path, e))?;
    for g in union_points(&[&real_ccdf, &hc_ccdf]) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            real(g),
            real(real_ccdf.eval(g)),
            real(hc_ccdf.eval(g)),
            real(gaps::theory_gap_tail(g, n_g)),
            real(gaps::theory_gap_tail(g, n_g_15)),
            real(gaps::theory_gap_tail(g, n_g_25))
        )
        .map_err(|e| Failure::io(&path, e))?;
    }
    finish(w, &path, &mut man)?;
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}

fn fig_exceed(limit: u64, dir: &Path) -> CmdResult {
    let mut man = Manifest::new("figure6");
    man.param("limit", limit);

    let series = gaps::largest_gaps(PrimeStream::new(limit), limit, GapSource::Real)?;
    let norm = gaps::normalize(&series, true, true)?;
    let c = norm.two_c / 2.0;
    man.param("two_c", real(norm.two_c));

    let alphas = [1.2, 1.4, 3.0];
    let checkpoints = decade_checkpoints(100_000.min(limit), limit);
    let counts = gaps::exceedance_counts(PrimeStream::new(limit), &alphas, &checkpoints, c)?;

    let path = dir.join("fig6.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "alpha,N,count_rescaled,fit_slope").map_err(|e| Failure::io(&path, e))?;
    for (i, &alpha) in alphas.iter().enumerate() {
        let rescaled: Vec<(f64, f64)> = checkpoints
            .iter()
            .zip(&counts[i])
            .filter(|&(_, &c)| c > 0)
            .map(|(&n, &c)| (n as f64, c as f64 / (n as f64).ln().powf(alpha - 1.0)))
            .collect();
        let slope = if rescaled.len() >= 2 {
            dist::loglog_slope(&rescaled)
        } else {
            f64::NAN
        };
        for (n, r) in &rescaled {
            writeln!(w, "{},{},{},{}", real(alpha), n, real(*r), real(slope))
                .map_err(|e| Failure::io(&path, e))?;
        }
    }
    finish(w, &path, &mut man)?;
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}

fn fig_projection_pmf(limit: u64, seed: u64, dir: &Path) -> CmdResult {
    let mut man = Manifest::new("figureB2");
    man.param("limit", limit);
    man.seed(seed);

    let table = PrimeTable::build(limit)?;
    let real_pmf = projection::om_degree_distribution(limit, &table)?;
    let config = GrowthConfig {
        n: limit,
        seed,
        variant: Variant::Standard,
        record_edges: true,
    };
    let net = model::grow(&config)?.to_network()?;
    let model_pmf = projection::project_network(&net).measured_degree_pmf();

    let mut keys: Vec<u64> = real_pmf
        .iter()
        .map(|(k, _)| k)
        .chain(model_pmf.iter().map(|(k, _)| k))
        .collect();
    keys.sort_unstable();
    keys.dedup();

    let path = dir.join("fig_b2.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "k,real_pmf,model_pmf").map_err(|e| Failure::io(&path, e))?;
    for k in keys {
        writeln!(
            w,
            "{k},{},{}",
            real(real_pmf.prob(k)),
            real(model_pmf.prob(k))
        )
        .map_err(|e| Failure::io(&path, e))?;
    }
    finish(w, &path, &mut man)?;
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}

fn fig_clustering(limit: u64, seed: u64, dir: &Path) -> CmdResult {
    let mut man = Manifest::new("figureB3");
    man.param("limit", limit);
    man.seed(seed);

    let table = PrimeTable::build(limit)?;
    let real_curve = projection::clustering_vs_degree(limit, &table)?;
    let config = GrowthConfig {
        n: limit,
        seed,
        variant: Variant::Standard,
        record_edges: true,
    };
    let net = model::grow(&config)?.to_network()?;
    let model_curve = projection::project_network(&net).clustering_curve();

    let real_by_k: HashMap<u64, (f64, u64)> = real_curve
        .iter()
        .map(|p| (p.degree, (p.mean_clustering, p.count)))
        .collect();
    let model_by_k: HashMap<u64, (f64, u64)> = model_curve
        .iter()
        .map(|p| (p.degree, (p.mean_clustering, p.count)))
        .collect();
    let mut keys: Vec<u64> = real_by_k.keys().chain(model_by_k.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();

    let path = dir.join("fig_b3.csv");
    let mut w = open_csv(&path)?;
    writeln!(w, "k,real_mean_C,real_count,model_mean_C,model_count")
        .map_err(|e| Failure::io(&path, e))?;
    for k in keys {
        let (rc, rn) = real_by_k
            .get(&k)
            .map(|&(c, n)| (real(c), n.to_string()))
            .unwrap_or_default();
        let (mc, mn) = model_by_k
            .get(&k)
            .map(|&(c, n)| (real(c), n.to_string()))
            .unwrap_or_default();
        writeln!(w, "{k},{rc},{rn},{mc},{mn}").map_err(|e| Failure::io(&path, e))?;
    }
    finish(w, &path, &mut man)?;
    man.write(dir).map_err(|e| Failure::io(dir, e))?;
    Ok(())
}
