//! Extreme-value statistics of prime gaps. The number line is cut at
//! perfect squares; each interval [m², (m+1)²) keeps the largest gap among
//! those led by its primes (a gap belongs to the interval of its left
//! prime, so every gap is counted exactly once). Dividing by the expected
//! largest gap at n = m² makes the series stationary up to a constant 2c,
//! and the tail of the rescaled series follows a double-exponential law
//! that sharpens to a step at 1. Exceedance counting over all gaps, not
//! just interval maxima, probes how often gaps beat α times their expected
//! extreme size.

use crate::dist::Ccdf;
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSource {
    Real,
    Model { seed: u64 },
    Hardcore { seed: u64 },
}

/// Largest led gap of one square interval; None marks intervals holding
/// fewer than two primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapEntry {
    pub m: u64,
    pub gap: Option<u64>,
}

pub struct GapSeries {
    pub source: GapSource,
    pub limit: u64,
    pub entries: Vec<GapEntry>,
}

/// Gap series after normalization. `normalized` is G/⟨G⟩(m²); `rescaled`
/// additionally divides by the measured mean `two_c` so its own mean is 1.
/// Intervals below m = 3 have no defined expectation and are dropped here.
pub struct NormalizedSeries {
    pub source: GapSource,
    pub limit: u64,
    pub m: Vec<u64>,
    pub raw: Vec<u64>,
    pub normalized: Vec<f64>,
    pub rescaled: Option<Vec<f64>>,
    pub two_c: f64,
}

/// Collect the largest led gap per square interval from an ascending
/// prime iterator capped at `n`.
pub fn largest_gaps<I>(primes: I, n: u64, source: GapSource) -> Result<GapSeries>
where
    I: IntoIterator<Item = u64>,
{
    if n < 9 {
        return Err(Error::InvalidArgument(format!(
            "gap series needs N ≥ 9, got {n}"
        )));
    }
    let m_max = (n - 1).isqrt();
    let mut counts = vec![0u32; (m_max + 1) as usize];
    let mut maxima = vec![0u64; (m_max + 1) as usize];
    let mut prev: Option<u64> = None;
    for p in primes {
        if p > n {
            break;
        }
        let m = p.isqrt();
        if m <= m_max {
            counts[m as usize] += 1;
        }
        if let Some(q) = prev {
            let lead = q.isqrt();
            if lead <= m_max {
                maxima[lead as usize] = maxima[lead as usize].max(p - q);
            }
        }
        prev = Some(p);
    }
    let entries = (1..=m_max)
        .map(|m| GapEntry {
            m,
            gap: (counts[m as usize] >= 2).then(|| maxima[m as usize]),
        })
        .collect();
    Ok(GapSeries {
        source,
        limit: n,
        entries,
    })
}

/// Exact harmonic number up to 10³, the ln + γ form beyond.
fn harmonic(k: u64) -> f64 {
    if k <= 1_000 {
        (1..=k).map(|i| 1.0 / i as f64).sum()
    } else {
        (k as f64).ln() + EULER_GAMMA
    }
}

/// Number of gaps contributing to one interval's extreme at scale n:
/// 2√n/ln n, kept real-valued for analytic curves.
pub fn gap_count_scale(n: f64) -> f64 {
    2.0 * n.sqrt() / n.ln()
}

/// Expected largest gap near n. The asymptotic form is ½ ln² n; the
/// finite-size form replaces one ln n by the harmonic number of
/// N_G = round(2√n/ln n) samples and shifts the other by ½.
pub fn expected_largest_gap(n: u64, finite_size: bool) -> Result<f64> {
    if n < 9 {
        return Err(Error::Domain(format!(
            "expected gap needs n ≥ 9 for N_G ≥ 1, got {n}"
        )));
    }
    let ln_n = (n as f64).ln();
    if !finite_size {
        return Ok(0.5 * ln_n * ln_n);
    }
    let n_g = (gap_count_scale(n as f64).round() as u64).max(1);
    Ok((ln_n - 0.5) * harmonic(n_g))
}

/// Normalize by the expected largest gap at each interval's left edge and
/// measure 2c, the mean of the normalized series.
pub fn normalize(
    series: &GapSeries,
    finite_size: bool,
    rescale_to_unit_mean: bool,
) -> Result<NormalizedSeries> {
    let mut m = Vec::new();
    let mut raw = Vec::new();
    let mut normalized = Vec::new();
    for e in &series.entries {
        let Some(g) = e.gap else { continue };
        if e.m * e.m < 9 {
            continue;
        }
        let expected = expected_largest_gap(e.m * e.m, finite_size)?;
        m.push(e.m);
        raw.push(g);
        normalized.push(g as f64 / expected);
    }
    if normalized.is_empty() {
        return Err(Error::InvalidArgument(
            "no normalizable intervals in series".into(),
        ));
    }
    let two_c = normalized.iter().sum::<f64>() / normalized.len() as f64;
    let rescaled =
        rescale_to_unit_mean.then(|| normalized.iter().map(|&v| v / two_c).collect());
    Ok(NormalizedSeries {
        source: series.source,
        limit: series.limit,
        m,
        raw,
        normalized,
        rescaled,
        two_c,
    })
}

/// Means of the rescaled series over the first and last quartiles of
/// intervals, a stationarity probe.
pub fn quartile_means(series: &NormalizedSeries) -> (f64, f64) {
    let values: Vec<f64> = match &series.rescaled {
        Some(r) => r.clone(),
        None => series.normalized.iter().map(|&v| v / series.two_c).collect(),
    };
    let q = values.len() / 4;
    let head = values[..q].iter().sum::<f64>() / q as f64;
    let tail = values[values.len() - q..].iter().sum::<f64>() / q as f64;
    (head, tail)
}

/// Tail law of the rescaled largest gaps: Prob{Ḡ ≥ g} = 1 − exp(−N_G^{1−g}).
pub fn theory_gap_tail(g: f64, n_g: f64) -> f64 {
    1.0 - (-n_g.powf(1.0 - g)).exp()
}

/// Empirical tail of the rescaled series over intervals with m² in
/// [n_lo, n_hi], plus a small-sample warning when fewer than 100 intervals
/// land in the range. Pair with `theory_gap_tail` at N_G(n_hi).
pub fn gap_ccdf(series: &NormalizedSeries, n_lo: u64, n_hi: u64) -> Result<(Ccdf, bool)> {
    let mut values = Vec::new();
    for (i, &m) in series.m.iter().enumerate() {
        let n = m * m;
        if n >= n_lo && n <= n_hi {
            let v = match &series.rescaled {
                Some(r) => r[i],
                None => series.normalized[i] / series.two_c,
            };
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no intervals with m² in [{n_lo}, {n_hi}]"
        )));
    }
    let warning = values.len() < 100;
    Ok((Ccdf::from_values(values), warning))
}

/// Expected number of gaps up to N that exceed α times their local extreme
/// scale: Σ_{k=2}^{⌊√N⌋} (ln k/k)^{α−1}.
pub fn predicted_exceedances(alpha: f64, n: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let root = n.isqrt();
    let mut acc = 0.0;
    for k in 2..=root {
        acc += ((k as f64).ln() / k as f64).powf(alpha - 1.0);
    }
    Ok(acc)
}

/// Leading-order growth of the predicted count in N.
pub fn exceedance_order(alpha: f64, n: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let ln_n = (n as f64).ln();
    Ok(if alpha < 2.0 {
        (n as f64).powf(1.0 - alpha / 2.0) * ln_n.powf(alpha - 1.0)
    } else if alpha == 2.0 {
        ln_n * ln_n
    } else {
        1.0
    })
}

/// Gap threshold at left prime p: α times the finite-size extreme scale
/// 2c·(ln p − ½)(ln(2√p/ln p) + γ).
pub fn exceedance_threshold(p: u64, alpha: f64, c: f64) -> f64 {
    let ln_p = (p as f64).ln();
    2.0 * alpha * c * (ln_p - 0.5) * (gap_count_scale(p as f64).ln() + EULER_GAMMA)
}

/// Count gaps (over all consecutive prime pairs, not interval maxima) whose
/// left prime is ≤ each checkpoint and whose size beats the α-threshold.
/// Returns one count row per α, one column per checkpoint.
pub fn exceedance_counts<I>(
    primes: I,
    alphas: &[f64],
    checkpoints: &[u64],
    c: f64,
) -> Result<Vec<Vec<u64>>>
where
    I: IntoIterator<Item = u64>,
{
    for &a in alphas {
        check_alpha(a)?;
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be strictly ascending".into(),
        ));
    }
    let mut running = vec![0u64; alphas.len()];
    let mut out = vec![Vec::with_capacity(checkpoints.len()); alphas.len()];
    let mut next_ck = 0;
    let mut prev: Option<u64> = None;
    let last = *checkpoints.last().unwrap_or(&u64::MAX);
    for p in primes {
        if let Some(q) = prev {
            // q is the left prime of this gap
            while next_ck < checkpoints.len() && q > checkpoints[next_ck] {
                for (i, &r) in running.iter().enumerate() {
                    out[i].push(r);
                }
                next_ck += 1;
            }
            if q > last {
                break;
            }
            let gap = (p - q) as f64;
            let base = ((q as f64).ln() - 0.5) * (gap_count_scale(q as f64).ln() + EULER_GAMMA);
            for (i, &a) in alphas.iter().enumerate() {
                if gap > 2.0 * a * c * base {
                    running[i] += 1;
                }
            }
        }
        prev = Some(p);
    }
    while next_ck < checkpoints.len() {
        for (i, &r) in running.iter().enumerate() {
            out[i].push(r);
        }
        next_ck += 1;
    }
    Ok(out)
}

/// Single-α convenience form: empirical count of threshold-beating gaps
/// with left prime ≤ N, and the predicted count.
pub fn count_exceedances<I>(primes: I, alpha: f64, n: u64, c: f64) -> Result<(u64, f64)>
where
    I: IntoIterator<Item = u64>,
{
    let counts = exceedance_counts(primes, &[alpha], &[n], c)?;
    Ok((counts[0][0], predicted_exceedances(alpha, n)?))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0) {
        return Err(Error::Domain(format!("α must be ≥ 1, got {alpha}")));
    }
    Ok(())
}
