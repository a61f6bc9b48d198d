//! Distribution plumbing shared by the network and gap modules: exact
//! integer-count pmfs, empirical tail functions with the `Prob{X ≥ x}`
//! convention, sup-distance, and log-log tail-slope fitting.

use std::collections::BTreeMap;

/// Discrete pmf stored as exact integer counts over u64 values, so
/// closed-form counts can be compared with measured histograms without
/// floating-point tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretePmf {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl DiscretePmf {
    pub fn from_counts(counts: BTreeMap<u64, u64>, total: u64) -> Self {
        debug_assert!(counts.values().sum::<u64>() <= total);
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Self { counts, total }
    }

    pub fn from_values(values: impl IntoIterator<Item = u64>) -> Self {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut total = 0;
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
            total += 1;
        }
        Self { counts, total }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn prob(&self, value: u64) -> f64 {
        self.count(value) as f64 / self.total as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn mass_sum(&self) -> f64 {
        self.counts.values().sum::<u64>() as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&v, &c)| v as f64 * c as f64)
            .sum::<f64>()
            / self.total as f64
    }

    /// Empirical tail function of this pmf.
    pub fn ccdf(&self) -> Ccdf {
        Ccdf::from_counts(self.counts.iter().map(|(&v, &c)| (v as f64, c)))
    }
}

/// Total-variation distance between a pmf with integer support and a dense
/// reference pmf given as probabilities for values `0..ref_probs.len()`.
/// Reference mass beyond the stored range counts fully toward the distance.
pub fn total_variation(pmf: &DiscretePmf, ref_probs: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut ref_seen = 0.0;
    for (k, &q) in ref_probs.iter().enumerate() {
        acc += (pmf.prob(k as u64) - q).abs();
        ref_seen += q;
    }
    for (v, _) in pmf.iter() {
        if v as usize >= ref_probs.len() {
            acc += pmf.prob(v);
        }
    }
    acc += 1.0 - ref_seen; // unrepresented reference tail
    0.5 * acc
}

/// Empirical complementary cumulative distribution: `eval(x) = Prob{X ≥ x}`.
/// Stored as ascending distinct values with their tail fractions.
#[derive(Debug, Clone)]
pub struct Ccdf {
    values: Vec<f64>,
    tails: Vec<f64>,
}

impl Ccdf {
    /// Build from `(value, count)` pairs (values need not be sorted).
    pub fn from_counts(pairs: impl IntoIterator<Item = (f64, u64)>) -> Self {
        let mut agg: BTreeMap<u64, u64> = BTreeMap::new();
        for (v, c) in pairs {
            debug_assert!(v.is_finite());
            *agg.entry(v.to_bits()).or_insert(0) += c;
        }
        let values: Vec<f64> = agg.keys().map(|&b| f64::from_bits(b)).collect();
        debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
        let total: u64 = agg.values().sum();
        let mut tails = Vec::with_capacity(values.len());
        let mut rest = total;
        for &c in agg.values() {
            tails.push(rest as f64 / total as f64);
            rest -= c;
        }
        Self { values, tails }
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        Self::from_counts(values.into_iter().map(|v| (v, 1)))
    }

    /// Pointwise mean of several tail functions, sampled on the union of
    /// their jump points (the mean of step functions is a step function with
    /// exactly those jumps).
    pub fn mean_of(curves: &[Ccdf]) -> Ccdf {
        assert!(!curves.is_empty());
        let mut grid: Vec<f64> = curves
            .iter()
            .flat_map(|c| c.values.iter().copied())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let tails = grid
            .iter()
            .map(|&x| curves.iter().map(|c| c.eval(x)).sum::<f64>() / curves.len() as f64)
            .collect();
        Ccdf {
            values: grid,
            tails,
        }
    }

    /// `Prob{X ≥ x}`: 1 below the support, 0 above it.
    pub fn eval(&self, x: f64) -> f64 {
        // first jump point ≥ x carries the tail mass of everything ≥ x
        let i = self.values.partition_point(|&v| v < x);
        if i == self.values.len() {
            0.0
        } else {
            self.tails[i]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.tails.iter().copied())
    }

    pub fn min_value(&self) -> Option<f64> {
        self.values.first().copied()
    }

    /// Sup-distance to another tail function. Step functions attain their
    /// sup at a jump point of one of the two curves.
    pub fn sup_distance(&self, other: &Ccdf) -> f64 {
        let mut d: f64 = 0.0;
        for &x in self.values.iter().chain(other.values.iter()) {
            d = d.max((self.eval(x) - other.eval(x)).abs());
        }
        d
    }
}

/// Distinct integers on a log-spaced grid over `[lo, hi]` (inclusive),
/// `points` samples before dedup.
pub fn log_spaced_integers(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && points >= 2);
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..points)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (points - 1) as f64;
            t.exp().round() as u64
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Least-squares slope of ln y against ln x; points with y ≤ 0 are skipped.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    assert!(pts.len() >= 2, "slope fit needs at least two positive points");
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
