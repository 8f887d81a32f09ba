//! Goodness of fit: Kolmogorov–Smirnov distance and binned χ².

use alloc::vec;
use alloc::vec::Vec;

use super::laws::{Law, UnitNormal};
use crate::error::invalid;
use crate::{Error, Result};

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(invalid("samples", "empty sample"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(invalid("samples", "non-finite sample"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn ks_sorted(sorted: &[f64], cdf: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &f) in cdf.iter().enumerate() {
        d = d.max((k + 1) as f64 / n - f).max(f - k as f64 / n);
    }
    d
}

/// Two-sided Kolmogorov–Smirnov distance between the sample and `law`.
pub fn ks_distance<L: Law>(samples: &[f64], law: &L) -> Result<f64> {
    let s = sorted(samples)?;
    let cdf = law.cdf_sorted(&s);
    Ok(ks_sorted(&s, &cdf))
}

/// Asymptotic KS critical distance at significance `alpha` for `n` samples,
/// `√(−ln(α/2)/2) / √n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    libm::sqrt(-libm::log(alpha / 2.0) / 2.0) / libm::sqrt(n as f64)
}

/// Equal-probability histogram of a sample against a law.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramFit {
    /// `bins + 1` edges; the outer edges are widened to cover the sample.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Sample fraction per bin.
    pub empirical: Vec<f64>,
    /// Law probability per bin.
    pub model: Vec<f64>,
    pub n: usize,
    pub ks: f64,
    pub chi2: f64,
    pub dof: usize,
}

impl HistogramFit {
    pub fn chi2_per_dof(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}

/// Bins the sample into `bins` cells of equal law probability and reports
/// χ² (with `bins − 1 − fitted` degrees of freedom) and the KS distance.
pub fn fit_histogram<L: Law>(samples: &[f64], law: &L, bins: usize, fitted: usize) -> Result<HistogramFit> {
    if bins < fitted + 2 {
        return Err(invalid("bins", "need at least two more bins than fitted parameters"));
    }
    let s = sorted(samples)?;
    let n = s.len();
    if n < bins {
        return Err(invalid("samples", "fewer samples than bins"));
    }
    let mut edges: Vec<f64> = (0..=bins).map(|k| law.quantile(k as f64 / bins as f64)).collect();
    edges[0] = edges[0].min(s[0]);
    if !edges[0].is_finite() {
        edges[0] = s[0];
    }
    edges[bins] = s[n - 1];
    if edges[bins] < edges[bins - 1] {
        edges[bins] = edges[bins - 1];
    }
    let mut counts = vec![0usize; bins];
    let mut b = 0;
    for &x in &s {
        while b + 1 < bins && x >= edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    let expected = n as f64 / bins as f64;
    let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let cdf = law.cdf_sorted(&s);
    Ok(HistogramFit {
        empirical: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        model: vec![1.0 / bins as f64; bins],
        edges,
        counts,
        n,
        ks: ks_sorted(&s, &cdf),
        chi2,
        dof: bins - 1 - fitted,
    })
}

/// Mean and population standard deviation.
pub fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Standardizes the sample and compares it with the unit normal law; the
/// mean and the width count as two fitted parameters.
pub fn gaussianity_check(samples: &[f64], bins: usize) -> Result<HistogramFit> {
    if samples.len() < 1000 {
        return Err(invalid("samples", "at least 1000 samples are required"));
    }
    let (mean, sd) = mean_sd(samples);
    if !(sd > 0.0) {
        return Err(Error::Degenerate("sample has zero variance"));
    }
    let z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    fit_histogram(&z, &UnitNormal, bins, 2)
}

/// Fixed-edge histogram of sample fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub freq: Vec<f64>,
}

impl Histogram {
    /// `bins` equal cells spanning `[lo, hi]`.
    pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
        if !(hi > lo) || bins == 0 {
            return Err(invalid("edges", "need hi > lo and at least one bin"));
        }
        Ok((0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect())
    }

    /// Counts the sample on `edges`; values outside land in the end bins.
    pub fn with_edges(samples: &[f64], edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("edges", "must be strictly increasing"));
        }
        if samples.is_empty() {
            return Err(invalid("samples", "empty sample"));
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0usize; bins];
        for &x in samples {
            let b = edges[1..bins].partition_point(|&e| e <= x);
            counts[b] += 1;
        }
        let n = samples.len() as f64;
        Ok(Self {
            edges: edges.to_vec(),
            freq: counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }

    /// Bin-wise mean of histograms sharing the same edges.
    pub fn average(hists: &[Histogram]) -> Result<Self> {
        let first = hists
            .first()
            .ok_or_else(|| invalid("histograms", "nothing to average"))?;
        if hists.iter().any(|h| h.edges != first.edges) {
            return Err(invalid("histograms", "edges differ"));
        }
        let m = hists.len() as f64;
        let mut freq = vec![0.0; first.freq.len()];
        for h in hists {
            for (a, b) in freq.iter_mut().zip(&h.freq) {
                *a += b / m;
            }
        }
        Ok(Self {
            edges: first.edges.clone(),
            freq,
        })
    }

    /// Largest gap between the cumulative histogram and the law's CDF at the
    /// inner edges. The end bins absorb the tails, so the outer edges are
    /// treated as `∓∞`.
    pub fn ks_against<L: Law>(&self, law: &L) -> f64 {
        let mut cum = 0.0;
        let mut d: f64 = 0.0;
        for k in 0..self.freq.len() - 1 {
            cum += self.freq[k];
            d = d.max((cum - law.cdf(self.edges[k + 1])).abs());
        }
        d
    }

    /// Law probability per bin, end bins including the tails.
    pub fn model<L: Law>(&self, law: &L) -> Vec<f64> {
        let bins = self.freq.len();
        (0..bins)
            .map(|k| {
                let lo = if k == 0 { 0.0 } else { law.cdf(self.edges[k]) };
                let hi = if k + 1 == bins { 1.0 } else { law.cdf(self.edges[k + 1]) };
                hi - lo
            })
            .collect()
    }
}
