//! Discrete power law `p(x) = x^(-α) / ζ(α, x_min)` on `x >= x_min`.
//!
//! Fitting follows the usual recipe for heavy-tailed count data: for each
//! candidate lower bound the exponent is estimated by maximum likelihood, and
//! the lower bound whose fitted tail is closest to the data in
//! Kolmogorov–Smirnov distance wins. Parameter uncertainties come from a
//! nonparametric bootstrap of the whole procedure.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::CitationSample;
use crate::error::{invalid, Error, Result};
use crate::optimize::brent_root;
use crate::rng::{rng_for, Stream};
use crate::sampler::{DiscreteTail, TableSampler};
use crate::special::{zeta_unchecked, zeta_with_derivative};

/// Smallest tail the x_min scan will consider by default.
pub const DEFAULT_MIN_TAIL: usize = 50;
pub const DEFAULT_BOOTSTRAP_REPS: usize = 1000;

const ALPHA_TOL: f64 = 1e-10;
// Gaps between consecutive tail values up to this size are summed term by
// term when building the model CDF; wider gaps use a fresh zeta evaluation.
const CDF_DIRECT_GAP: u64 = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePowerLaw {
    x_min: u64,
    alpha: f64,
    norm: f64,
}

impl DiscretePowerLaw {
    pub fn new(x_min: u64, alpha: f64) -> Result<Self> {
        if x_min == 0 {
            return Err(invalid("x_min", "must be a positive integer"));
        }
        if alpha <= 1.0 || !alpha.is_finite() {
            return Err(Error::NonNormalizable(alpha));
        }
        Ok(Self {
            x_min,
            alpha,
            norm: zeta_unchecked(alpha, x_min as f64),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x_min(&self) -> u64 {
        self.x_min
    }

    /// `ζ(α, x_min)`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self, x: u64) -> f64 {
        if x < self.x_min {
            0.0
        } else {
            (x as f64).powf(-self.alpha) / self.norm
        }
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        if x < self.x_min {
            f64::NEG_INFINITY
        } else {
            -self.alpha * (x as f64).ln() - self.norm.ln()
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: u64) -> f64 {
        1.0 - self.ccdf(x + 1)
    }

    /// `P(X >= x)`.
    pub fn ccdf(&self, x: u64) -> f64 {
        if x <= self.x_min {
            1.0
        } else {
            zeta_unchecked(self.alpha, x as f64) / self.norm
        }
    }
}

impl DiscreteTail for DiscretePowerLaw {
    fn x_min(&self) -> u64 {
        self.x_min
    }
    fn pmf(&self, x: u64) -> f64 {
        DiscretePowerLaw::pmf(self, x)
    }
    fn survival(&self, x: u64) -> f64 {
        self.ccdf(x)
    }
}

/// Result of fitting a discrete power law to a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub label: String,
    pub x_min: u64,
    pub x_min_sd: f64,
    pub alpha: f64,
    pub alpha_sd: f64,
    pub n_tail: usize,
    pub n: usize,
    pub ks: f64,
    pub log_likelihood: f64,
    /// True when x_min was supplied rather than scanned.
    pub x_min_fixed: bool,
    /// Minimum tail size used by the scan.
    pub min_tail: usize,
    /// Bootstrap replicates that produced a fit.
    pub bootstrap_reps: usize,
}

impl PowerLawFit {
    pub fn model(&self) -> Result<DiscretePowerLaw> {
        DiscretePowerLaw::new(self.x_min, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub min_tail: usize,
    pub bootstrap_reps: usize,
    pub seed: u64,
    pub fixed_x_min: Option<u64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            min_tail: DEFAULT_MIN_TAIL,
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            seed: 0,
            fixed_x_min: None,
        }
    }
}

/// Distinct positive values of a sorted sample with multiplicities and suffix
/// sums, so that every candidate tail is a suffix.
#[derive(Debug, Clone)]
pub(crate) struct Support {
    pub values: Vec<u64>,
    pub weights: Vec<u64>,
    // suffix_n[j] = Σ_{k>=j} weights[k]; suffix_ln likewise for w·ln(x)
    pub suffix_n: Vec<u64>,
    pub suffix_ln: Vec<f64>,
}

impl Support {
    pub fn from_sorted(counts: &[u64]) -> Self {
        let mut values = Vec::new();
        let mut weights: Vec<u64> = Vec::new();
        for &c in counts.iter().filter(|&&c| c > 0) {
            if values.last() == Some(&c) {
                *weights.last_mut().unwrap() += 1;
            } else {
                values.push(c);
                weights.push(1);
            }
        }
        let m = values.len();
        let mut suffix_n = vec![0u64; m + 1];
        let mut suffix_ln = vec![0.0f64; m + 1];
        for j in (0..m).rev() {
            suffix_n[j] = suffix_n[j + 1] + weights[j];
            suffix_ln[j] = suffix_ln[j + 1] + weights[j] as f64 * (values[j] as f64).ln();
        }
        Self {
            values,
            weights,
            suffix_n,
            suffix_ln,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Index of the first value `>= x_min`.
    pub fn start_of(&self, x_min: u64) -> usize {
        self.values.partition_point(|&v| v < x_min)
    }
}

/// Summed log-likelihood of `n` tail observations with `Σ ln x = sum_ln`.
pub(crate) fn power_law_log_likelihood(alpha: f64, x_min: u64, n: u64, sum_ln: f64) -> f64 {
    -alpha * sum_ln - n as f64 * zeta_unchecked(alpha, x_min as f64).ln()
}

/// Closed-form approximation `1 + n / Σ ln(x / (x_min - 1/2))`.
pub fn approximate_alpha(n: u64, sum_ln: f64, x_min: u64) -> f64 {
    1.0 + n as f64 / (sum_ln - n as f64 * (x_min as f64 - 0.5).ln())
}

// Root of the score equation: mean ln x = -ζ'(α)/ζ(α).
fn mle_alpha(x_min: u64, n: u64, sum_ln: f64) -> f64 {
    let mean_ln = sum_ln / n as f64;
    let q = x_min as f64;
    let score = |a: f64| {
        let (z, dz) = zeta_with_derivative(a, q);
        -dz / z - mean_ln
    };
    let floor = 1.0 + 1e-9;
    let start = approximate_alpha(n, sum_ln, x_min).clamp(floor + 1e-6, 50.0);
    let mut step = 0.05;
    let (lo, hi);
    if score(start) > 0.0 {
        let mut a = start;
        let mut b = start + step;
        while score(b) > 0.0 {
            a = b;
            step *= 2.0;
            b += step;
        }
        lo = a;
        hi = b;
    } else {
        let mut b = start;
        let mut a = start - step;
        while a > floor && score(a) <= 0.0 {
            b = a;
            step *= 2.0;
            a -= step;
        }
        lo = a.max(floor);
        hi = b;
    }
    brent_root(score, lo, hi, ALPHA_TOL)
}

/// MLE exponent and log-likelihood for a support that starts at `x_min`.
pub(crate) fn fit_alpha_on_support(support: &Support, x_min: u64) -> Result<(f64, f64)> {
    tail_alpha(support, 0, x_min)
}

fn tail_alpha(support: &Support, j: usize, x_min: u64) -> Result<(f64, f64)> {
    let n = support.suffix_n[j];
    if n == 0 {
        return Err(Error::EmptyTail { x_min });
    }
    if support.len() - j < 2 {
        return Err(Error::DegenerateTail { x_min });
    }
    let sum_ln = support.suffix_ln[j];
    let alpha = mle_alpha(x_min, n, sum_ln);
    Ok((alpha, power_law_log_likelihood(alpha, x_min, n, sum_ln)))
}

/// Maximum-likelihood exponent for the tail `x >= x_min`, with the maximized
/// log-likelihood.
pub fn fit_alpha(sample: &CitationSample, x_min: u64) -> Result<(f64, f64)> {
    if x_min == 0 {
        return Err(invalid("x_min", "must be a positive integer"));
    }
    let support = Support::from_sorted(sample.tail(x_min));
    tail_alpha(&support, 0, x_min)
}

// KS distance between the tail support[j..] and a power law starting at x_min.
fn tail_ks(support: &Support, j: usize, x_min: u64, alpha: f64) -> f64 {
    let n = support.suffix_n[j] as f64;
    let norm = zeta_unchecked(alpha, x_min as f64);
    let mut unnormalized = 0.0;
    let mut cursor = x_min;
    let mut seen = 0u64;
    let mut d: f64 = 0.0;
    for (&v, &w) in support.values[j..].iter().zip(&support.weights[j..]) {
        if v + 1 - cursor <= CDF_DIRECT_GAP {
            for y in cursor..=v {
                unnormalized += (y as f64).powf(-alpha);
            }
        } else {
            unnormalized = norm - zeta_unchecked(alpha, (v + 1) as f64);
        }
        cursor = v + 1;
        seen += w;
        let empirical = seen as f64 / n;
        d = d.max((empirical - unnormalized / norm).abs());
    }
    d
}

/// Largest gap between the empirical tail CDF and the model CDF over observed tail values.
pub fn ks_distance(sample: &CitationSample, model: &DiscretePowerLaw) -> Result<f64> {
    let support = Support::from_sorted(sample.tail(model.x_min));
    if support.len() == 0 {
        return Err(Error::EmptyTail { x_min: model.x_min });
    }
    Ok(tail_ks(&support, 0, model.x_min, model.alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TailFit {
    pub x_min: u64,
    pub alpha: f64,
    pub n_tail: u64,
    pub ks: f64,
    pub log_likelihood: f64,
}

/// Scans candidate lower bounds and keeps the KS-minimizing one (smallest on ties).
pub(crate) fn scan_x_min(counts: &[u64], min_tail: usize) -> Result<TailFit> {
    let support = Support::from_sorted(counts);
    let mut best: Option<TailFit> = None;
    for j in 0..support.len() {
        let n_tail = support.suffix_n[j];
        if (n_tail as usize) < min_tail || support.len() - j < 2 {
            break;
        }
        let x_min = support.values[j];
        let (alpha, log_likelihood) = tail_alpha(&support, j, x_min)?;
        let ks = tail_ks(&support, j, x_min, alpha);
        if best.is_none_or(|b| ks < b.ks) {
            best = Some(TailFit {
                x_min,
                alpha,
                n_tail,
                ks,
                log_likelihood,
            });
        }
    }
    best.ok_or(Error::InsufficientTail { min_tail })
}

pub(crate) fn fit_fixed(counts: &[u64], x_min: u64) -> Result<TailFit> {
    if x_min == 0 {
        return Err(invalid("x_min", "must be a positive integer"));
    }
    let support = Support::from_sorted(counts);
    let j = support.start_of(x_min);
    let (alpha, log_likelihood) = tail_alpha(&support, j, x_min)?;
    Ok(TailFit {
        x_min,
        alpha,
        n_tail: support.suffix_n[j],
        ks: tail_ks(&support, j, x_min, alpha),
        log_likelihood,
    })
}

pub(crate) fn fit_tail(
    counts: &[u64],
    min_tail: usize,
    fixed_x_min: Option<u64>,
) -> Result<TailFit> {
    match fixed_x_min {
        Some(x_min) => fit_fixed(counts, x_min),
        None => scan_x_min(counts, min_tail),
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Fits x_min (unless fixed) and α, then bootstraps both for standard deviations.
pub fn fit_power_law(sample: &CitationSample, options: &FitOptions) -> Result<PowerLawFit> {
    let counts = sample.counts();
    let point = fit_tail(counts, options.min_tail, options.fixed_x_min)?;

    let replicates: Vec<Option<(f64, f64)>> = (0..options.bootstrap_reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(options.seed, Stream::Bootstrap, r);
            let mut resample: Vec<u64> = (0..counts.len())
                .map(|_| counts[rng.random_range(0..counts.len())])
                .collect();
            resample.sort_unstable();
            fit_tail(&resample, options.min_tail, options.fixed_x_min)
                .ok()
                .map(|f| (f.alpha, f.x_min as f64))
        })
        .collect();
    let (alphas, x_mins): (Vec<f64>, Vec<f64>) = replicates.into_iter().flatten().unzip();

    Ok(PowerLawFit {
        label: sample.label().to_string(),
        x_min: point.x_min,
        x_min_sd: std_dev(&x_mins),
        alpha: point.alpha,
        alpha_sd: std_dev(&alphas),
        n_tail: point.n_tail as usize,
        n: counts.len(),
        ks: point.ks,
        log_likelihood: point.log_likelihood,
        x_min_fixed: options.fixed_x_min.is_some(),
        min_tail: options.min_tail,
        bootstrap_reps: alphas.len(),
    })
}

/// `n` independent draws from `model`, reproducible from `seed`.
pub fn sample_power_law(model: &DiscretePowerLaw, n: usize, seed: u64) -> Result<CitationSample> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let sampler = TableSampler::new(*model);
    let mut rng = rng_for(seed, Stream::Draw, 0);
    let counts = (0..n).map(|_| sampler.draw(&mut rng)).collect();
    CitationSample::new(
        format!("powerlaw(x_min={}, alpha={})", model.x_min, model.alpha),
        counts,
    )
}

/// One row of the tail CCDF export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfRow {
    pub x: u64,
    pub ccdf_empirical: f64,
    pub ccdf_model: f64,
}

/// Empirical and fitted `P(X >= x)` at every distinct tail value.
pub fn ccdf_rows(sample: &CitationSample, fit: &PowerLawFit) -> Result<Vec<CcdfRow>> {
    let model = fit.model()?;
    let support = Support::from_sorted(sample.tail(fit.x_min));
    if support.len() == 0 {
        return Err(Error::EmptyTail { x_min: fit.x_min });
    }
    let n = support.suffix_n[0] as f64;
    Ok(support
        .values
        .iter()
        .zip(&support.suffix_n)
        .map(|(&x, &above)| CcdfRow {
            x,
            ccdf_empirical: above as f64 / n,
            ccdf_model: model.ccdf(x),
        })
        .collect())
}

pub fn write_ccdf_csv(rows: &[CcdfRow], out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}
