//! Competing tail distributions and likelihood-ratio comparison against the power law.
//!
//! The continuous alternatives are discretized onto the integers by CDF
//! differences, `p(x) ∝ F(x + 1/2) - F(x - 1/2)`, renormalized over
//! `x >= x_min`. The power law with exponential cutoff is natively discrete,
//! `p(x) ∝ x^(-α) e^(-λx)`, and contains the pure power law at `λ = 0`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::CitationSample;
use crate::error::{invalid, Error, Result};
use crate::optimize::{golden_max, grid_golden_max};
use crate::powerlaw::{power_law_log_likelihood, DiscretePowerLaw, PowerLawFit, Support};
use crate::rng::{rng_for, Stream};
use crate::sampler::{DiscreteTail, TableSampler};
use crate::special::{
    chi2_1_sf, cutoff_normalizer_unchecked, ln_normal_interval, ln_normal_sf, normal_two_sided_p,
    zeta_unchecked,
};

/// Verdicts need `p` at or below this level.
pub const SIGNIFICANCE: f64 = 0.10;

const PARAM_TOL: f64 = 1e-7;
const MAX_RATE_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lognormal,
    Exponential,
    #[serde(rename = "powerlaw_cutoff")]
    PowerLawCutoff,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::Lognormal,
        Family::Exponential,
        Family::PowerLawCutoff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lognormal => "lognormal",
            Family::Exponential => "exponential",
            Family::PowerLawCutoff => "powerlaw_cutoff",
        }
    }

    /// Whether the pure power law is a special case of this family.
    pub fn is_nested(self) -> bool {
        matches!(self, Family::PowerLawCutoff)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lognormal" | "log-normal" => Ok(Family::Lognormal),
            "exponential" | "exp" => Ok(Family::Exponential),
            "powerlaw_cutoff" | "cutoff" | "truncated_powerlaw" => Ok(Family::PowerLawCutoff),
            other => Err(invalid("family", format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AltParams {
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    Exponential {
        lambda: f64,
    },
    #[serde(rename = "powerlaw_cutoff")]
    PowerLawCutoff {
        alpha: f64,
        lambda: f64,
    },
}

impl AltParams {
    pub fn family(&self) -> Family {
        match self {
            AltParams::Lognormal { .. } => Family::Lognormal,
            AltParams::Exponential { .. } => Family::Exponential,
            AltParams::PowerLawCutoff { .. } => Family::PowerLawCutoff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltFit {
    #[serde(flatten)]
    pub params: AltParams,
    pub x_min: u64,
    pub n_tail: u64,
    /// Summed over tail observations only.
    pub log_likelihood: f64,
}

impl AltFit {
    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn model(&self) -> Result<AltModel> {
        AltModel::new(self.params, self.x_min)
    }
}

/// Discretized lognormal on `x >= x_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteLognormal {
    x_min: u64,
    mu: f64,
    sigma: f64,
    ln_norm: f64,
}

impl DiscreteLognormal {
    pub fn new(x_min: u64, mu: f64, sigma: f64) -> Result<Self> {
        check_x_min(x_min)?;
        if !mu.is_finite() {
            return Err(invalid("mu", "must be finite"));
        }
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self {
            x_min,
            mu,
            sigma,
            ln_norm: ln_normal_sf(lognormal_z(x_min as f64 - 0.5, mu, sigma)),
        })
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        if x < self.x_min {
            return f64::NEG_INFINITY;
        }
        lognormal_ln_mass(x, self.mu, self.sigma) - self.ln_norm
    }
}

fn lognormal_z(y: f64, mu: f64, sigma: f64) -> f64 {
    (y.ln() - mu) / sigma
}

// ln(F(x + 1/2) - F(x - 1/2)) for the lognormal CDF F.
fn lognormal_ln_mass(x: u64, mu: f64, sigma: f64) -> f64 {
    let x = x as f64;
    ln_normal_interval(
        lognormal_z(x - 0.5, mu, sigma),
        lognormal_z(x + 0.5, mu, sigma),
    )
}

impl DiscreteTail for DiscreteLognormal {
    fn x_min(&self) -> u64 {
        self.x_min
    }
    fn pmf(&self, x: u64) -> f64 {
        self.ln_pmf(x).exp()
    }
    fn survival(&self, x: u64) -> f64 {
        if x <= self.x_min {
            return 1.0;
        }
        (ln_normal_sf(lognormal_z(x as f64 - 0.5, self.mu, self.sigma)) - self.ln_norm).exp()
    }
}

/// Discretized exponential on `x >= x_min`: a geometric law with ratio `e^(-λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteExponential {
    x_min: u64,
    lambda: f64,
}

impl DiscreteExponential {
    pub fn new(x_min: u64, lambda: f64) -> Result<Self> {
        check_x_min(x_min)?;
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(Self { x_min, lambda })
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        if x < self.x_min {
            return f64::NEG_INFINITY;
        }
        (-(-self.lambda).exp_m1()).ln() - self.lambda * (x - self.x_min) as f64
    }

    pub fn mean(&self) -> f64 {
        self.x_min as f64 + 1.0 / self.lambda.exp_m1()
    }
}

impl DiscreteTail for DiscreteExponential {
    fn x_min(&self) -> u64 {
        self.x_min
    }
    fn pmf(&self, x: u64) -> f64 {
        self.ln_pmf(x).exp()
    }
    fn survival(&self, x: u64) -> f64 {
        if x <= self.x_min {
            1.0
        } else {
            (-self.lambda * (x - self.x_min) as f64).exp()
        }
    }
}

/// `p(x) = x^(-α) e^(-λx) / Z` on `x >= x_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawCutoff {
    x_min: u64,
    alpha: f64,
    lambda: f64,
    norm: f64,
}

impl PowerLawCutoff {
    pub fn new(x_min: u64, alpha: f64, lambda: f64) -> Result<Self> {
        check_x_min(x_min)?;
        let norm = crate::special::cutoff_normalizer(alpha, lambda, x_min)?;
        Ok(Self {
            x_min,
            alpha,
            lambda,
            norm,
        })
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        if x < self.x_min {
            return f64::NEG_INFINITY;
        }
        let xf = x as f64;
        -self.alpha * xf.ln() - self.lambda * xf - self.norm.ln()
    }
}

impl DiscreteTail for PowerLawCutoff {
    fn x_min(&self) -> u64 {
        self.x_min
    }
    fn pmf(&self, x: u64) -> f64 {
        self.ln_pmf(x).exp()
    }
    fn survival(&self, x: u64) -> f64 {
        if x <= self.x_min {
            1.0
        } else {
            cutoff_z(self.alpha, self.lambda, x as f64) / self.norm
        }
    }
}

fn cutoff_z(alpha: f64, lambda: f64, q: f64) -> f64 {
    if lambda == 0.0 {
        zeta_unchecked(alpha, q)
    } else {
        cutoff_normalizer_unchecked(alpha, lambda, q)
    }
}

fn check_x_min(x_min: u64) -> Result<()> {
    if x_min == 0 {
        Err(invalid("x_min", "must be a positive integer"))
    } else {
        Ok(())
    }
}

/// Any of the alternative models, ready for evaluation or sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AltModel {
    Lognormal(DiscreteLognormal),
    Exponential(DiscreteExponential),
    PowerLawCutoff(PowerLawCutoff),
}

impl AltModel {
    pub fn new(params: AltParams, x_min: u64) -> Result<Self> {
        Ok(match params {
            AltParams::Lognormal { mu, sigma } => {
                AltModel::Lognormal(DiscreteLognormal::new(x_min, mu, sigma)?)
            }
            AltParams::Exponential { lambda } => {
                AltModel::Exponential(DiscreteExponential::new(x_min, lambda)?)
            }
            AltParams::PowerLawCutoff { alpha, lambda } => {
                AltModel::PowerLawCutoff(PowerLawCutoff::new(x_min, alpha, lambda)?)
            }
        })
    }

    pub fn family(&self) -> Family {
        match self {
            AltModel::Lognormal(_) => Family::Lognormal,
            AltModel::Exponential(_) => Family::Exponential,
            AltModel::PowerLawCutoff(_) => Family::PowerLawCutoff,
        }
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        match self {
            AltModel::Lognormal(m) => m.ln_pmf(x),
            AltModel::Exponential(m) => m.ln_pmf(x),
            AltModel::PowerLawCutoff(m) => m.ln_pmf(x),
        }
    }
}

impl DiscreteTail for AltModel {
    fn x_min(&self) -> u64 {
        match self {
            AltModel::Lognormal(m) => m.x_min,
            AltModel::Exponential(m) => m.x_min,
            AltModel::PowerLawCutoff(m) => m.x_min,
        }
    }
    fn pmf(&self, x: u64) -> f64 {
        self.ln_pmf(x).exp()
    }
    fn survival(&self, x: u64) -> f64 {
        match self {
            AltModel::Lognormal(m) => m.survival(x),
            AltModel::Exponential(m) => m.survival(x),
            AltModel::PowerLawCutoff(m) => m.survival(x),
        }
    }
}

struct TailData {
    x_min: u64,
    support: Support,
    n: u64,
    sum_x: f64,
}

impl TailData {
    fn new(sample: &CitationSample, x_min: u64) -> Result<Self> {
        check_x_min(x_min)?;
        let support = Support::from_sorted(sample.tail(x_min));
        let n = support.suffix_n[0];
        if n == 0 {
            return Err(Error::EmptyTail { x_min });
        }
        let sum_x = support
            .values
            .iter()
            .zip(&support.weights)
            .map(|(&v, &w)| v as f64 * w as f64)
            .sum();
        Ok(Self {
            x_min,
            support,
            n,
            sum_x,
        })
    }

    fn sum_ln(&self) -> f64 {
        self.support.suffix_ln[0]
    }

    fn distinct(&self) -> usize {
        self.support.len()
    }

    fn require_distinct(&self) -> Result<()> {
        if self.distinct() < 2 {
            Err(Error::DegenerateTail { x_min: self.x_min })
        } else {
            Ok(())
        }
    }
}

/// Maximum-likelihood fit of `family` to the tail `x >= x_min`.
pub fn fit_alternative(sample: &CitationSample, x_min: u64, family: Family) -> Result<AltFit> {
    let tail = TailData::new(sample, x_min)?;
    fit_on_tail(&tail, family, None)
}

fn fit_on_tail(tail: &TailData, family: Family, pl_alpha: Option<f64>) -> Result<AltFit> {
    let (params, log_likelihood) = match family {
        Family::Exponential => fit_exponential(tail)?,
        Family::Lognormal => fit_lognormal(tail)?,
        Family::PowerLawCutoff => fit_cutoff(tail, pl_alpha)?,
    };
    if !log_likelihood.is_finite() {
        return Err(Error::NonConvergence(format!(
            "{family} fit produced a non-finite log-likelihood at {params:?}"
        )));
    }
    Ok(AltFit {
        params,
        x_min: tail.x_min,
        n_tail: tail.n,
        log_likelihood,
    })
}

fn exponential_log_likelihood(tail: &TailData, lambda: f64) -> f64 {
    let excess = tail.sum_x - tail.n as f64 * tail.x_min as f64;
    tail.n as f64 * (-(-lambda).exp_m1()).ln() - lambda * excess
}

// Geometric MLE: e^(-λ) = m / (1 + m) with m the mean excess over x_min.
fn fit_exponential(tail: &TailData) -> Result<(AltParams, f64)> {
    let excess = tail.sum_x - tail.n as f64 * tail.x_min as f64;
    if excess <= 0.0 {
        return Err(Error::DegenerateTail { x_min: tail.x_min });
    }
    let mean_excess = excess / tail.n as f64;
    let lambda = (1.0 / mean_excess).ln_1p();
    Ok((
        AltParams::Exponential { lambda },
        exponential_log_likelihood(tail, lambda),
    ))
}

fn lognormal_log_likelihood(tail: &TailData, mu: f64, sigma: f64) -> f64 {
    let ln_norm = ln_normal_sf(lognormal_z(tail.x_min as f64 - 0.5, mu, sigma));
    let mass: f64 = tail
        .support
        .values
        .iter()
        .zip(&tail.support.weights)
        .map(|(&v, &w)| w as f64 * lognormal_ln_mass(v, mu, sigma))
        .sum();
    mass - tail.n as f64 * ln_norm
}

// Profile likelihood: the scale is optimized in an outer search over ln σ, the
// location in an inner search for each candidate σ.
fn fit_lognormal(tail: &TailData) -> Result<(AltParams, f64)> {
    tail.require_distinct()?;
    let ln_lo = (tail.x_min as f64 - 0.5).ln();
    let ln_hi = (*tail.support.values.last().unwrap() as f64).ln();
    let best_mu = |sigma: f64| {
        let lo = ln_lo - 10.0 * sigma * sigma - 5.0 * sigma;
        let hi = ln_hi + 5.0 * sigma;
        grid_golden_max(
            |mu| lognormal_log_likelihood(tail, mu, sigma),
            lo,
            hi,
            32,
            PARAM_TOL,
        )
    };
    let (ln_sigma, _) = grid_golden_max(
        |s| best_mu(s.exp()).1,
        (0.01f64).ln(),
        (40.0f64).ln(),
        24,
        PARAM_TOL,
    );
    let sigma = ln_sigma.exp();
    let (mu, ll) = best_mu(sigma);
    Ok((AltParams::Lognormal { mu, sigma }, ll))
}

fn cutoff_log_likelihood(tail: &TailData, alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        if alpha <= 1.0 {
            return f64::NEG_INFINITY;
        }
        return power_law_log_likelihood(alpha, tail.x_min, tail.n, tail.sum_ln());
    }
    if alpha <= -1.0 {
        return f64::NEG_INFINITY;
    }
    let z = cutoff_normalizer_unchecked(alpha, lambda, tail.x_min as f64);
    -alpha * tail.sum_ln() - lambda * tail.sum_x - tail.n as f64 * z.ln()
}

// The log-likelihood is jointly concave in (α, λ), so nested golden sections
// (λ outside, α inside) find the global maximum. The λ = 0 boundary is always
// compared against the pure power-law MLE so the nested fit can never lose to it.
fn fit_cutoff(tail: &TailData, pl_alpha: Option<f64>) -> Result<(AltParams, f64)> {
    tail.require_distinct()?;
    let pl_alpha = match pl_alpha {
        Some(a) => a,
        None => {
            let fit = crate::powerlaw::fit_alpha_on_support(&tail.support, tail.x_min)?;
            fit.0
        }
    };
    let alpha_hi = 20f64.max(pl_alpha + 5.0);
    let best_alpha = |lambda: f64| {
        let lo = if lambda == 0.0 { 1.0 + 1e-9 } else { -0.9 };
        golden_max(
            |a| cutoff_log_likelihood(tail, a, lambda),
            lo,
            alpha_hi,
            PARAM_TOL,
        )
    };

    let excess = (tail.sum_x / tail.n as f64 - tail.x_min as f64).max(1e-3);
    let mut lambda_hi = 2.0 * (1.0 / excess).ln_1p() + 1e-3;
    let mut doublings = 0;
    let (lambda, _) = loop {
        let found = golden_max(|l| best_alpha(l).1, 0.0, lambda_hi, PARAM_TOL * lambda_hi);
        if found.0 < lambda_hi * (1.0 - 1e-6) {
            break found;
        }
        doublings += 1;
        if doublings > MAX_RATE_DOUBLINGS {
            return Err(Error::NonConvergence(format!(
                "cutoff rate kept increasing past {lambda_hi}"
            )));
        }
        lambda_hi *= 2.0;
    };
    let (alpha, ll) = best_alpha(lambda);
    let boundary = cutoff_log_likelihood(tail, pl_alpha, 0.0);
    if boundary >= ll {
        return Ok((
            AltParams::PowerLawCutoff {
                alpha: pl_alpha,
                lambda: 0.0,
            },
            boundary,
        ));
    }
    Ok((AltParams::PowerLawCutoff { alpha, lambda }, ll))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PowerLawFavored,
    AlternativeFavored,
    Inconclusive,
}

impl Verdict {
    pub fn from_test(lr: f64, p: f64) -> Self {
        if p > SIGNIFICANCE || lr == 0.0 || lr.is_nan() {
            Verdict::Inconclusive
        } else if lr > 0.0 {
            Verdict::PowerLawFavored
        } else {
            Verdict::AlternativeFavored
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::PowerLawFavored => "power_law_favored",
            Verdict::AlternativeFavored => "alternative_favored",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Log-likelihood ratio statistic with its significance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrTest {
    /// `Σ ln p_a(x) - ln p_b(x)`.
    pub lr: f64,
    /// `lr / (σ √n)`; `None` when the pointwise differences have zero variance.
    pub normalized: Option<f64>,
    pub p: f64,
}

/// Vuong's normalized likelihood-ratio test for non-nested models, given the
/// pointwise log-likelihoods of each observation under models `a` and `b`.
pub fn likelihood_ratio_test(ln_a: &[f64], ln_b: &[f64]) -> Result<LrTest> {
    if ln_a.len() != ln_b.len() || ln_a.is_empty() {
        return Err(invalid(
            "pointwise",
            "log-likelihood vectors must be nonempty and equal length",
        ));
    }
    let diffs: Vec<f64> = ln_a.iter().zip(ln_b).map(|(a, b)| a - b).collect();
    let weights = vec![1u64; diffs.len()];
    Ok(vuong(&diffs, &weights))
}

fn vuong(diffs: &[f64], weights: &[u64]) -> LrTest {
    let n: u64 = weights.iter().sum();
    let lr: f64 = diffs.iter().zip(weights).map(|(d, &w)| d * w as f64).sum();
    let mean = lr / n as f64;
    let var = diffs
        .iter()
        .zip(weights)
        .map(|(d, &w)| w as f64 * (d - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let sd = var.sqrt();
    if sd <= 0.0 || !(sd * (n as f64).sqrt()).is_normal() {
        return LrTest {
            lr,
            normalized: None,
            p: 1.0,
        };
    }
    let r = lr / (sd * (n as f64).sqrt());
    LrTest {
        lr,
        normalized: Some(r),
        p: normal_two_sided_p(r),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub alternative: Family,
    /// Power-law log-likelihood minus the alternative's.
    pub lr: f64,
    pub normalized_lr: Option<f64>,
    pub p: f64,
    pub verdict: Verdict,
    pub nested: bool,
    pub fit: AltFit,
    pub diagnostic: Option<String>,
}

/// Compares the fitted power law to each alternative on the tail `x >= pl.x_min`.
pub fn compare_models(
    sample: &CitationSample,
    pl: &PowerLawFit,
    alternatives: &[Family],
) -> Result<Vec<ModelComparison>> {
    let tail = TailData::new(sample, pl.x_min)?;
    let model = pl.model()?;
    alternatives
        .par_iter()
        .map(|&family| compare_one(&tail, &model, family))
        .collect()
}

fn compare_one(tail: &TailData, pl: &DiscretePowerLaw, family: Family) -> Result<ModelComparison> {
    let fit = fit_on_tail(tail, family, Some(pl.alpha()))?;
    let alt = fit.model()?;
    if family.is_nested() {
        let pl_ll = power_law_log_likelihood(pl.alpha(), tail.x_min, tail.n, tail.sum_ln());
        let lr = pl_ll - fit.log_likelihood;
        let p = chi2_1_sf(2.0 * lr.abs());
        return Ok(ModelComparison {
            alternative: family,
            lr,
            normalized_lr: None,
            p,
            verdict: Verdict::from_test(lr, p),
            nested: true,
            fit,
            diagnostic: None,
        });
    }
    let diffs: Vec<f64> = tail
        .support
        .values
        .iter()
        .map(|&v| pl.ln_pmf(v) - alt.ln_pmf(v))
        .collect();
    let test = vuong(&diffs, &tail.support.weights);
    let diagnostic = test
        .normalized
        .is_none()
        .then(|| "pointwise log-likelihood differences have zero variance".to_string());
    Ok(ModelComparison {
        alternative: family,
        lr: test.lr,
        normalized_lr: test.normalized,
        p: test.p,
        verdict: Verdict::from_test(test.lr, test.p),
        nested: false,
        fit,
        diagnostic,
    })
}

/// `n` draws from the fitted alternative, reproducible from `seed`.
pub fn sample_alternative(fit: &AltFit, n: usize, seed: u64) -> Result<CitationSample> {
    sample_model(fit.model()?, n, seed)
}

/// `n` draws from `model`, reproducible from `seed`.
pub fn sample_model(model: AltModel, n: usize, seed: u64) -> Result<CitationSample> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let label = format!("{}(x_min={})", model.family(), model.x_min());
    let sampler = TableSampler::new(model);
    let mut rng = rng_for(seed, Stream::Draw, 0);
    let counts = (0..n).map(|_| sampler.draw(&mut rng)).collect();
    CitationSample::new(label, counts)
}

/// TSV with one row per alternative: `alternative, lr, p, verdict`.
pub fn write_comparison_tsv(rows: &[ModelComparison], out: impl Write) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    wtr.write_record(["alternative", "lr", "p", "verdict"])?;
    for row in rows {
        wtr.write_record([
            row.alternative.name().to_string(),
            row.lr.to_string(),
            row.p.to_string(),
            row.verdict.name().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
