//! Semi-parametric bootstrap goodness-of-fit test for a fitted power law.
//!
//! Each synthetic dataset has the size of the observed sample. An observation
//! is drawn from the fitted tail with probability `n_tail / n` and otherwise
//! resampled uniformly from the observed values below `x_min`. Every synthetic
//! dataset is refit from scratch, x_min scan included, and its KS distance to
//! its own fit is compared against the observed one.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::CitationSample;
use crate::error::{invalid, Error, Result};
use crate::powerlaw::{fit_tail, ks_distance, PowerLawFit};
use crate::rng::{rng_for, Stream};
use crate::sampler::TableSampler;

/// p-values at or below this rule the power law out.
pub const RULE_OUT_THRESHOLD: f64 = 0.10;
pub const DEFAULT_SIMS: usize = 2500;

// Stored and recomputed KS may differ by serialization round-off only.
const STALE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub ks_empirical: f64,
    pub n_sims: usize,
    pub n_exceeding: usize,
    /// Synthetic datasets that could not be refit; excluded from the p-value.
    pub n_failed: usize,
    pub p_value: f64,
    pub ruled_out: bool,
    pub seed: u64,
}

/// Number of simulations giving p-value accuracy `epsilon`: `ceil(1 / (4 ε²))`.
pub fn required_sims(epsilon: f64) -> Result<usize> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    let raw = 0.25 / (epsilon * epsilon);
    let nearest = raw.round();
    // Absorb representation error in ε (0.02 is not exact in binary).
    let sims = if (raw - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        raw.ceil()
    };
    Ok(sims.max(1.0) as usize)
}

/// Runs `n_sims` semi-parametric replicates seeded from `seed`.
pub fn gof_test(
    sample: &CitationSample,
    fit: &PowerLawFit,
    n_sims: usize,
    seed: u64,
) -> Result<GofResult> {
    if n_sims == 0 {
        return Err(invalid("n_sims", "must be at least 1"));
    }
    let model = fit.model()?;
    let ks_empirical = ks_distance(sample, &model)?;
    if (ks_empirical - fit.ks).abs() > STALE_TOLERANCE {
        return Err(Error::StaleFit {
            stored: fit.ks,
            recomputed: ks_empirical,
        });
    }

    let synthetic = synthetic_ks(sample, fit, n_sims, seed)?;
    let n_failed = synthetic.iter().filter(|o| o.is_none()).count();
    let n_exceeding = count_exceeding(&synthetic, ks_empirical);
    let valid = n_sims - n_failed;
    if valid == 0 {
        return Err(Error::NonConvergence(
            "no synthetic dataset could be refit".to_string(),
        ));
    }
    let p_value = n_exceeding as f64 / valid as f64;
    Ok(GofResult {
        ks_empirical,
        n_sims,
        n_exceeding,
        n_failed,
        p_value,
        ruled_out: is_ruled_out(p_value),
        seed,
    })
}

/// KS distance of each synthetic dataset to its own refit; `None` where the
/// refit failed. Replicate `r` depends only on `(seed, r)`.
pub fn synthetic_ks(
    sample: &CitationSample,
    fit: &PowerLawFit,
    n_sims: usize,
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    let model = fit.model()?;
    let n = sample.len();
    let below = sample.below(fit.x_min);
    let n_tail = sample.tail(fit.x_min).len();
    let p_tail = n_tail as f64 / n as f64;
    let sampler = TableSampler::new(model);
    let fixed = fit.x_min_fixed.then_some(fit.x_min);

    Ok((0..n_sims as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, Stream::GoodnessOfFit, r);
            let mut synthetic: Vec<u64> = (0..n)
                .map(|_| {
                    if below.is_empty() || rng.random::<f64>() < p_tail {
                        sampler.draw(&mut rng)
                    } else {
                        below[rng.random_range(0..below.len())]
                    }
                })
                .collect();
            synthetic.sort_unstable();
            fit_tail(&synthetic, fit.min_tail, fixed).ok().map(|f| f.ks)
        })
        .collect())
}

/// Synthetic statistics at least as large as the observed one.
pub fn count_exceeding(synthetic: &[Option<f64>], ks_empirical: f64) -> usize {
    synthetic
        .iter()
        .filter(|ks| ks.is_some_and(|k| k >= ks_empirical))
        .count()
}

/// Verdict for a given p-value.
pub fn is_ruled_out(p_value: f64) -> bool {
    p_value <= RULE_OUT_THRESHOLD
}
