//! Exact inverse-CDF sampling for discrete distributions on `{x_min, x_min + 1, ...}`.

use rand::Rng;

use crate::rng::unit_open_low;

/// A normalized distribution on the integers `x >= x_min`.
pub trait DiscreteTail {
    fn x_min(&self) -> u64;
    fn pmf(&self, x: u64) -> f64;
    /// `P(X >= x)`.
    fn survival(&self, x: u64) -> f64;
}

const MIN_TABLE: u64 = 64;
const MAX_TABLE: u64 = 1 << 16;
const TABLE_MASS_TARGET: f64 = 1e-5;

/// Inverse-CDF sampler. Survival values for the first few thousand support
/// points are tabulated; draws landing beyond the table are located by a
/// bracketed search on the model's exact survival function.
#[derive(Debug, Clone)]
pub struct TableSampler<M> {
    model: M,
    // survival[i] = P(X >= x_min + i), i = 0..=len
    survival: Vec<f64>,
}

impl<M: DiscreteTail> TableSampler<M> {
    pub fn new(model: M) -> Self {
        let x_min = model.x_min();
        let mut len = MIN_TABLE;
        while len < MAX_TABLE && model.survival(x_min + len) > TABLE_MASS_TARGET {
            len *= 2;
        }
        let mut survival = vec![0.0; len as usize + 1];
        survival[len as usize] = model.survival(x_min + len);
        for i in (0..len as usize).rev() {
            survival[i] = survival[i + 1] + model.pmf(x_min + i as u64);
        }
        Self { model, survival }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = unit_open_low(rng);
        self.locate(u)
    }

    /// Smallest `x` with `P(X >= x + 1) < u`.
    fn locate(&self, u: f64) -> u64 {
        let x_min = self.model.x_min();
        let len = self.survival.len() - 1;
        let j = self.survival[1..].partition_point(|&s| s >= u);
        if j < len {
            return x_min + j as u64;
        }
        // P(X >= lo) >= u holds on entry; widen until the survival drops below u.
        let mut lo = x_min + len as u64;
        let mut step = len as u64;
        let mut hi = lo + step;
        while self.model.survival(hi) >= u {
            lo = hi;
            if step >= u64::MAX / 8 {
                return lo;
            }
            step *= 2;
            hi = lo.saturating_add(step);
        }
        // lo: survival >= u; hi: survival < u.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.model.survival(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi - 1
    }
}
