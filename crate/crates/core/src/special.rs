//! Special functions backing the discrete tail models.
//!
//! Everything here works in `f64` and targets absolute/relative accuracy near
//! machine precision over the parameter ranges the fitters actually visit.
//! The Hurwitz zeta and the cutoff normalizer share one technique: a handful of
//! directly summed terms followed by an Euler–Maclaurin tail.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `B_{2j} / (2j)!` for `j = 1..=10`.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

const ZETA_DIRECT_TERMS: usize = 10;
const ZETA_EM_TERMS: usize = 8;

/// Hurwitz zeta function `ζ(s, q) = Σ_{k≥0} (k + q)^(-s)` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    check_zeta_args(s, q)?;
    Ok(zeta_unchecked(s, q))
}

/// `ζ(s, q)` together with its derivative with respect to `s`.
pub fn hurwitz_zeta_ds(s: f64, q: f64) -> Result<(f64, f64)> {
    check_zeta_args(s, q)?;
    Ok(zeta_with_derivative(s, q))
}

fn check_zeta_args(s: f64, q: f64) -> Result<()> {
    if s <= 1.0 || !s.is_finite() {
        return Err(Error::NonNormalizable(s));
    }
    if q <= 0.0 || !q.is_finite() {
        return Err(crate::error::invalid(
            "q",
            format!("must be positive, got {q}"),
        ));
    }
    Ok(())
}

pub(crate) fn zeta_unchecked(s: f64, q: f64) -> f64 {
    let mut head = 0.0;
    for k in 0..ZETA_DIRECT_TERMS {
        head += (q + k as f64).powf(-s);
    }
    let a = q + ZETA_DIRECT_TERMS as f64;
    let a_pow = a.powf(-s);
    let mut tail = a * a_pow / (s - 1.0) + 0.5 * a_pow;
    // term_j = B_{2j}/(2j)! * s(s+1)...(s+2j-2) * a^(-s-2j+1)
    let inv_a2 = 1.0 / (a * a);
    let mut rising = s;
    let mut power = a_pow / a;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL
        .iter()
        .take(ZETA_EM_TERMS)
        .enumerate()
    {
        if j > 0 {
            let m = (2 * j) as f64;
            rising *= (s + m - 1.0) * (s + m);
            power *= inv_a2;
        }
        tail += coef * rising * power;
    }
    head + tail
}

pub(crate) fn zeta_with_derivative(s: f64, q: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut deriv = 0.0;
    for k in 0..ZETA_DIRECT_TERMS {
        let x = q + k as f64;
        let t = x.powf(-s);
        value += t;
        deriv -= t * x.ln();
    }
    let a = q + ZETA_DIRECT_TERMS as f64;
    let ln_a = a.ln();
    let a_pow = a.powf(-s);
    let sm1 = s - 1.0;
    let lead = a * a_pow / sm1;
    value += lead + 0.5 * a_pow;
    deriv -= lead * (ln_a + 1.0 / sm1) + 0.5 * a_pow * ln_a;

    let inv_a2 = 1.0 / (a * a);
    let mut rising = s;
    let mut log_rising_deriv = 1.0 / s;
    let mut power = a_pow / a;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL
        .iter()
        .take(ZETA_EM_TERMS)
        .enumerate()
    {
        if j > 0 {
            let m = (2 * j) as f64;
            rising *= (s + m - 1.0) * (s + m);
            log_rising_deriv += 1.0 / (s + m - 1.0) + 1.0 / (s + m);
            power *= inv_a2;
        }
        let term = coef * rising * power;
        value += term;
        deriv += term * (log_rising_deriv - ln_a);
    }
    (value, deriv)
}

/// Normalizer `Σ_{x≥q} x^(-α) e^(-λx)` of the power law with exponential cutoff.
///
/// `λ = 0` reduces to the Hurwitz zeta and requires `α > 1`; for `λ > 0` any
/// `α > -1` is accepted.
pub fn cutoff_normalizer(alpha: f64, lambda: f64, q: u64) -> Result<f64> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(crate::error::invalid(
            "lambda",
            format!("must be nonnegative, got {lambda}"),
        ));
    }
    if q == 0 {
        return Err(crate::error::invalid("x_min", "must be at least 1"));
    }
    if lambda == 0.0 {
        return hurwitz_zeta(alpha, q as f64);
    }
    if alpha <= -1.0 || !alpha.is_finite() {
        return Err(crate::error::invalid(
            "alpha",
            format!("must exceed -1, got {alpha}"),
        ));
    }
    Ok(cutoff_normalizer_unchecked(alpha, lambda, q as f64))
}

pub(crate) fn cutoff_normalizer_unchecked(alpha: f64, lambda: f64, q: f64) -> f64 {
    if lambda >= 0.5 {
        return cutoff_direct(alpha, lambda, q);
    }
    let direct = 16usize.max((2.0 * alpha.abs()).ceil() as usize);
    let mut head = 0.0;
    for k in 0..direct {
        let x = q + k as f64;
        head += (-alpha * x.ln() - lambda * x).exp();
    }
    let m = q + direct as f64;
    head + cutoff_em_tail(alpha, lambda, m)
}

fn cutoff_direct(alpha: f64, lambda: f64, q: f64) -> f64 {
    let growth = (-alpha).max(0.0);
    let mut sum = 0.0;
    let mut x = q;
    loop {
        let term = (-alpha * x.ln() - lambda * x).exp();
        sum += term;
        let ratio = ((x + 1.0) / x).powf(growth) * (-lambda).exp();
        if ratio < 1.0 {
            let bound = term * ratio / (1.0 - ratio);
            if bound <= 1e-17 * sum || term == 0.0 {
                return sum;
            }
        }
        x += 1.0;
    }
}

/// `Σ_{x≥m} f(x)` for `f(x) = x^(-α) e^(-λx)` by Euler–Maclaurin.
fn cutoff_em_tail(alpha: f64, lambda: f64, m: f64) -> f64 {
    let f_m = (-alpha * m.ln() - lambda * m).exp();
    let integral = m.powf(1.0 - alpha) * expint(alpha, lambda * m);

    // Derivatives of f at m via Leibniz: f^(k) = e^{-λm} Σ_i C(k,i) (-1)^i (α)_i m^{-α-i} (-λ)^{k-i}.
    // power_terms[i] = (-1)^i (α)_i m^{-α-i} e^{-λm}
    const MAX_ORDER: usize = 2 * BERNOULLI_OVER_FACTORIAL.len();
    let mut power_terms = [0.0f64; MAX_ORDER];
    power_terms[0] = f_m;
    for i in 1..MAX_ORDER {
        power_terms[i] = -power_terms[i - 1] * (alpha + (i - 1) as f64) / m;
    }
    let mut correction = 0.0;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let order = 2 * j + 1;
        let mut deriv = 0.0;
        let mut binom = 1.0;
        for (i, pt) in power_terms.iter().enumerate().take(order + 1) {
            if i > 0 {
                binom *= (order + 1 - i) as f64 / i as f64;
            }
            let lam_pow = (-lambda).powi((order - i) as i32);
            deriv += binom * pt * lam_pow;
        }
        correction -= coef * deriv;
    }
    integral + 0.5 * f_m + correction
}

/// Generalized exponential integral `E_p(z) = ∫_1^∞ e^{-zu} u^{-p} du` for `z > 0`, `p > -1`.
pub fn expint(p: f64, z: f64) -> f64 {
    if z >= 1.0 {
        return expint_continued_fraction(p, z);
    }
    // Split at u = 1/z: the far piece rescales onto E_p(1).
    let far = z.powf(p - 1.0) * expint_continued_fraction(p, 1.0);
    let span = -z.ln();
    let upper = if p > 1.0 {
        span.min(40.0 / (p - 1.0))
    } else {
        span
    };
    let near = gauss_legendre_panels(0.0, upper, 1.0 / (1.0f64).max((1.0 - p).abs()), |t| {
        ((1.0 - p) * t - z * t.exp()).exp()
    });
    near + far
}

fn expint_continued_fraction(p: f64, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + p;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (p - 1.0 + i as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

const GL_ORDER: usize = 12;

fn gauss_legendre_rule() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn gauss_legendre_panels(lo: f64, hi: f64, max_width: f64, f: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let rule = gauss_legendre_rule();
    let mut total = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for &(x, w) in rule.iter() {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// `ln P(Z > z)` for a standard normal `Z`, accurate far into the upper tail.
pub fn ln_normal_sf(z: f64) -> f64 {
    if z < 35.0 {
        (0.5 * libm::erfc(z / std::f64::consts::SQRT_2)).ln()
    } else {
        let r = 1.0 / (z * z);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
        -0.5 * z * z - z.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// `ln P(a < Z ≤ b)` for a standard normal `Z` and `a < b`.
pub fn ln_normal_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if a >= 0.0 {
        ln_sf_difference(a, b)
    } else if b <= 0.0 {
        ln_sf_difference(-b, -a)
    } else {
        let outside = normal_sf(b) + normal_sf(-a);
        (-outside).ln_1p()
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

// ln(Q(lo) - Q(hi)) for 0 <= lo < hi
fn ln_sf_difference(lo: f64, hi: f64) -> f64 {
    let ln_lo = ln_normal_sf(lo);
    if hi.is_infinite() {
        return ln_lo;
    }
    let d = ln_normal_sf(hi) - ln_lo;
    ln_lo + (-d.exp_m1()).ln()
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((0.5 * x).sqrt())
    }
}

/// Two-sided standard normal p-value for statistic `z`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}
