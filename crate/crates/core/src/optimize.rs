//! One-dimensional root finding and maximisation used by the likelihood fitters.

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Brent's method for a root of `f` bracketed by `[lo, hi]` (`f(lo)` and `f(hi)`
/// of opposite sign). Stops when the bracket is narrower than `tol`.
pub(crate) fn brent_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum(), "root not bracketed");
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    b
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
/// Returns the best point seen, including the interval ends.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = finite_or_min(f(x1));
    let mut f2 = finite_or_min(f(x2));
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = finite_or_min(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = finite_or_min(f(x2));
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for end in [lo, hi] {
        let fe = finite_or_min(f(end));
        if fe > best.1 {
            best = (end, fe);
        }
    }
    best
}

/// Coarse grid scan followed by golden section around the best grid cell.
/// Tolerates multimodality at scales coarser than the grid.
pub(crate) fn grid_golden_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    let step = (hi - lo) / grid as f64;
    let mut best_i = 0;
    let mut best_f = f64::MIN;
    for i in 0..=grid {
        let v = finite_or_min(f(lo + step * i as f64));
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    golden_max(&f, a, b, tol)
}

fn finite_or_min(v: f64) -> f64 {
    if v.is_nan() {
        f64::MIN
    } else {
        v.max(f64::MIN)
    }
}
