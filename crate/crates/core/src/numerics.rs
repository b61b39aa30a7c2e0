//! Quadrature, root finding and summation helpers.

use crate::error::{CoverError, Result};

/// Relative tolerance used for every tail integral in the crate.
pub const QUAD_REL_TOL: f64 = 1e-9;
const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct Asr<'a, F> {
    f: &'a F,
    unresolved: f64,
}

impl<F: Fn(f64) -> f64> Asr<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            if depth == 0 && delta.abs() > 15.0 * eps {
                self.unresolved += delta.abs() / 15.0;
            }
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + self.recurse(m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (absolute floor `1e-300`). Returns an error if the recursion
/// bottoms out with an error estimate above tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    // Coarse magnitude estimate from a few panels fixes the absolute target.
    let probe = {
        let n = 16;
        let h = (b - a) / n as f64;
        (0..=n).map(|i| f(a + i as f64 * h).abs()).sum::<f64>() * h.abs()
    };
    let eps = (rel_tol * probe.max(whole.abs())).max(1e-300);
    let mut asr = Asr { f: &f, unresolved: 0.0 };
    let value = asr.recurse(a, b, fa, fm, fb, whole, eps, MAX_DEPTH);
    if asr.unresolved > eps || !value.is_finite() {
        return Err(CoverError::Quadrature {
            a,
            b,
            error: asr.unresolved,
        });
    }
    Ok(value)
}

/// Adaptive Simpson over consecutive panels separated by `breaks` (kinks of
/// the integrand). Breaks outside `(a, b)` are ignored.
pub fn adaptive_simpson_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], rel_tol)?;
    }
    Ok(total)
}

/// Safeguarded Newton iteration for a root of `f` bracketed by `[lo, hi]`
/// (`f(lo)` and `f(hi)` of opposite sign). A Newton step leaving the current
/// bracket is replaced by bisection.
pub fn newton_bisect<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, x0: f64, xtol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let flo = f(lo);
    let rising = flo < 0.0;
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= xtol * x.abs().max(1.0) || hi - lo <= xtol * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Pairwise summation with a fixed reduction tree determined by the length
/// of `xs` alone.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Harmonic number `H_n`.
pub fn harmonic(n: u64) -> f64 {
    // summing small terms first keeps the rounding error at a few ulps
    compensated_sum((1..=n).rev().map(|k| 1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_gaussian() {
        let q = adaptive_simpson(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-13);
        let g = adaptive_simpson(|x: f64| (-x * x).exp(), 0.0, 10.0, 1e-10).unwrap();
        let exact = std::f64::consts::PI.sqrt() / 2.0;
        assert!((g - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn piecewise_handles_kinks() {
        let f = |x: f64| (x - 0.3).abs();
        let q = adaptive_simpson_piecewise(f, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        assert!((q - exact).abs() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = adaptive_simpson(|x: f64| if x > 0.0 { 1.0 / x } else { 0.0 }, 0.0, 1.0, 1e-9);
        assert!(matches!(r, Err(CoverError::Quadrature { .. })));
    }

    #[test]
    fn newton_finds_sqrt2() {
        let r = newton_bisect(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, 1.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert_eq!(harmonic(2), 1.5);
        let direct: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        assert!((harmonic(100) - direct).abs() < 1e-13);
    }
}
