//! Composite Simpson quadrature, used as an independent check on the
//! closed-form integrals.

use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;
use crate::mise::MixtureDensity;

/// Composite Simpson rule over `[a, b]` with `points` nodes (odd, >= 3).
///
/// Panics on an even or too-small grid; use [`quadrature_ise`] for a
/// checked entry point.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    assert!(points >= 3 && points % 2 == 1, "simpson needs an odd grid >= 3");
    let intervals = points - 1;
    let h = (b - a) / intervals as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..intervals {
        let v = f(a + h * k as f64);
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Integration range covering every component (and the target) out to ten
/// of the widest standard deviations.
pub fn mixture_range(h: &MixtureDensity, target: &GaussianParams) -> (f64, f64) {
    let comps = h.components();
    let (mut lo, mut hi, mut wide) = (target.mu(), target.mu(), target.sigma());
    for (_, c) in comps {
        lo = lo.min(c.mu());
        hi = hi.max(c.mu());
        wide = wide.max(c.sigma());
    }
    (lo - 10.0 * wide, hi + 10.0 * wide)
}

/// ISE `integral (h - p)^2` by Simpson quadrature.
pub fn quadrature_ise(h: &MixtureDensity, target: &GaussianParams, points: usize) -> Result<f64> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "quadrature grid must be odd and >= 3, got {points}"
        )));
    }
    if h.is_empty() {
        return Err(Error::domain("empty mixture"));
    }
    let (lo, hi) = mixture_range(h, target);
    Ok(simpson(
        |x| {
            let d = h.pdf(x) - target.pdf(x);
            d * d
        },
        lo,
        hi,
        points,
    ))
}
