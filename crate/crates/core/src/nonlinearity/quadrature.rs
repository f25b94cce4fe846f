//! Adaptive Simpson quadrature and a bracketed golden-section maximizer.

use crate::error::{Error, Result};

pub const QUAD_TOL: f64 = 1e-10;
pub const QUAD_MAX_DEPTH: u32 = 40;
/// Levels always bisected before the error test applies, so that features
/// narrower than the initial Simpson stencil are not stepped over.
const MIN_DEPTH: u32 = 4;

struct Simpson<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    unresolved: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        forced: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let both = left + right;
        let delta = both - whole;
        // below this the difference is rounding, not truncation
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if forced == 0 && (delta.abs() <= 15.0 * tol.max(floor) || lm <= a || rm >= b) {
            return both + delta / 15.0;
        }
        if depth == 0 {
            self.unresolved += delta.abs() / 15.0;
            return both + delta / 15.0;
        }
        let forced = forced.saturating_sub(1);
        self.recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, forced)
            + self.recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, forced)
    }
}

/// ∫ₐᵇ f with absolute tolerance `tol`; an error carries the accumulated
/// estimate when the depth cap leaves more than `tol` unresolved.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let flo = f(lo);
    let fhi = f(hi);
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    let mut s = Simpson { f: &f, unresolved: 0.0 };
    let value = s.recurse(lo, flo, hi, fhi, mid, fmid, whole, tol, max_depth, MIN_DEPTH.min(max_depth));
    if !value.is_finite() || s.unresolved > tol {
        return Err(Error::Quadrature { a, b, estimate: s.unresolved });
    }
    Ok(sign * value)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximizer of `f` on [a, b]. Returns the best
/// (argument, value) seen, including the endpoints.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iterations: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut best = (lo, f(lo));
    let fhi = f(hi);
    if fhi > best.1 {
        best = (hi, fhi);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    best
}
