//! Brent's bracketed root finder.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentOutcome {
    pub root: f64,
    pub f_root: f64,
    /// Final bracket `(lo, hi)` containing a sign change (or the exact root).
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// True when the bracket collapsed to machine precision before `ftol` was met.
    pub stalled: bool,
}

/// Finds a root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign. Stops once the bracket is narrower than `rtol * |root|` and
/// `|f(root)| <= ftol`, or when the bracket can no longer shrink.
#[allow(clippy::too_many_arguments)]
pub fn brent<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    rtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<BrentOutcome>
where
    F: FnMut(f64) -> f64,
{
    if f_lo == 0.0 {
        return Ok(exact(lo));
    }
    if f_hi == 0.0 {
        return Ok(exact(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut a, mut b, mut c) = (lo, hi, hi);
    let (mut fa, mut fb, mut fc) = (f_lo, f_hi, f_hi);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if (fb > 0.0) == (fc > 0.0) {
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
        let floor = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let small_residual = fb.abs() <= ftol;
        let tol1 = floor + if small_residual { 0.5 * rtol * b.abs() } else { 0.0 };
        let xm = 0.5 * (c - b);
        let narrow = xm.abs() <= 0.5 * rtol * b.abs();
        let stalled = xm.abs() <= floor;
        if fb == 0.0 || (narrow && small_residual) || stalled {
            return Ok(BrentOutcome {
                root: b,
                f_root: fb,
                bracket: (b.min(c), b.max(c)),
                iterations: iter,
                stalled: stalled && !small_residual,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
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
        if !fb.is_finite() {
            return Err(Error::NonFinite("root finder"));
        }
    }
    Ok(BrentOutcome {
        root: b,
        f_root: fb,
        bracket: (b.min(c), b.max(c)),
        iterations: max_iter,
        stalled: true,
    })
}

fn exact(x: f64) -> BrentOutcome {
    BrentOutcome {
        root: x,
        f_root: 0.0,
        bracket: (x, x),
        iterations: 0,
        stalled: false,
    }
}
