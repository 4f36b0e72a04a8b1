//! Bracketed root finding for monotone functions: bracket by doubling,
//! bisect, then polish with safeguarded Newton.

use crate::error::{Error, Result};

const MAX_EXPAND: usize = 200;

/// Solves `g(x) = target` on the open interval `(lo, hi)` starting from `x0`.
/// `dg` is the derivative used for the Newton phase.
pub fn solve_monotone<G, D>(g: G, dg: D, target: f64, x0: f64, lo: f64, hi: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if !(x0 > lo && x0 < hi) {
        return Err(Error::RootFinding(format!("start {x0} outside ({lo}, {hi})")));
    }
    let r = |x: f64| -> Result<f64> { Ok(g(x)? - target) };
    let r0 = r(x0)?;
    if r0 == 0.0 {
        return Ok(x0);
    }
    // find the side on which the residual changes sign
    let slope = dg(x0)?;
    let mut dir = if (r0 > 0.0) == (slope > 0.0) { -1.0 } else { 1.0 };
    let (mut a, mut ra) = (x0, r0);
    let mut b = x0;
    let mut rb = r0;
    let mut width = 0.1 * x0.abs().max(1e-3);
    let mut found = false;
    for attempt in 0..2 {
        let bound = if dir > 0.0 { hi } else { lo };
        for _ in 0..MAX_EXPAND {
            let mut next = b + dir * width;
            if (next - bound) * dir >= 0.0 {
                next = if bound.is_finite() { 0.5 * (b + bound) } else { next };
            }
            if next == b {
                break;
            }
            let rn = r(next)?;
            if rn.signum() != ra.signum() || rn == 0.0 {
                a = b;
                ra = rb;
                b = next;
                rb = rn;
                found = true;
                break;
            }
            b = next;
            rb = rn;
            width *= 2.0;
        }
        if found {
            break;
        }
        if attempt == 0 {
            // slope sign was misleading; try the other side
            dir = -dir;
            b = x0;
            rb = r0;
            a = x0;
            ra = r0;
            width = 0.1 * x0.abs().max(1e-3);
        }
    }
    if !found {
        return Err(Error::RootFinding(format!("no bracket for target {target} from {x0} in ({lo}, {hi})")));
    }
    if rb == 0.0 {
        return Ok(b);
    }
    let (mut lo_b, mut hi_b, mut r_lo) = if a < b { (a, b, ra) } else { (b, a, rb) };
    // bisection to a coarse bracket
    for _ in 0..200 {
        if hi_b - lo_b <= 1e-6 * (lo_b.abs() + hi_b.abs()).max(1e-300) {
            break;
        }
        let m = 0.5 * (lo_b + hi_b);
        let rm = r(m)?;
        if rm == 0.0 {
            return Ok(m);
        }
        if rm.signum() == r_lo.signum() {
            lo_b = m;
            r_lo = rm;
        } else {
            hi_b = m;
        }
    }
    // Newton, falling back to bisection if it leaves the bracket
    let mut x = 0.5 * (lo_b + hi_b);
    for _ in 0..100 {
        let rx = r(x)?;
        if rx == 0.0 {
            return Ok(x);
        }
        if rx.signum() == r_lo.signum() {
            lo_b = x;
            r_lo = rx;
        } else {
            hi_b = x;
        }
        let d = dg(x)?;
        let mut next = x - rx / d;
        if !(next > lo_b && next < hi_b) || !next.is_finite() {
            next = 0.5 * (lo_b + hi_b);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || hi_b - lo_b <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
