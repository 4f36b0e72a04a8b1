//! Adaptive Simpson quadrature and cached indefinite integrals.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Absolute tolerance used for `h` and `Phi` integrals.
pub const QUAD_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 48;

/// `int_a^b f` by adaptive Simpson with absolute tolerance `tol`.
pub fn simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature { lo: a, hi: b })
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    if !(flm.is_finite() && frm.is_finite() && fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::Singularity {
            lo: a,
            hi: b,
            reason: "non-finite integrand".into(),
        });
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() <= 1e-14 * (a.abs() + b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature { lo: a, hi: b });
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

type Integrand = dyn Fn(f64) -> f64 + Send + Sync;

/// `F(x) = int_{x0}^x f` on `[lo, hi]`, with knot values precomputed so each
/// evaluation integrates over at most one knot spacing.
#[derive(Clone)]
pub struct CumulativeIntegral {
    f: Arc<Integrand>,
    knots: Vec<f64>,
    values: Vec<f64>,
    tol: f64,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("CumulativeIntegral")
            .field("lo", &self.lo())
            .field("hi", &self.hi())
            .field("knots", &self.knots.len())
            .finish()
    }
}

impl CumulativeIntegral {
    pub fn new<F>(f: F, lo: f64, hi: f64, anchor: f64, knots: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("cumulative integral needs a finite range, got [{lo}, {hi}]")));
        }
        if !(lo..=hi).contains(&anchor) {
            return Err(Error::InvalidArgument(format!("anchor {anchor} outside [{lo}, {hi}]")));
        }
        let f: Arc<Integrand> = Arc::new(f);
        let count = knots.max(2);
        let mut xs: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        xs[count - 1] = hi;
        // insert the anchor as a knot so its value is exactly 0
        let pos = xs.partition_point(|&x| x < anchor);
        if xs.get(pos) != Some(&anchor) {
            xs.insert(pos, anchor);
        }
        let tol = QUAD_TOL / xs.len() as f64;
        let mut values = vec![0.0; xs.len()];
        for i in (pos + 1)..xs.len() {
            values[i] = values[i - 1] + simpson(f.as_ref(), xs[i - 1], xs[i], tol)?;
        }
        for i in (0..pos).rev() {
            values[i] = values[i + 1] - simpson(f.as_ref(), xs[i], xs[i + 1], tol)?;
        }
        Ok(Self {
            f,
            knots: xs,
            values,
            tol,
        })
    }

    pub fn lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn hi(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= self.lo() && x <= self.hi()) {
            return Err(Error::OutOfDomain {
                xi: x,
                a: self.lo(),
                b: self.hi(),
            });
        }
        let i = self.knots.partition_point(|&k| k <= x).saturating_sub(1).min(self.knots.len() - 1);
        let j = (i + 1).min(self.knots.len() - 1);
        // start from the closer knot
        let (k, v) = if (x - self.knots[i]).abs() <= (self.knots[j] - x).abs() {
            (self.knots[i], self.values[i])
        } else {
            (self.knots[j], self.values[j])
        };
        Ok(v + simpson(self.f.as_ref(), k, x, self.tol)?)
    }
}
