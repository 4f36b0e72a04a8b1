//! Scalar profiles of the invariant `xi`.
//!
//! A [`Profile`] evaluates to a [`Jet`] (value, first and second derivative)
//! on a declared open interval. Expression and closed-form profiles carry
//! exact derivatives; numeric callbacks fall back to Richardson-extrapolated
//! central differences.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{self, Expr};
use crate::error::{Error, Result};

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "domain ({lo}, {hi}) is not a nonempty open interval"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi > self.lo && xi < self.hi
    }

    pub fn check(&self, xi: f64) -> Result<()> {
        if self.contains(xi) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                xi,
                a: self.lo,
                b: self.hi,
            })
        }
    }

    pub fn intersect(&self, other: &Domain) -> Result<Domain> {
        Domain::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Exact derivatives (parsed expression or closed-form jet).
    Analytic,
    /// Value-only callback; derivatives by finite differences.
    NumericCallback,
}

type JetFn = dyn Fn(f64) -> Result<Jet> + Send + Sync;
type ValueFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Repr {
    Expression {
        source: String,
        expr: Expr,
        d1: Expr,
        d2: Expr,
    },
    Jet(Arc<JetFn>),
    Callback(Arc<ValueFn>),
}

#[derive(Clone)]
pub struct Profile {
    repr: Repr,
    domain: Domain,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Expression { source, .. } => format!("expr({source})"),
            Repr::Jet(_) => "jet".to_string(),
            Repr::Callback(_) => "callback".to_string(),
        };
        f.debug_struct("Profile")
            .field("repr", &kind)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Profile {
    pub fn expression(source: &str, domain: Domain) -> Result<Self> {
        let expr = dsl::parse_expression(source)?;
        Ok(Self::from_expr(source.to_string(), expr, domain))
    }

    pub fn from_expr(source: String, expr: Expr, domain: Domain) -> Self {
        let d1 = expr.derivative();
        let d2 = d1.derivative();
        Self {
            repr: Repr::Expression {
                source,
                expr,
                d1,
                d2,
            },
            domain,
        }
    }

    pub fn from_jet_fn<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(f64) -> Result<Jet> + Send + Sync + 'static,
    {
        Self {
            repr: Repr::Jet(Arc::new(f)),
            domain,
        }
    }

    pub fn callback<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            repr: Repr::Callback(Arc::new(f)),
            domain,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_jet_fn(Domain::real_line(), move |_| Ok(Jet::constant(c)))
    }

    pub fn kind(&self) -> ProfileKind {
        match self.repr {
            Repr::Expression { .. } | Repr::Jet(_) => ProfileKind::Analytic,
            Repr::Callback(_) => ProfileKind::NumericCallback,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Source text, for expression profiles.
    pub fn source(&self) -> Option<&str> {
        match &self.repr {
            Repr::Expression { source, .. } => Some(source),
            _ => None,
        }
    }

    pub fn with_domain(&self, domain: Domain) -> Self {
        Self {
            repr: self.repr.clone(),
            domain,
        }
    }

    pub fn jet(&self, xi: f64) -> Result<Jet> {
        self.domain.check(xi)?;
        let jet = match &self.repr {
            Repr::Expression { expr, d1, d2, .. } => {
                Jet::new(expr.eval(xi), d1.eval(xi), d2.eval(xi))
            }
            Repr::Jet(f) => f(xi)?,
            Repr::Callback(f) => fd_jet(f.as_ref(), xi, &self.domain),
        };
        if !jet.is_finite() {
            return Err(Error::NonFinite {
                what: "profile",
                xi,
            });
        }
        Ok(jet)
    }

    pub fn value(&self, xi: f64) -> Result<f64> {
        self.domain.check(xi)?;
        let v = match &self.repr {
            Repr::Expression { expr, .. } => expr.eval(xi),
            Repr::Jet(f) => f(xi)?.value,
            Repr::Callback(f) => f(xi),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                what: "profile",
                xi,
            })
        }
    }

    /// Value that must be strictly positive (conformal factor, warping function).
    pub fn positive_jet(&self, xi: f64, what: &'static str) -> Result<Jet> {
        let j = self.jet(xi)?;
        if j.value <= 0.0 {
            return Err(Error::NonPositive {
                what,
                value: j.value,
                xi,
            });
        }
        Ok(j)
    }

    /// `c * self`
    pub fn scaled(&self, c: f64) -> Self {
        let me = self.clone();
        Self::from_jet_fn(self.domain, move |xi| {
            let j = me.jet(xi)?;
            Ok(Jet::new(c * j.value, c * j.d1, c * j.d2))
        })
        .keep_kind(self)
    }

    /// `self + c`
    pub fn shifted(&self, c: f64) -> Self {
        let me = self.clone();
        Self::from_jet_fn(self.domain, move |xi| {
            let j = me.jet(xi)?;
            Ok(Jet::new(j.value + c, j.d1, j.d2))
        })
        .keep_kind(self)
    }

    pub fn add(&self, other: &Profile) -> Result<Self> {
        let (a, b) = (self.clone(), other.clone());
        let domain = self.domain.intersect(&other.domain)?;
        Ok(Self::from_jet_fn(domain, move |xi| {
            let (p, q) = (a.jet(xi)?, b.jet(xi)?);
            Ok(Jet::new(p.value + q.value, p.d1 + q.d1, p.d2 + q.d2))
        }))
    }

    pub fn mul(&self, other: &Profile) -> Result<Self> {
        let (a, b) = (self.clone(), other.clone());
        let domain = self.domain.intersect(&other.domain)?;
        Ok(Self::from_jet_fn(domain, move |xi| {
            let (p, q) = (a.jet(xi)?, b.jet(xi)?);
            Ok(Jet::new(
                p.value * q.value,
                p.d1 * q.value + p.value * q.d1,
                p.d2 * q.value + 2.0 * p.d1 * q.d1 + p.value * q.d2,
            ))
        }))
    }

    // wrapping a callback in a jet closure must not promote it to analytic
    fn keep_kind(self, original: &Profile) -> Self {
        match &original.repr {
            Repr::Callback(_) => {
                let me = self.clone();
                Self::callback(self.domain, move |xi| me.value(xi).unwrap_or(f64::NAN))
            }
            _ => self,
        }
    }
}

/// Central-difference step used for first derivatives.
pub fn fd_step(xi: f64) -> f64 {
    1e-6_f64.max(1e-6 * xi.abs())
}

/// Step for second derivatives; `h^2` sits in the denominator so the
/// first-derivative step would leave only ~4 significant digits.
fn fd_step2(xi: f64) -> f64 {
    1e-4_f64.max(1e-4 * xi.abs())
}

fn fd_jet(f: &ValueFn, xi: f64, domain: &Domain) -> Jet {
    let room = (xi - domain.lo).min(domain.hi - xi) / 2.5;
    let h1 = fd_step(xi).min(room);
    let h2 = fd_step2(xi).min(room);
    let value = f(xi);
    let d1 = |h: f64| (f(xi + h) - f(xi - h)) / (2.0 * h);
    let d2 = |h: f64| (f(xi + h) - 2.0 * value + f(xi - h)) / (h * h);
    // one level of Richardson extrapolation on the O(h^2) stencils
    Jet::new(
        value,
        (4.0 * d1(0.5 * h1) - d1(h1)) / 3.0,
        (4.0 * d2(0.5 * h2) - d2(h2)) / 3.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_profile_matches_closed_form() {
        let p = Profile::expression("sqrt(xi/20)", Domain::new(0.0, 100.0).unwrap()).unwrap();
        let j = p.jet(20.0).unwrap();
        assert!((j.value - 1.0).abs() < 1e-15);
        // d/dxi sqrt(xi/20) = 1/(2 sqrt(20 xi))
        assert!((j.d1 - 1.0 / (2.0 * (400.0f64).sqrt())).abs() < 1e-15);
        assert_eq!(p.kind(), ProfileKind::Analytic);
    }

    #[test]
    fn evaluation_outside_domain_is_an_error() {
        let p = Profile::expression("ln(xi)", Domain::new(0.0, 10.0).unwrap()).unwrap();
        assert!(matches!(p.jet(-1.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(p.jet(10.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn callback_derivatives_by_richardson() {
        let p = Profile::callback(Domain::new(-5.0, 5.0).unwrap(), |x| (0.3 * x).exp());
        let j = p.jet(1.2).unwrap();
        let e = (0.36f64).exp();
        assert!((j.d1 - 0.3 * e).abs() < 1e-9);
        assert!((j.d2 - 0.09 * e).abs() < 1e-8);
        assert_eq!(p.kind(), ProfileKind::NumericCallback);
        assert_eq!(p.scaled(2.0).kind(), ProfileKind::NumericCallback);
    }

    #[test]
    fn callback_near_boundary_stays_inside() {
        let p = Profile::callback(Domain::new(0.0, 1.0).unwrap(), |x| {
            assert!(x > 0.0);
            x.ln()
        });
        // the step shrinks to a fraction of the distance to 0, so accuracy drops
        let j = p.jet(1e-5).unwrap();
        assert!((j.d1 - 1e5).abs() / 1e5 < 1e-3);
        let j = p.jet(1e-3).unwrap();
        assert!((j.d1 - 1e3).abs() / 1e3 < 1e-6);
    }

    #[test]
    fn combinators() {
        let d = Domain::real_line();
        let a = Profile::expression("xi^2", d).unwrap();
        let b = Profile::expression("exp(xi)", d).unwrap();
        let prod = a.mul(&b).unwrap().jet(0.5).unwrap();
        let e = 0.5f64.exp();
        assert!((prod.d2 - (2.0 + 4.0 * 0.5 + 0.25) * e).abs() < 1e-13);
        let s = a.scaled(3.0).shifted(1.0).jet(2.0).unwrap();
        assert_eq!(s, Jet::new(13.0, 12.0, 6.0));
    }

    #[test]
    fn positivity_guard() {
        let p = Profile::constant(-1.0);
        assert!(matches!(
            p.positive_jet(0.0, "phi"),
            Err(Error::NonPositive { what: "phi", .. })
        ));
    }
}
