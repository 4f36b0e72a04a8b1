//! Steady solitons with `lambda_F = 0`, `n + d = 6`, `f = k2/phi`.
//!
//! With `s = phi^2` the profile solves `s' = (k1 - 20 k3 s^2)/20`, so
//! `int ds/(A - B s^2) = t` where `A = k1`, `B = 20 k3`, `t = (xi + k4)/20`.

use crate::error::{Error, Result};
use crate::families::quadrature::{simpson, QUAD_TOL};
use crate::families::roots::solve_monotone;
use crate::families::BaseSetup;
use crate::geometry::{Domain, Jet, Profile};
use crate::soliton::WarpedSolitonSpec;

/// Width used when the natural interval is unbounded.
pub const DEFAULT_WIDTH: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct Thm16 {
    pub setup: BaseSetup,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// For `k1 k3 > 0`, take the branch with `phi^4 > k1/(20 k3)`.
    pub outer_branch: bool,
}

/// Closed-form regime of the quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Regime {
    Linear,
    Tan { r: f64 },
    Tanh { r: f64 },
    Coth { r: f64 },
}

impl Thm16 {
    pub fn new(setup: BaseSetup, k1: f64, k2: f64, k3: f64, k4: f64) -> Self {
        Self {
            setup,
            k1,
            k2,
            k3,
            k4,
            outer_branch: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const NAME: &str = "thm16";
        self.setup.require_non_null(NAME)?;
        self.setup.require_total_dimension(6, NAME)?;
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3), ("k4", self.k4)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        if self.k1 == 0.0 {
            return Err(Error::Precondition("thm16 requires k1 != 0".into()));
        }
        // f = k2 / phi must be a positive warping function
        if self.k2 <= 0.0 {
            return Err(Error::Precondition(format!("thm16 requires k2 > 0 so that f = k2/phi > 0, got {}", self.k2)));
        }
        Ok(())
    }

    fn a(&self) -> f64 {
        self.k1
    }

    fn b(&self) -> f64 {
        20.0 * self.k3
    }

    fn regime(&self) -> Regime {
        let (a, b) = (self.a(), self.b());
        if b == 0.0 {
            Regime::Linear
        } else if a * b < 0.0 {
            Regime::Tan { r: (-b / a).sqrt() }
        } else if self.outer_branch {
            Regime::Coth { r: (b / a).sqrt() }
        } else {
            Regime::Tanh { r: (b / a).sqrt() }
        }
    }

    fn t(&self, xi: f64) -> f64 {
        (xi + self.k4) / 20.0
    }

    /// `s = phi^2` as a function of `t`.
    fn s_of_t(&self, t: f64) -> f64 {
        let a = self.a();
        match self.regime() {
            Regime::Linear => a * t,
            Regime::Tan { r } => (a * r * t).tan() / r,
            Regime::Tanh { r } => (a * r * t).tanh() / r,
            Regime::Coth { r } => 1.0 / ((a * r * t).tanh() * r),
        }
    }

    /// The maximal `xi` interval on which the closed form is positive and smooth.
    pub fn natural_interval(&self) -> Result<Domain> {
        self.validate()?;
        let a = self.a();
        // interval in t; every regime starts at t = 0 on the side where A t > 0
        let (t_lo, t_hi) = match self.regime() {
            Regime::Linear | Regime::Tanh { .. } | Regime::Coth { .. } => {
                if a > 0.0 {
                    (0.0, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, 0.0)
                }
            }
            Regime::Tan { r } => {
                let end = std::f64::consts::FRAC_PI_2 / (a * r);
                if end > 0.0 {
                    (0.0, end)
                } else {
                    (end, 0.0)
                }
            }
        };
        Domain::new(20.0 * t_lo - self.k4, 20.0 * t_hi - self.k4)
    }

    /// Natural interval, clipped to width 100 when unbounded.
    pub fn default_domain(&self) -> Result<Domain> {
        let nat = self.natural_interval()?;
        Ok(match (nat.lo.is_finite(), nat.hi.is_finite()) {
            (true, true) => nat,
            (true, false) => Domain::new(nat.lo, nat.lo + DEFAULT_WIDTH)?,
            (false, true) => Domain::new(nat.hi - DEFAULT_WIDTH, nat.hi)?,
            (false, false) => Domain::new(-0.5 * DEFAULT_WIDTH, 0.5 * DEFAULT_WIDTH)?,
        })
    }

    /// `phi` jet from the closed form.
    pub fn phi_jet(&self, xi: f64) -> Result<Jet> {
        let s = self.s_of_t(self.t(xi));
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NonPositive {
                what: "phi^2",
                value: s,
                xi,
            });
        }
        Ok(jet_from_s(s, self.k1, self.k3))
    }

    /// `h - const = (20 k1/A) (ln s - ln|A - B s^2| / 2)`.
    fn h_raw(&self, s: f64) -> f64 {
        let (a, b) = (self.a(), self.b());
        20.0 * self.k1 / a * (s.ln() - 0.5 * (a - b * s * s).abs().ln())
    }

    pub fn build(&self, xi_range: Option<Domain>) -> Result<Thm16Solution> {
        self.validate()?;
        let nat = self.natural_interval()?;
        let domain = match xi_range {
            None => self.default_domain()?,
            Some(r) => {
                if r.lo < nat.lo || r.hi > nat.hi {
                    return Err(Error::Singularity {
                        lo: r.lo,
                        hi: r.hi,
                        reason: format!(
                            "k1 - 20 k3 phi^4 or phi vanishes in the requested range; the solution lives on ({}, {})",
                            nat.lo, nat.hi
                        ),
                    });
                }
                r
            }
        };
        let s_mid = self.s_of_t(self.t(domain.midpoint()));
        Ok(Thm16Solution {
            params: self.clone(),
            domain,
            h_anchor: self.h_raw(s_mid),
        })
    }
}

/// Jet of `phi = sqrt(s)` using `s' = (k1 - 20 k3 s^2)/20`, `s'' = -2 k3 s s'`.
fn jet_from_s(s: f64, k1: f64, k3: f64) -> Jet {
    let s1 = (k1 - 20.0 * k3 * s * s) / 20.0;
    let s2 = -2.0 * k3 * s * s1;
    let phi = s.sqrt();
    Jet::new(phi, s1 / (2.0 * phi), s2 / (2.0 * phi) - s1 * s1 / (4.0 * phi * s))
}

/// Closed antiderivative `40 int phi dphi / (k1 - 20 k3 phi^4)` (no constant).
pub fn thm16_antiderivative(k1: f64, k3: f64, phi: f64) -> f64 {
    let (a, b) = (k1, 20.0 * k3);
    let s = phi * phi;
    let f = if b == 0.0 {
        s / a
    } else if a * b < 0.0 {
        let r = (-b / a).sqrt();
        (r * s).atan() / (a * r)
    } else {
        let r = (b / a).sqrt();
        // artanh for r s < 1, arcoth beyond
        0.5 * ((1.0 + r * s) / (1.0 - r * s)).abs().ln() / (a * r)
    };
    20.0 * f
}

#[derive(Debug, Clone)]
pub struct Thm16Solution {
    params: Thm16,
    domain: Domain,
    h_anchor: f64,
}

impl Thm16Solution {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn phi(&self, xi: f64) -> Result<f64> {
        Ok(self.params.phi_jet(xi)?.value)
    }

    /// `phi` by quadrature of the implicit relation plus root finding,
    /// anchored at the closed-form value at the domain midpoint.
    pub fn phi_numeric(&self, xi: f64) -> Result<f64> {
        let p = &self.params;
        let mid = self.domain.midpoint();
        let phi0 = self.phi(mid)?;
        let (k1, k3) = (p.k1, p.k3);
        let integrand = move |x: f64| 40.0 * x / (k1 - 20.0 * k3 * x.powi(4));
        let g = |phi: f64| -> Result<f64> { Ok(mid + simpson(&integrand, phi0, phi, QUAD_TOL)?) };
        let lo = match p.regime() {
            Regime::Coth { r } => (1.0 / r).sqrt(),
            _ => 0.0,
        };
        let hi = match p.regime() {
            Regime::Tanh { r } => (1.0 / r).sqrt(),
            _ => f64::INFINITY,
        };
        solve_monotone(g, |x| Ok(integrand(x)), xi, phi0, lo, hi)
    }

    pub fn spec(&self) -> Result<WarpedSolitonSpec> {
        let p = self.params.clone();
        let dom = self.domain;
        let (pp, pf, ph) = (p.clone(), p.clone(), p.clone());
        let anchor = self.h_anchor;
        let phi = Profile::from_jet_fn(dom, move |xi| pp.phi_jet(xi));
        let f = Profile::from_jet_fn(dom, move |xi| {
            let j = pf.phi_jet(xi)?;
            let (v, d1, d2) = (j.value, j.d1, j.d2);
            let k2 = pf.k2;
            Ok(Jet::new(k2 / v, -k2 * d1 / (v * v), k2 * (2.0 * d1 * d1 / v.powi(3) - d2 / (v * v))))
        });
        let h = Profile::from_jet_fn(dom, move |xi| {
            let j = ph.phi_jet(xi)?;
            let s = j.value * j.value;
            Ok(Jet::new(
                ph.h_raw(s) - anchor,
                ph.k1 / s,
                -2.0 * ph.k1 * j.d1 / (s * j.value),
            ))
        });
        WarpedSolitonSpec::new(
            p.setup.sig.clone(),
            p.setup.dir.clone(),
            p.setup.d,
            0.0,
            0.0,
            phi,
            f,
            h,
            dom,
        )
    }
}

pub fn family_thm16(params: &Thm16, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
    params.build(xi_range)?.spec()
}
