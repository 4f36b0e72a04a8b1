//! Steady solitons with `lambda_F != 0`, `n + d = 6`, `f = k2/phi`, built
//! from the Lambert-W first integral of
//!
//! ```text
//! phi^2 phi'' - 3 phi phi'^2 + p phi' + q phi^3 = 0,   p = k1/10.
//! ```
//!
//! Along solutions `u = phi'/phi^3 = (q_e/p) (W(Z) + 1)` with
//! `Z = k3 exp(p^2/(4 q_e phi^4) - 1)` and `q_e = -q`, so `xi + k4 = G(phi)`
//! where `G' = p / (q_e phi^3 (W(Z) + 1))`. `G` is normalized to match the
//! `k3 = 0` closed form `G(phi) = -p/(2 q_e phi^2)`.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::lambert::{lambert_w, lambert_w0_of_exp, Branch};
use crate::families::quadrature::{simpson, CumulativeIntegral, QUAD_TOL};
use crate::families::roots::solve_monotone;
use crate::families::BaseSetup;
use crate::geometry::{Domain, Jet, Profile};
use crate::ode::{integrate, Controls, DenseSampler, OdeStatus};
use crate::soliton::WarpedSolitonSpec;

/// Which normalization of `q` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QVariant {
    /// `q = lambda_F / (10 k2^2 ||alpha||^2)`
    #[default]
    Statement,
    /// `q = lambda_F / (k2^2 ||alpha||^2)`
    Proof,
}

impl FromStr for QVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statement" => Ok(QVariant::Statement),
            "proof" => Ok(QVariant::Proof),
            other => Err(Error::InvalidArgument(format!(
                "unknown q variant `{other}` (expected statement or proof)"
            ))),
        }
    }
}

const DEFAULT_PHI_RANGE: (f64, f64) = (0.25, 4.0);
const KNOTS: usize = 256;

#[derive(Debug, Clone)]
pub struct Thm15 {
    pub setup: BaseSetup,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub lambda_f: f64,
    pub q_variant: QVariant,
    pub branch: Branch,
}

impl Thm15 {
    pub fn new(setup: BaseSetup, k1: f64, k2: f64, k3: f64, k4: f64, lambda_f: f64) -> Self {
        Self {
            setup,
            k1,
            k2,
            k3,
            k4,
            lambda_f,
            q_variant: QVariant::default(),
            branch: Branch::default(),
        }
    }

    pub fn p(&self) -> f64 {
        self.k1 / 10.0
    }

    /// `q` as selected by the variant.
    pub fn q(&self) -> f64 {
        let base = self.lambda_f / (self.k2 * self.k2 * self.setup.signed_norm());
        match self.q_variant {
            QVariant::Statement => base / 10.0,
            QVariant::Proof => base,
        }
    }

    fn q_e(&self) -> f64 {
        -self.q()
    }

    pub fn validate(&self) -> Result<()> {
        const NAME: &str = "thm15";
        self.setup.require_non_null(NAME)?;
        self.setup.require_total_dimension(6, NAME)?;
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3), ("k4", self.k4), ("lambda_F", self.lambda_f)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        if self.k1 == 0.0 {
            return Err(Error::Precondition("thm15 requires k1 != 0".into()));
        }
        // f = k2 / phi must be a positive warping function
        if self.k2 <= 0.0 {
            return Err(Error::Precondition(format!("thm15 requires k2 > 0 so that f = k2/phi > 0, got {}", self.k2)));
        }
        if self.lambda_f == 0.0 {
            return Err(Error::Precondition("thm15 requires lambda_F != 0".into()));
        }
        if self.k3 == 0.0 {
            log::info!("thm15 with k3 = 0: limiting mode W(0) = 0");
        }
        Ok(())
    }

    /// `W(Z(phi))` on the configured branch.
    pub fn lambert_term(&self, phi: f64) -> Result<f64> {
        let (p, qe) = (self.p(), self.q_e());
        let exponent = p * p / (4.0 * qe * phi.powi(4)) - 1.0;
        if self.k3 == 0.0 {
            return Ok(0.0);
        }
        if self.k3 > 0.0 {
            if self.branch == Branch::Lower {
                return Err(Error::LambertDomain {
                    x: self.k3 * exponent.exp(),
                    branch: "lower",
                });
            }
            return lambert_w0_of_exp(exponent + self.k3.ln());
        }
        lambert_w(self.k3 * exponent.exp(), self.branch)
    }

    /// `dxi/dphi`.
    pub fn integrand(&self, phi: f64) -> Result<f64> {
        let w1 = self.lambert_term(phi)? + 1.0;
        if w1 == 0.0 {
            return Err(Error::Singularity {
                lo: phi,
                hi: phi,
                reason: "W(Z) + 1 = 0 at the branch point".into(),
            });
        }
        Ok(self.p() / (self.q_e() * phi.powi(3) * w1))
    }

    /// The `phi` jet determined by `phi` alone along a solution.
    pub fn jet_from_phi(&self, phi: f64) -> Result<Jet> {
        let (p, qe) = (self.p(), self.q_e());
        let w = self.lambert_term(phi)?;
        let d1 = qe / p * phi.powi(3) * (w + 1.0);
        let d2 = qe / p * d1 * (3.0 * phi * phi * (w + 1.0) - p * p * w / (qe * phi * phi * (1.0 + w)));
        Ok(Jet::new(phi, d1, d2))
    }

    /// Second derivative from the ODE itself, with `q` from the variant.
    pub fn ode_phi_dd(&self, phi: f64, dphi: f64) -> f64 {
        (3.0 * phi * dphi * dphi - self.p() * dphi - self.q() * phi.powi(3)) / (phi * phi)
    }

    /// Checks the integrand on a `phi` grid, reporting the first bad sub-interval.
    fn scan(&self, lo: f64, hi: f64) -> Result<()> {
        let m = 512;
        let mut prev = lo;
        let mut prev_sign = 0.0;
        for i in 0..=m {
            let x = lo * (hi / lo).powf(i as f64 / m as f64);
            let v = self.integrand(x).map_err(|e| match e {
                Error::LambertDomain { .. } | Error::Singularity { .. } => Error::Singularity {
                    lo: prev,
                    hi: x,
                    reason: format!("Lambert W argument leaves the branch domain ({e})"),
                },
                other => other,
            })?;
            if !v.is_finite() {
                return Err(Error::Singularity {
                    lo: prev,
                    hi: x,
                    reason: "non-finite integrand".into(),
                });
            }
            if prev_sign != 0.0 && v.signum() != prev_sign {
                return Err(Error::Singularity {
                    lo: prev,
                    hi: x,
                    reason: "denominator phi^3 (W + 1) changes sign".into(),
                });
            }
            prev_sign = v.signum();
            prev = x;
        }
        Ok(())
    }

    pub fn build(&self, xi_range: Option<Domain>) -> Result<Thm15Solution> {
        self.validate()?;
        let (mut lo, mut hi) = DEFAULT_PHI_RANGE;
        for attempt in 0..12 {
            self.scan(lo, hi)?;
            let me = self.clone();
            let integrand = move |x: f64| me.integrand(x).unwrap_or(f64::NAN);
            let anchor = 1.0f64.clamp(lo, hi);
            let g = CumulativeIntegral::new(integrand.clone(), lo, hi, anchor, KNOTS)?;
            let offset = -self.p() / (2.0 * self.q_e()) + simpson(&integrand, 1.0, anchor, QUAD_TOL)?;
            let (ga, gb) = (g.eval(lo)? + offset - self.k4, g.eval(hi)? + offset - self.k4);
            let image = Domain::new(ga.min(gb), ga.max(gb))?;
            let domain = match xi_range {
                None => image,
                Some(r) if r.lo >= image.lo && r.hi <= image.hi => r,
                Some(r) => {
                    if attempt == 11 {
                        return Err(Error::Precondition(format!(
                            "requested xi range ({}, {}) exceeds the reachable range ({}, {})",
                            r.lo, r.hi, image.lo, image.hi
                        )));
                    }
                    lo *= 0.5;
                    hi *= 2.0;
                    continue;
                }
            };
            return Thm15Solution::assemble(self.clone(), g, offset, (lo, hi), domain);
        }
        unreachable!("loop returns on the last attempt")
    }
}

struct Inner {
    params: Thm15,
    g: CumulativeIntegral,
    offset: f64,
    phi_range: (f64, f64),
    table: Vec<(f64, f64)>,
    domain: Domain,
    h_phi: Option<CumulativeIntegral>,
}

/// A constructed member of the family.
#[derive(Clone)]
pub struct Thm15Solution {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Thm15Solution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Thm15Solution")
            .field("params", &self.inner.params)
            .field("phi_range", &self.inner.phi_range)
            .field("domain", &self.inner.domain)
            .finish()
    }
}

impl Inner {
    /// `G(phi) - k4`, i.e. the `xi` at which the profile takes the value `phi`.
    fn xi_of(&self, phi: f64) -> Result<f64> {
        Ok(self.g.eval(phi)? + self.offset - self.params.k4)
    }

    fn phi_at(&self, xi: f64) -> Result<f64> {
        self.domain.check(xi)?;
        // coarse bracket from the knot table
        let increasing = self.table[self.table.len() - 1].1 > self.table[0].1;
        let idx = self.table.partition_point(|&(_, x)| if increasing { x < xi } else { x > xi });
        let i = idx.clamp(1, self.table.len() - 1);
        let (pa, xa) = self.table[i - 1];
        let (pb, xb) = self.table[i];
        let x0 = if xb != xa { pa + (pb - pa) * (xi - xa) / (xb - xa) } else { 0.5 * (pa + pb) };
        let (lo, hi) = self.phi_range;
        let x0 = x0.clamp(lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo));
        solve_monotone(|p| self.xi_of(p), |p| self.params.integrand(p), xi, x0, lo, hi)
    }
}

impl Thm15Solution {
    fn assemble(params: Thm15, g: CumulativeIntegral, offset: f64, phi_range: (f64, f64), domain: Domain) -> Result<Self> {
        let (lo, hi) = phi_range;
        let mut table = Vec::with_capacity(KNOTS + 1);
        for i in 0..=KNOTS {
            let p = lo + (hi - lo) * i as f64 / KNOTS as f64;
            table.push((p, g.eval(p)? + offset - params.k4));
        }
        let mut inner = Inner {
            params,
            g,
            offset,
            phi_range,
            table,
            domain,
            h_phi: None,
        };
        let phi_mid = inner.phi_at(domain.midpoint())?;
        let pr = inner.params.clone();
        let k1 = pr.k1;
        let h_integrand = move |x: f64| k1 * pr.integrand(x).unwrap_or(f64::NAN) / (x * x);
        inner.h_phi = Some(CumulativeIntegral::new(h_integrand, lo, hi, phi_mid, KNOTS)?);
        Ok(Self { inner: Arc::new(inner) })
    }

    pub fn params(&self) -> &Thm15 {
        &self.inner.params
    }

    pub fn domain(&self) -> Domain {
        self.inner.domain
    }

    pub fn phi_range(&self) -> (f64, f64) {
        self.inner.phi_range
    }

    /// `phi(xi)` by inverting `G`.
    pub fn phi(&self, xi: f64) -> Result<f64> {
        self.inner.phi_at(xi)
    }

    pub fn phi_jet(&self, xi: f64) -> Result<Jet> {
        let phi = self.phi(xi)?;
        self.inner.params.jet_from_phi(phi)
    }

    /// `xi` at which the profile equals `phi`.
    pub fn xi_of(&self, phi: f64) -> Result<f64> {
        self.inner.xi_of(phi)
    }

    /// `phi^2 = -p / (2 q_e (xi + k4))` when `k3 = 0`.
    pub fn closed_form_k3_zero(&self, xi: f64) -> Option<f64> {
        let pr = &self.inner.params;
        if pr.k3 != 0.0 {
            return None;
        }
        let s = -pr.p() / (2.0 * pr.q_e() * (xi + pr.k4));
        (s > 0.0).then(|| s.sqrt())
    }

    fn h_value(&self, phi: f64) -> Result<f64> {
        self.inner.h_phi.as_ref().expect("assembled").eval(phi)
    }

    pub fn phi_profile(&self) -> Profile {
        let me = self.clone();
        Profile::from_jet_fn(self.domain(), move |xi| me.phi_jet(xi))
    }

    pub fn f_profile(&self) -> Profile {
        let me = self.clone();
        let k2 = self.inner.params.k2;
        Profile::from_jet_fn(self.domain(), move |xi| {
            let j = me.phi_jet(xi)?;
            let (p, p1, p2) = (j.value, j.d1, j.d2);
            Ok(Jet::new(k2 / p, -k2 * p1 / (p * p), k2 * (2.0 * p1 * p1 / p.powi(3) - p2 / (p * p))))
        })
    }

    pub fn h_profile(&self) -> Profile {
        let me = self.clone();
        let k1 = self.inner.params.k1;
        Profile::from_jet_fn(self.domain(), move |xi| {
            let j = me.phi_jet(xi)?;
            let h = me.h_value(j.value)?;
            Ok(Jet::new(h, k1 / (j.value * j.value), -2.0 * k1 * j.d1 / j.value.powi(3)))
        })
    }

    pub fn spec(&self) -> Result<WarpedSolitonSpec> {
        let pr = &self.inner.params;
        WarpedSolitonSpec::new(
            pr.setup.sig.clone(),
            pr.setup.dir.clone(),
            pr.setup.d,
            0.0,
            pr.lambda_f,
            self.phi_profile(),
            self.f_profile(),
            self.h_profile(),
            self.domain(),
        )
    }

    /// Integrates the second-order ODE from the domain midpoint with the
    /// constructed initial data and returns the largest deviation from the
    /// quadrature-inversion profile over `samples` points.
    pub fn ode_cross_check(&self, samples: usize) -> Result<f64> {
        let pr = self.inner.params.clone();
        let dom = self.domain();
        let w = dom.width();
        let (a, b) = (dom.lo + 0.01 * w, dom.hi - 0.01 * w);
        let mid = dom.midpoint();
        let j0 = self.phi_jet(mid)?;
        let controls = Controls::with_tolerances(1e-12, 1e-14);
        let mut worst: f64 = 0.0;
        for end in [a, b] {
            let mut sampler = DenseSampler::uniform(mid, end, samples.max(2) / 2 + 1);
            let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
                if y[0] <= 0.0 {
                    return Err(OdeStatus::PositivityLoss);
                }
                dy[0] = y[1];
                dy[1] = pr.ode_phi_dd(y[0], y[1]);
                Ok(())
            };
            let out = integrate(rhs, mid, &[j0.value, j0.d1], end, &controls, |s| sampler.observe(s))?;
            if out.status != OdeStatus::Completed {
                return Err(Error::Precondition(format!(
                    "ODE integration stopped with status {} at xi = {}",
                    out.status.as_str(),
                    out.t
                )));
            }
            for (xi, y) in &sampler.samples {
                worst = worst.max((y[0] - self.phi(*xi)?).abs());
            }
        }
        Ok(worst)
    }
}

pub fn family_thm15(params: &Thm15, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
    params.build(xi_range)?.spec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::{certify, Verdict};

    fn example1(k3: f64) -> Thm15 {
        Thm15::new(BaseSetup::euclidean_axis(3, 3).unwrap(), 1.0, 1.0, k3, 0.0, -6.0)
    }

    #[test]
    fn k3_zero_matches_closed_form() {
        let sol = example1(0.0).build(None).unwrap();
        let dom = sol.domain();
        assert!(dom.hi < 0.0);
        for i in 1..20 {
            let xi = dom.lo + dom.width() * i as f64 / 20.0;
            let exact = sol.closed_form_k3_zero(xi).unwrap();
            assert!((sol.phi(xi).unwrap() - exact).abs() < 1e-8 * exact.max(1.0), "xi={xi}");
        }
    }

    #[test]
    fn statement_variant_certifies() {
        for k3 in [0.0, 0.5, -1e-3] {
            let spec = family_thm15(&example1(k3), None).unwrap();
            let rep = certify(&spec, 60, 1e-7).unwrap();
            assert_eq!(rep.verdict, Verdict::Certified, "k3={k3}: {:?}", rep.failure);
        }
    }

    #[test]
    fn proof_variant_does_not_certify() {
        let mut p = example1(0.5);
        p.q_variant = QVariant::Proof;
        let spec = family_thm15(&p, None).unwrap();
        assert_eq!(certify(&spec, 40, 1e-7).unwrap().verdict, Verdict::Rejected);
    }

    #[test]
    fn construction_paths_agree() {
        let sol = example1(0.5).build(None).unwrap();
        assert!(sol.ode_cross_check(40).unwrap() < 1e-6);
    }

    #[test]
    fn preconditions() {
        let mut p = example1(1.0);
        p.setup = BaseSetup::euclidean_axis(3, 2).unwrap();
        assert!(matches!(p.build(None), Err(Error::Precondition(m)) if m.contains("n + d = 6")));
        let mut p = example1(1.0);
        p.lambda_f = 0.0;
        assert!(p.build(None).is_err());
        let mut p = example1(1.0);
        p.branch = Branch::Lower;
        assert!(matches!(p.build(None), Err(Error::Singularity { .. })));
    }
}
