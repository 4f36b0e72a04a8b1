//! Steady solitons with constant potential (`h' = 0`, `lambda_F = 0`),
//! obtained from a particular solution `z_p` of the Riccati equation
//!
//! ```text
//! z^2 + 2/(d+1) z' + c_{n,d} (n (phi'/phi)^2 - 2 phi''/phi) = 0,
//! c_{n,d} = (n + d - 1) / (d (d+1)^2).
//! ```
//!
//! The warping function is `f = phi^((n-2)/(d+1)) e^Phi K^(2/(d+1))` with
//! `Phi = int z_p`, `J = int e^{-(d+1) Phi}` and `K = J + 2C/(d+1)`; both
//! integrals are anchored at the midpoint of the range.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::quadrature::CumulativeIntegral;
use crate::families::BaseSetup;
use crate::geometry::{Domain, Jet, Profile};
use crate::soliton::certify::{grid_points, GRID_MARGIN};
use crate::soliton::{certify, Verdict, WarpedSolitonSpec};

/// Largest Riccati residual accepted for a particular solution.
pub const RICCATI_TOL: f64 = 1e-8;
const KNOTS: usize = 128;
const CHECK_POINTS: usize = 200;

pub fn riccati_coefficient(n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    (n + d - 1.0) / (d * (d + 1.0) * (d + 1.0))
}

fn riccati_from_jets(z: Jet, phi: Jet, n: usize, d: usize) -> Result<f64> {
    if phi.value == 0.0 {
        return Err(Error::NonPositive {
            what: "conformal factor phi",
            value: 0.0,
            xi: f64::NAN,
        });
    }
    let l = phi.d1 / phi.value;
    Ok(z.value * z.value
        + 2.0 / (d as f64 + 1.0) * z.d1
        + riccati_coefficient(n, d) * (n as f64 * l * l - 2.0 * phi.d2 / phi.value))
}

/// Residual of the Riccati equation for `z` at `xi`.
pub fn riccati_residual(z: &Profile, phi: &Profile, n: usize, d: usize, xi: f64) -> Result<f64> {
    let pj = phi.jet(xi)?;
    if pj.value == 0.0 {
        return Err(Error::NonPositive {
            what: "conformal factor phi",
            value: 0.0,
            xi,
        });
    }
    riccati_from_jets(z.jet(xi)?, pj, n, d)
}

fn working_domain(profiles: &[&Profile], range: Option<Domain>) -> Result<Domain> {
    let mut dom = range.unwrap_or(Domain::real_line());
    for p in profiles {
        dom = dom.intersect(&p.domain())?;
    }
    if !dom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "a finite xi range is required for the Riccati integrals, got ({}, {})",
            dom.lo, dom.hi
        )));
    }
    Ok(dom)
}

fn check_particular(z: &Profile, phi: &Profile, n: usize, d: usize, dom: Domain) -> Result<()> {
    let w = dom.width();
    let xs = grid_points(dom.lo + GRID_MARGIN * w, dom.hi - GRID_MARGIN * w, CHECK_POINTS);
    let mut worst = (0.0f64, f64::NAN);
    for xi in xs {
        let r = riccati_residual(z, phi, n, d, xi)?;
        if !(r.abs() <= worst.0) {
            worst = (r.abs(), xi);
        }
    }
    if !(worst.0 <= RICCATI_TOL) {
        return Err(Error::Precondition(format!(
            "z_p is not a particular solution of the Riccati equation: residual {:e} at xi = {}",
            worst.0, worst.1
        )));
    }
    Ok(())
}

/// `Phi = int z` and `J = int e^{-(d+1) Phi}`, both zero at the midpoint.
#[derive(Debug, Clone)]
struct RiccatiIntegrals {
    z: Profile,
    phi_int: Arc<CumulativeIntegral>,
    j_int: CumulativeIntegral,
    dp1: f64,
}

impl RiccatiIntegrals {
    fn new(z: &Profile, d: usize, dom: Domain) -> Result<Self> {
        // the closed quadrature range stays strictly inside the open domain
        let eps = 1e-9 * dom.width();
        let (lo, hi) = (dom.lo + eps, dom.hi - eps);
        let mid = dom.midpoint();
        let zc = z.clone();
        let phi_int = Arc::new(CumulativeIntegral::new(
            move |x| zc.value(x).unwrap_or(f64::NAN),
            lo,
            hi,
            mid,
            KNOTS,
        )?);
        let dp1 = d as f64 + 1.0;
        let pi = phi_int.clone();
        let j_int = CumulativeIntegral::new(
            move |x| pi.eval(x).map(|v| (-dp1 * v).exp()).unwrap_or(f64::NAN),
            lo,
            hi,
            mid,
            KNOTS,
        )?;
        Ok(Self {
            z: z.clone(),
            phi_int,
            j_int,
            dp1,
        })
    }

    /// `(Phi, J, J')`
    fn at(&self, xi: f64) -> Result<(f64, f64, f64)> {
        let big_phi = self.phi_int.eval(xi)?;
        Ok((big_phi, self.j_int.eval(xi)?, (-self.dp1 * big_phi).exp()))
    }

    /// Locates a sign change of `offset + scale * J` on the grid.
    fn check_nonvanishing(&self, offset: f64, scale: f64, dom: Domain, what: &str) -> Result<()> {
        let w = dom.width();
        let xs = grid_points(dom.lo + 1e-6 * w, dom.hi - 1e-6 * w, 2 * CHECK_POINTS);
        let mut prev: Option<(f64, f64)> = None;
        for xi in xs {
            let v = offset + scale * self.at(xi)?.1;
            if v == 0.0 {
                return Err(Error::Singularity {
                    lo: xi,
                    hi: xi,
                    reason: format!("{what} vanishes"),
                });
            }
            if let Some((px, pv)) = prev {
                if pv.signum() != v.signum() {
                    return Err(Error::Singularity {
                        lo: px,
                        hi: xi,
                        reason: format!("{what} changes sign"),
                    });
                }
            }
            prev = Some((xi, v));
        }
        Ok(())
    }
}

/// General solution `z0 + Psi / (C - int Psi f2)` with `f2 = -(d+1)/2` and
/// `Psi = e^{-(d+1) int z0}`. An infinite `C` returns `z0`.
pub fn riccati_general_solution(z0: &Profile, phi: &Profile, n: usize, d: usize, c: f64) -> Result<Profile> {
    let dom = working_domain(&[z0, phi], None)?;
    check_particular(z0, phi, n, d, dom)?;
    if c.is_infinite() {
        return Ok(z0.clone());
    }
    if c.is_nan() {
        return Err(Error::InvalidArgument("C must not be NaN".into()));
    }
    let ints = RiccatiIntegrals::new(z0, d, dom)?;
    let half = 0.5 * (d as f64 + 1.0);
    ints.check_nonvanishing(c, half, dom, "denominator C - int Psi f2")?;
    let dp1 = d as f64 + 1.0;
    Ok(Profile::from_jet_fn(dom, move |xi| {
        let z = ints.z.jet(xi)?;
        let (_, j, psi) = ints.at(xi)?;
        let r = psi / (c + half * j);
        let g = -dp1 * z.value - half * r;
        let r1 = r * g;
        let r2 = r1 * g + r * (-dp1 * z.d1 - half * r1);
        Ok(Jet::new(z.value + r, z.d1 + r1, z.d2 + r2))
    }))
}

#[derive(Debug, Clone)]
pub struct Thm17 {
    pub setup: BaseSetup,
    pub phi: Profile,
    pub z_p: Profile,
    pub c: f64,
}

impl Thm17 {
    pub fn new(setup: BaseSetup, phi: Profile, z_p: Profile, c: f64) -> Self {
        Self { setup, phi, z_p, c }
    }

    /// Builds the spec and certifies it at 1e-7 before returning.
    pub fn build(&self, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
        let spec = self.build_uncertified(xi_range)?;
        let rep = certify(&spec, CHECK_POINTS, 1e-7)?;
        if rep.verdict != Verdict::Certified {
            return Err(Error::Precondition(format!(
                "constructed thm17 spec does not certify: {}",
                rep.failure.unwrap_or_default()
            )));
        }
        Ok(spec)
    }

    pub fn build_uncertified(&self, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
        self.setup.require_non_null("thm17")?;
        if !self.c.is_finite() {
            return Err(Error::InvalidArgument("C must be finite".into()));
        }
        let (n, d) = (self.setup.n(), self.setup.d);
        let dom = working_domain(&[&self.phi, &self.z_p], xi_range)?;
        check_particular(&self.z_p, &self.phi, n, d, dom)?;
        let ints = RiccatiIntegrals::new(&self.z_p, d, dom)?;
        let dp1 = d as f64 + 1.0;
        let shift = 2.0 * self.c / dp1;
        ints.check_nonvanishing(shift, 1.0, dom, "J + 2C/(d+1)")?;
        let (_, j_mid, _) = ints.at(dom.midpoint())?;
        if j_mid + shift < 0.0 {
            return Err(Error::Precondition(format!(
                "J + 2C/(d+1) is negative on the range (C = {}); f would not be real",
                self.c
            )));
        }
        let a = (n as f64 - 2.0) / dp1;
        let b = 2.0 / dp1;
        let phi = self.phi.clone();
        let f = Profile::from_jet_fn(dom, move |xi| {
            let pj = phi.positive_jet(xi, "conformal factor phi")?;
            let z = ints.z.jet(xi)?;
            let (big_phi, j, j1) = ints.at(xi)?;
            let k = j + shift;
            let j2 = -dp1 * z.value * j1;
            let lp = pj.d1 / pj.value;
            let l1 = a * lp + z.value + b * j1 / k;
            let l2 = a * (pj.d2 / pj.value - lp * lp) + z.d1 + b * (j2 / k - j1 * j1 / (k * k));
            let v = pj.value.powf(a) * big_phi.exp() * k.powf(b);
            Ok(Jet::new(v, v * l1, v * (l2 + l1 * l1)))
        });
        WarpedSolitonSpec::new(
            self.setup.sig.clone(),
            self.setup.dir.clone(),
            d,
            0.0,
            0.0,
            self.phi.with_domain(dom),
            f,
            Profile::constant(0.0),
            dom,
        )
    }
}

pub fn family_thm17(setup: BaseSetup, phi: Profile, z_p: Profile, c: f64, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
    Thm17::new(setup, phi, z_p, c).build(xi_range)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec_setup() -> (BaseSetup, Profile, Domain) {
        let setup = BaseSetup::new(vec![-1, 1, 1, 1], vec![0.0, 1.0, 1.0, 1.0], 3).unwrap();
        let dom = Domain::new(-1.2, 1.2).unwrap();
        (setup, Profile::expression("abs(sec(xi))", dom).unwrap(), dom)
    }

    #[test]
    fn riccati_examples() {
        let (_, phi, dom) = sec_setup();
        let zp = Profile::constant(-0.5);
        for xi in [-1.0, 0.0, 0.7] {
            assert!(riccati_residual(&zp, &phi, 4, 3, xi).unwrap().abs() < 1e-13);
        }
        let one = Profile::constant(1.0);
        assert_eq!(riccati_residual(&Profile::constant(0.0), &one, 4, 3, 0.3).unwrap(), 0.0);
        assert_eq!(riccati_residual(&one, &one, 4, 1, 0.3).unwrap(), 1.0);
        // z = 0.3 on sec: 0.09 - (1/8)(4 tan^2 - 2(tan^2 + sec^2)) = 0.09 - 1/4 at every point
        let r = riccati_residual(&Profile::constant(0.3), &phi, 4, 3, 0.2).unwrap();
        assert!((r - (0.09 - 0.25)).abs() < 1e-13);
        let _ = dom;
    }

    #[test]
    fn example4_certifies() {
        let (setup, phi, dom) = sec_setup();
        let spec = family_thm17(setup, phi, Profile::constant(-0.5), 1.0, Some(dom)).unwrap();
        let f0 = spec.f.value(0.0).unwrap();
        for xi in [-1.0f64, 0.4, 1.1] {
            let paper = (2.0 * (1.0 / xi.cos()).abs() * xi.exp()).sqrt();
            let ratio = spec.f.value(xi).unwrap() / paper;
            assert!((ratio - f0 / 2f64.sqrt()).abs() < 1e-9, "xi={xi}");
        }
    }

    #[test]
    fn zero_c_crosses_zero_in_midpoint_gauge() {
        let (setup, phi, dom) = sec_setup();
        let r = family_thm17(setup, phi, Profile::constant(-0.5), 0.0, Some(dom));
        assert!(matches!(r, Err(Error::Singularity { .. })), "{r:?}");
    }

    #[test]
    fn non_solution_rejected() {
        let (setup, phi, dom) = sec_setup();
        let r = family_thm17(setup, phi, Profile::constant(0.3), 1.0, Some(dom));
        assert!(matches!(r, Err(Error::Precondition(m)) if m.contains("Riccati")));
    }

    #[test]
    fn flat_general_solution() {
        let dom = Domain::new(0.0, 2.0).unwrap();
        let one = Profile::constant(1.0).with_domain(dom);
        let z0 = Profile::constant(0.0).with_domain(dom);
        let z = riccati_general_solution(&z0, &one, 3, 1, 2.0).unwrap();
        for xi in [0.2, 1.0, 1.9] {
            // z = 1/(C + xi - 1) in the midpoint gauge
            assert!((z.value(xi).unwrap() - 1.0 / (1.0 + xi)).abs() < 1e-10);
            assert!(riccati_residual(&z, &one, 3, 1, xi).unwrap().abs() < 1e-9);
        }
        let same = riccati_general_solution(&z0, &one, 3, 1, f64::INFINITY).unwrap();
        assert_eq!(same.value(1.0).unwrap(), 0.0);
    }

    #[test]
    fn sec_general_solution_is_a_solution() {
        let (_, phi, _) = sec_setup();
        let z = riccati_general_solution(&Profile::constant(-0.5).with_domain(phi.domain()), &phi, 4, 3, 1.0).unwrap();
        for i in 0..25 {
            let xi = -1.1 + 2.2 * i as f64 / 24.0;
            assert!(riccati_residual(&z, &phi, 4, 3, xi).unwrap().abs() < 1e-7, "xi={xi}");
        }
    }
}
