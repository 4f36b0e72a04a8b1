//! Lightlike direction: any positive `phi`, `f` with `h = k1 int phi^-2`.

use crate::error::{Error, Result};
use crate::families::quadrature::CumulativeIntegral;
use crate::families::BaseSetup;
use crate::geometry::{Domain, Jet, Profile};
use crate::soliton::{certify, Rho, Verdict, WarpedSolitonSpec};

const KNOTS: usize = 128;

fn finite_domain(phi: &Profile, f: &Profile, xi_range: Option<Domain>) -> Result<Domain> {
    let dom = xi_range
        .unwrap_or(Domain::real_line())
        .intersect(&phi.domain())?
        .intersect(&f.domain())?;
    if !dom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "a finite xi range is required to integrate h, got ({}, {})",
            dom.lo, dom.hi
        )));
    }
    Ok(dom)
}

/// `h = k1 int phi^-2`, zero at the midpoint of `dom`.
pub fn potential_from_phi(phi: &Profile, k1: f64, dom: Domain) -> Result<Profile> {
    if !k1.is_finite() {
        return Err(Error::InvalidArgument("k1 must be finite".into()));
    }
    let eps = 1e-9 * dom.width();
    let p = phi.clone();
    let integral = CumulativeIntegral::new(
        move |x| p.value(x).map(|v| 1.0 / (v * v)).unwrap_or(f64::NAN),
        dom.lo + eps,
        dom.hi - eps,
        dom.midpoint(),
        KNOTS,
    )?;
    let phi = phi.clone();
    Ok(Profile::from_jet_fn(dom, move |xi| {
        let pj = phi.positive_jet(xi, "conformal factor phi")?;
        let inv2 = 1.0 / (pj.value * pj.value);
        Ok(Jet::new(
            k1 * integral.eval(xi)?,
            k1 * inv2,
            -2.0 * k1 * pj.d1 * inv2 / pj.value,
        ))
    }))
}

fn certified(spec: WarpedSolitonSpec, family: &str) -> Result<WarpedSolitonSpec> {
    let rep = certify(&spec, 200, 1e-7)?;
    if rep.verdict != Verdict::Certified {
        return Err(Error::Precondition(format!(
            "constructed {family} spec does not certify: {}",
            rep.failure.unwrap_or_default()
        )));
    }
    Ok(spec)
}

/// Steady soliton for a lightlike direction; `lambda_F = 0`, `rho = 0`.
pub fn family_thm18(setup: BaseSetup, phi: Profile, f: Profile, k1: f64, xi_range: Option<Domain>) -> Result<WarpedSolitonSpec> {
    setup.require_lightlike("thm18")?;
    let dom = finite_domain(&phi, &f, xi_range)?;
    let h = potential_from_phi(&phi, k1, dom)?;
    let spec = WarpedSolitonSpec::new(
        setup.sig,
        setup.dir,
        setup.d,
        0.0,
        0.0,
        phi.with_domain(dom),
        f.with_domain(dom),
        h,
        dom,
    )?;
    certified(spec, "thm18")
}

/// Almost soliton with `rho = lambda_F / f^2` as a base function.
pub fn almost_soliton_lightlike(
    setup: BaseSetup,
    phi: Profile,
    f: Profile,
    k1: f64,
    lambda_f: f64,
    xi_range: Option<Domain>,
) -> Result<WarpedSolitonSpec> {
    setup.require_lightlike("almost-lightlike")?;
    let dom = finite_domain(&phi, &f, xi_range)?;
    let h = potential_from_phi(&phi, k1, dom)?;
    let fc = f.clone();
    let rho = Profile::from_jet_fn(dom, move |xi| {
        let j = fc.positive_jet(xi, "warping function f")?;
        let v = lambda_f / (j.value * j.value);
        let l = j.d1 / j.value;
        Ok(Jet::new(
            v,
            -2.0 * v * l,
            v * (6.0 * l * l - 2.0 * j.d2 / j.value),
        ))
    });
    let spec = WarpedSolitonSpec::with_rho(
        setup.sig,
        setup.dir,
        setup.d,
        Rho::Field(rho),
        lambda_f,
        phi.with_domain(dom),
        f.with_domain(dom),
        h,
        dom,
    )?;
    certified(spec, "almost-lightlike")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_setup() -> BaseSetup {
        BaseSetup::new(vec![-1, 1, 1, 1], vec![1.0, 1.0, 0.0, 0.0], 2).unwrap()
    }

    fn dom() -> Domain {
        Domain::new(-10.0, 10.0).unwrap()
    }

    #[test]
    fn exponential_potential() {
        let k = 0.5;
        let e = Profile::expression("exp(0.5*xi)", dom()).unwrap();
        let spec = family_thm18(null_setup(), e.clone(), e, 1.0, None).unwrap();
        let closed = |x: f64| -(-2.0 * k * x).exp() / (2.0 * k);
        for x in [-9.0, -2.5, 3.0, 9.5] {
            let dh = spec.h.value(x).unwrap() - spec.h.value(0.0).unwrap();
            assert!((dh - (closed(x) - closed(0.0))).abs() < 1e-9 * closed(x).abs().max(1.0), "x={x}");
            let j = spec.h.jet(x).unwrap();
            assert!((j.d1 - (-2.0 * k * x).exp()).abs() < 1e-12 * j.d1);
        }
    }

    #[test]
    fn unit_phi_gives_linear_h() {
        let one = Profile::constant(1.0);
        let spec = family_thm18(null_setup(), one.clone(), one, 3.0, Some(dom())).unwrap();
        assert!((spec.h.value(4.0).unwrap() - 12.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_null() {
        let setup = BaseSetup::euclidean_axis(4, 2).unwrap();
        let one = Profile::constant(1.0);
        assert!(matches!(
            family_thm18(setup, one.clone(), one, 1.0, Some(dom())),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn almost_soliton_rho_field() {
        let f = Profile::expression("exp(0.5*xi)", dom()).unwrap();
        let spec = almost_soliton_lightlike(null_setup(), f.clone(), f, 1.0, 2.0, None).unwrap();
        for x in [-3.0, 0.0, 2.0] {
            assert!((spec.rho.at(x).unwrap() - 2.0 * (-x).exp()).abs() < 1e-12);
        }
        let one = Profile::constant(1.0);
        let spec = almost_soliton_lightlike(null_setup(), one.clone(), one, 1.0, 5.0, Some(dom())).unwrap();
        assert_eq!(spec.rho.at(1.0).unwrap(), 5.0);
    }
}
