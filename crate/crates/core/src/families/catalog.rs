//! Built-in regression catalog: five closed-form steady solitons written as
//! expression profiles, plus the same data produced by the family constructors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::families::{family_thm16, family_thm17, family_thm18, BaseSetup, Thm15, Thm16};
use crate::geometry::{Domain, Profile};
use crate::soliton::WarpedSolitonSpec;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub spec: WarpedSolitonSpec,
}

pub const IDS: [&str; 5] = ["example-1", "example-2", "example-3", "example-4", "example-5"];

/// Parses `example-k` or `k`.
pub fn parse_id(id: &str) -> Result<u8> {
    let k = id.strip_prefix("example-").unwrap_or(id);
    match k.parse::<u8>() {
        Ok(k @ 1..=5) => Ok(k),
        _ => Err(Error::InvalidArgument(format!("unknown example id '{id}', expected example-1 .. example-5"))),
    }
}

fn expr_spec(
    setup: BaseSetup,
    lambda_f: f64,
    dom: Domain,
    phi: &str,
    f: &str,
    h: &str,
) -> Result<WarpedSolitonSpec> {
    WarpedSolitonSpec::new(
        setup.sig,
        setup.dir,
        setup.d,
        0.0,
        lambda_f,
        Profile::expression(phi, dom)?,
        Profile::expression(f, dom)?,
        Profile::expression(h, dom)?,
        dom,
    )
}

fn example4_setup() -> Result<BaseSetup> {
    BaseSetup::new(vec![-1, 1, 1, 1], vec![0.0, 1.0, 1.0, 1.0], 3)
}

fn example5_setup(n: usize, d: usize) -> Result<BaseSetup> {
    if n < 2 {
        return Err(Error::InvalidArgument("the lightlike example needs n >= 2".into()));
    }
    let mut eps = vec![1i8; n];
    eps[0] = -1;
    let mut alpha = vec![0.0; n];
    alpha[0] = 1.0;
    alpha[1] = 1.0;
    BaseSetup::new(eps, alpha, d)
}

/// Lightlike example `phi = f = e^{k xi}`, `h = -k1 e^{-2k xi} / (2k)` on a
/// Lorentzian `R^n` with `xi = x1 + x2`.
pub fn example5(k: f64, k1: f64, n: usize, d: usize, dom: Domain) -> Result<WarpedSolitonSpec> {
    if k == 0.0 || !k.is_finite() || !k1.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite k != 0 and k1, got k = {k}, k1 = {k1}")));
    }
    let e = format!("exp({k}*xi)");
    let h = format!("-({k1})*exp(-2*({k})*xi)/(2*({k}))");
    expr_spec(example5_setup(n, d)?, 0.0, dom, &e, &e, &h)
}

/// Expression-profile spec for example `k` on its stated domain.
pub fn example(k: u8) -> Result<WarpedSolitonSpec> {
    match k {
        // k3 = 0 limit on R^3 x H^3: phi^2 = -1/(12 xi), h = int phi^-2
        1 => expr_spec(
            BaseSetup::euclidean_axis(3, 3)?,
            -6.0,
            Domain::new(-10.0, 0.0)?,
            "sqrt(-1/(12*xi))",
            "sqrt(-12*xi)",
            "-6*xi^2",
        ),
        2 => expr_spec(
            BaseSetup::euclidean_axis(4, 2)?,
            0.0,
            Domain::new(0.0, 100.0)?,
            "sqrt(xi/20)",
            "sqrt(20/xi)",
            "20*ln(xi)",
        ),
        3 => expr_spec(
            BaseSetup::euclidean_axis(4, 2)?,
            0.0,
            Domain::new(0.0, 10.0 * PI)?,
            "sqrt(tan(xi/20))",
            "sqrt(1/tan(xi/20))",
            "20*ln(sin(xi/20))",
        ),
        4 => expr_spec(
            example4_setup()?,
            0.0,
            // sec grows like 1/cos near the poles; stay where residuals are not
            // dominated by cancellation between terms of size sec^4
            Domain::new(-1.2, 1.2)?,
            "abs(sec(xi))",
            "sqrt(2*abs(sec(xi))*exp(xi))",
            "0",
        ),
        5 => example5(0.5, 1.0, 4, 2, Domain::new(-10.0, 10.0)?),
        _ => Err(Error::InvalidArgument(format!("unknown example {k}, expected 1 .. 5"))),
    }
}

pub fn description(k: u8) -> &'static str {
    match k {
        1 => "R^3 x H^3, k1 = k2 = 1, k3 = k4 = 0, lambda_F = -6",
        2 => "Euclidean R^4 x R^2, phi = sqrt(xi/20), xi > 0",
        3 => "Euclidean R^4 x R^2, phi = sqrt(tan(xi/20)), 0 < xi < 10 pi",
        4 => "Lorentzian R^4 x F^3, phi = |sec xi| on (-1.2, 1.2), z_p = -1/2",
        5 => "Lorentzian R^4 x R^2, lightlike xi = x1 + x2, phi = f = e^{xi/2}",
        _ => "",
    }
}

pub fn catalog() -> Result<Vec<CatalogEntry>> {
    IDS.iter()
        .enumerate()
        .map(|(i, id)| {
            let k = i as u8 + 1;
            Ok(CatalogEntry {
                id,
                description: description(k),
                spec: example(k)?,
            })
        })
        .collect()
}

/// The same example built by its family constructor. Example 4 uses `C = 1`,
/// which in the midpoint gauge makes `f` a constant multiple of the closed form.
pub fn family_example(k: u8) -> Result<WarpedSolitonSpec> {
    match k {
        1 => Thm15::new(BaseSetup::euclidean_axis(3, 3)?, 1.0, 1.0, 0.0, 0.0, -6.0)
            .build(Some(Domain::new(-10.0, -0.1)?))?
            .spec(),
        2 => family_thm16(
            &Thm16::new(BaseSetup::euclidean_axis(4, 2)?, 1.0, 1.0, 0.0, 0.0),
            Some(Domain::new(0.0, 100.0)?),
        ),
        3 => family_thm16(
            &Thm16::new(BaseSetup::euclidean_axis(4, 2)?, 1.0, 1.0, -1.0 / 20.0, 0.0),
            Some(Domain::new(0.0, 10.0 * PI)?),
        ),
        4 => {
            let dom = Domain::new(-1.2, 1.2)?;
            family_thm17(
                example4_setup()?,
                Profile::expression("abs(sec(xi))", dom)?,
                Profile::constant(-0.5),
                1.0,
                Some(dom),
            )
        }
        5 => {
            let dom = Domain::new(-10.0, 10.0)?;
            let e = Profile::expression("exp(0.5*xi)", dom)?;
            family_thm18(example5_setup(4, 2)?, e.clone(), e, 1.0, Some(dom))
        }
        _ => Err(Error::InvalidArgument(format!("unknown example {k}, expected 1 .. 5"))),
    }
}
