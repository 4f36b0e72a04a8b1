#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yamabe_core::geometry::{Domain, Profile, SignatureSpec, TranslationDirection};
use yamabe_core::soliton::WarpedSolitonSpec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive profile on `[-2, 2]`.
pub fn positive_expr(r: &mut ChaCha8Rng) -> String {
    match r.random_range(0..4) {
        0 => format!(
            "{}+({})*sin({}*xi)",
            r.random_range(1.5..3.0),
            r.random_range(-1.0..1.0),
            r.random_range(0.2..1.5)
        ),
        1 => format!("exp(({})*xi)", r.random_range(-0.8..0.8)),
        2 => format!("{}+{}*xi^2", r.random_range(0.5..2.0), r.random_range(0.0..0.5)),
        _ => {
            let a = r.random_range(0.1..0.9);
            format!("(exp({a}*xi)+exp(-{a}*xi))/2")
        }
    }
}

pub fn any_expr(r: &mut ChaCha8Rng) -> String {
    match r.random_range(0..3) {
        0 => format!(
            "({})*xi^2+({})*cos({}*xi)",
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(0.2..2.0)
        ),
        1 => format!("({})*exp(({})*xi)", r.random_range(-2.0..2.0), r.random_range(-1.0..1.0)),
        _ => format!("({})*sin(xi)+({})*xi^3", r.random_range(-2.0..2.0), r.random_range(-0.3..0.3)),
    }
}

pub fn profile(src: &str) -> Profile {
    Profile::expression(src, domain()).unwrap()
}

pub fn domain() -> Domain {
    Domain::new(-2.0, 2.0).unwrap()
}

/// Random signature of dimension 3..=5 and a non-null direction.
pub fn base(r: &mut ChaCha8Rng) -> (SignatureSpec, TranslationDirection) {
    loop {
        let n = r.random_range(3..=5);
        let eps: Vec<i8> = (0..n).map(|_| if r.random_bool(0.3) { -1 } else { 1 }).collect();
        let alpha: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let Ok(sig) = SignatureSpec::new(eps) else { continue };
        let Ok(dir) = TranslationDirection::new(alpha, &sig) else { continue };
        if dir.signed_norm().abs() > 0.1 {
            return (sig, dir);
        }
    }
}

/// Arbitrary (generally non-soliton) spec with random profiles.
pub fn random_spec(r: &mut ChaCha8Rng, rho: f64, lambda_f: f64) -> WarpedSolitonSpec {
    let (sig, dir) = base(r);
    let d = r.random_range(1..=3);
    WarpedSolitonSpec::new(
        sig,
        dir,
        d,
        rho,
        lambda_f,
        profile(&positive_expr(r)),
        profile(&positive_expr(r)),
        profile(&any_expr(r)),
        domain(),
    )
    .unwrap()
}

pub fn sample_xi(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-1.8..1.8)
}
