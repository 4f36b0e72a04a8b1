//! Closed-form tensors of the conformal base `g_B = phi(xi)^-2 delta`.
//!
//! All formulas use `phi_{,x_i} = phi' alpha_i` and
//! `phi_{,x_i x_j} = phi'' alpha_i alpha_j`.

use crate::error::{Error, Result};
use crate::geometry::profile::{Jet, Profile};
use crate::geometry::signature::{SignatureSpec, TranslationDirection};

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::InvalidArgument(format!(
            "index {i} out of range for n = {n}"
        )));
    }
    Ok(())
}

fn check_dims(dir: &TranslationDirection, sig: &SignatureSpec) -> Result<()> {
    if dir.alpha().len() != sig.n() {
        return Err(Error::DimensionMismatch {
            expected: sig.n(),
            got: dir.alpha().len(),
        });
    }
    Ok(())
}

/// `Gamma^k_ij` of `g_B` from the conformal-factor jet.
///
/// `Gamma^k_ij = -(delta^k_i phi_j + delta^k_j phi_i - delta_ij eps_i eps_k phi_k) / phi`,
/// which vanishes for pairwise distinct indices.
pub fn christoffel_from_jet(
    phi: Jet,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    i: usize,
    j: usize,
    k: usize,
) -> f64 {
    let a = dir.alpha();
    let dphi = |m: usize| phi.d1 * a[m];
    let mut num = 0.0;
    if k == i {
        num += dphi(j);
    }
    if k == j {
        num += dphi(i);
    }
    if i == j {
        num -= sig.eps(i) * sig.eps(k) * dphi(k);
    }
    -num / phi.value
}

pub fn christoffel_conformal(
    phi: &Profile,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    (i, j, k): (usize, usize, usize),
    xi: f64,
) -> Result<f64> {
    check_dims(dir, sig)?;
    for idx in [i, j, k] {
        check_index(idx, sig.n())?;
    }
    let p = phi.positive_jet(xi, "conformal factor phi")?;
    Ok(christoffel_from_jet(p, dir, sig, i, j, k))
}

/// `S_B = ||alpha||^2 (n-1)(2 phi phi'' - n phi'^2)`
pub fn scalar_curvature_from_jet(phi: Jet, norm: f64, n: usize) -> f64 {
    let n = n as f64;
    norm * (n - 1.0) * (2.0 * phi.value * phi.d2 - n * phi.d1 * phi.d1)
}

pub fn conformal_scalar_curvature(
    phi: &Profile,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    xi: f64,
) -> Result<f64> {
    check_dims(dir, sig)?;
    let p = phi.jet(xi)?;
    Ok(scalar_curvature_from_jet(p, dir.signed_norm(), sig.n()))
}

/// `Hess(h)_ij = alpha_i alpha_j h'' + (2 alpha_i alpha_j - delta_ij eps_i ||alpha||^2) phi'/phi h'`
pub fn hessian_from_jets(
    h: Jet,
    phi: Jet,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    i: usize,
    j: usize,
) -> f64 {
    let a = dir.alpha();
    let aa = a[i] * a[j];
    let diag = if i == j {
        sig.eps(i) * dir.signed_norm()
    } else {
        0.0
    };
    aa * h.d2 + (2.0 * aa - diag) * (phi.d1 / phi.value) * h.d1
}

pub fn conformal_hessian(
    h: &Profile,
    phi: &Profile,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    (i, j): (usize, usize),
    xi: f64,
) -> Result<f64> {
    check_dims(dir, sig)?;
    check_index(i, sig.n())?;
    check_index(j, sig.n())?;
    let p = phi.positive_jet(xi, "conformal factor phi")?;
    let hj = h.jet(xi)?;
    Ok(hessian_from_jets(hj, p, dir, sig, i, j))
}

/// Laplacian of `f` and the gradient pairings on `g_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairings {
    /// `||alpha||^2 phi^2 (f'' - (n-2) phi'/phi f')`
    pub laplacian_f: f64,
    /// `||alpha||^2 phi^2 f' h'`
    pub pairing_fh: f64,
    /// `||alpha||^2 phi^2 f'^2`
    pub gradsq_f: f64,
}

pub fn pairings_from_jets(f: Jet, h: Jet, phi: Jet, norm: f64, n: usize) -> Pairings {
    let n = n as f64;
    let p2 = phi.value * phi.value;
    Pairings {
        laplacian_f: norm * p2 * (f.d2 - (n - 2.0) * (phi.d1 / phi.value) * f.d1),
        pairing_fh: norm * p2 * f.d1 * h.d1,
        gradsq_f: norm * p2 * f.d1 * f.d1,
    }
}

/// Laplacian of a single profile on `g_B`.
pub fn laplacian_from_jets(u: Jet, phi: Jet, norm: f64, n: usize) -> f64 {
    pairings_from_jets(u, Jet::default(), phi, norm, n).laplacian_f
}

pub fn conformal_laplacian_and_pairings(
    f: &Profile,
    h: &Profile,
    phi: &Profile,
    dir: &TranslationDirection,
    sig: &SignatureSpec,
    xi: f64,
) -> Result<Pairings> {
    check_dims(dir, sig)?;
    let p = phi.positive_jet(xi, "conformal factor phi")?;
    Ok(pairings_from_jets(
        f.jet(xi)?,
        h.jet(xi)?,
        p,
        dir.signed_norm(),
        sig.n(),
    ))
}

/// Components of `grad_{g_B} u = phi^2 eps_r alpha_r u'`.
pub fn gradient_from_jets(u: Jet, phi: Jet, dir: &TranslationDirection, sig: &SignatureSpec) -> Vec<f64> {
    let p2 = phi.value * phi.value;
    dir.alpha()
        .iter()
        .enumerate()
        .map(|(r, a)| p2 * sig.eps(r) * a * u.d1)
        .collect()
}
